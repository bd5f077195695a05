#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trove/flat_index.hpp"

namespace trove {

/// A retrieved document flowing through filtering, subsampling and reranking.
struct Candidate {
  ScoredDoc doc;
  std::string text;
  std::size_t rank = 0;  // position in the merged retrieval order
  std::optional<double> rerank_score;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

using Pool = std::vector<Candidate>;

/// Looks up passage text by id; returns nullptr when unknown.
using TextLookup = std::function<const std::string*(std::string_view passage_id)>;

/// Attaches texts and ranks (0-based, in input order). Throws IntegrityError
/// for an id the lookup does not know.
Pool make_pool(const std::vector<ScoredDoc>& docs, const TextLookup& lookup);

std::vector<ScoredDoc> pool_docs(const Pool& pool);

}  // namespace trove
