#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "trove/pool.hpp"

namespace trove {

inline constexpr std::size_t kDefaultRerankDepth = 500;

struct RerankSpec {
  std::string scorer = "none";
  std::size_t K_prime = 3;  // equals k when reranking is off
  std::size_t k = 3;

  void validate() const;
};

/// What a scorer may look at besides the document.
struct RerankQuery {
  std::string query_id;
  std::string text;
  std::vector<std::string> answers;
};

/// Element-level document scorer: the score of a document depends only on
/// (query, document), never on the other documents in the batch.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::string name() const = 0;
  /// One score per document, aligned with `docs`.
  virtual std::vector<double> score(const RerankQuery& query, const Pool& docs) const = 0;
};

/// Returns the retrieval score unchanged.
class IdentityScorer final : public Scorer {
 public:
  std::string name() const override { return "identity"; }
  std::vector<double> score(const RerankQuery& query, const Pool& docs) const override;
};

/// Lexical oracle using the gold answers (see oracle_score).
class OracleScorer final : public Scorer {
 public:
  std::string name() const override { return "oracle"; }
  std::vector<double> score(const RerankQuery& query, const Pool& docs) const override;
};

/// Runs an external program once per batch. Its stdin receives one JSON
/// object per line, {"qid", "query", "pid", "doc"}; it must print exactly one
/// number per line, in order.
class ExternalScorer final : public Scorer {
 public:
  explicit ExternalScorer(std::filesystem::path program);
  std::string name() const override { return "extern:" + program_.string(); }
  std::vector<double> score(const RerankQuery& query, const Pool& docs) const override;

 private:
  std::filesystem::path program_;
};

/// "none" yields nullptr; otherwise "identity", "oracle" or "extern:<path>".
std::unique_ptr<Scorer> make_scorer(std::string_view name);

/// 1.0 when some answer's normalized token sequence occurs contiguously in
/// the document; otherwise the best fraction of an answer's distinct
/// unigrams present in the document. Tokens are lowercased with surrounding
/// punctuation stripped. Throws ConfigError for an empty answer list.
double oracle_score(std::string_view doc, const std::vector<std::string>& answers);

/// Sets rerank_score on every candidate.
void score_pool(Pool& pool, const Scorer& scorer, const RerankQuery& query);

/// Orders by rerank_score descending (unscored candidates keep retrieval
/// order), ties broken by retrieval rank, and keeps the first k.
Pool select_top(Pool pool, std::size_t k);

/// Scores the first K_prime documents and returns the best k of them.
Pool rerank(const Pool& docs, const Scorer& scorer, const RerankQuery& query,
            const RerankSpec& spec);

}  // namespace trove
