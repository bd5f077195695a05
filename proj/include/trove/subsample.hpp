#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "trove/flat_index.hpp"

namespace trove {

struct SubsampleSpec {
  double p = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const SubsampleSpec&, const SubsampleSpec&) = default;
};

/// u = top 53 bits of hash64(passage_id bytes || seed as 8 LE bytes) / 2^53.
/// Always in [0, 1).
double inclusion_draw(std::string_view passage_id, std::uint64_t seed);

/// Bernoulli(p) inclusion fixed by (passage_id, seed): include iff u < p.
/// Inclusion is nested in p for a fixed seed.
bool include(std::string_view passage_id, const SubsampleSpec& spec);

/// Keeps members satisfying include(), preserving order.
std::vector<ScoredDoc> subsample_set(const std::vector<ScoredDoc>& docs, const SubsampleSpec& spec);

/// Same predicate over any element type; `id_of` yields the passage id.
template <typename T, typename IdOf>
std::vector<T> subsample_by(const std::vector<T>& items, const SubsampleSpec& spec, IdOf&& id_of) {
  spec.validate();
  std::vector<T> out;
  for (const auto& x : items) {
    if (include(id_of(x), spec)) out.push_back(x);
  }
  return out;
}

/// P(Binomial(K, p) >= m), computed exactly: the smaller tail is summed in log
/// space (log-sum-exp over lgamma-based log pmf terms).
double tail_bound(std::uint64_t K, double p, std::uint64_t m);

}  // namespace trove
