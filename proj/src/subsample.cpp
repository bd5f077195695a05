#include "trove/subsample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trove/errors.hpp"
#include "trove/hash.hpp"

namespace trove {

void SubsampleSpec::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("subsampling ratio p must be in [0, 1]");
}

double inclusion_draw(std::string_view passage_id, std::uint64_t seed) {
  Hasher64 h;
  h.update(passage_id);
  h.update_u64_le(seed);
  return static_cast<double>(h.digest() >> 11) * 0x1.0p-53;
}

bool include(std::string_view passage_id, const SubsampleSpec& spec) {
  return inclusion_draw(passage_id, spec.seed) < spec.p;
}

std::vector<ScoredDoc> subsample_set(const std::vector<ScoredDoc>& docs,
                                     const SubsampleSpec& spec) {
  return subsample_by(docs, spec, [](const ScoredDoc& d) -> std::string_view { return d.passage_id; });
}

namespace {

double log_pmf(std::uint64_t K, std::uint64_t i, double log_p, double log_q) {
  const double n = static_cast<double>(K);
  const double k = static_cast<double>(i);
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * log_p +
         (n - k) * log_q;
}

// log sum_{i in [lo, hi)} pmf(i)
double log_sum_pmf(std::uint64_t K, std::uint64_t lo, std::uint64_t hi, double log_p,
                   double log_q) {
  if (lo >= hi) return -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(hi - lo);
  for (std::uint64_t i = lo; i < hi; ++i) terms.push_back(log_pmf(K, i, log_p, log_q));
  const double mx = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += std::exp(t - mx);
  return mx + std::log(s);
}

}  // namespace

double tail_bound(std::uint64_t K, double p, std::uint64_t m) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("tail_bound: p must be in [0, 1]");
  if (m == 0) return 1.0;
  if (m > K) return 0.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double lower = log_sum_pmf(K, 0, m, log_p, log_q);      // P(X < m)
  const double upper = log_sum_pmf(K, m, K + 1, log_p, log_q);  // P(X >= m)
  // Return whichever side is small directly; subtract only from the large one.
  if (upper < lower) return std::exp(upper);
  return -std::expm1(lower);
}

}  // namespace trove
