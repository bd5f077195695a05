#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace trove {

using FlopCount = boost::multiprecision::cpp_int;

struct FlopsModel {
  FlopCount lm_params;         // N_LM
  FlopCount pretrain_tokens;   // D_pretrain
  FlopCount retriever_params;  // N_retriever
  FlopCount datastore_tokens;  // D_datastore
};

/// 6 * N_LM * D_pretrain (one forward plus one backward pass per token).
FlopCount flops_pretrain(const FlopCount& lm_params, const FlopCount& pretrain_tokens);
/// 2 * N_retriever * D_datastore (one embedding forward pass per token; a flat
/// index adds nothing).
FlopCount flops_datastore(const FlopCount& retriever_params, const FlopCount& datastore_tokens);
FlopCount flops_total(const FlopsModel& model);

/// Parses a non-negative integer written as digits or in exact scientific
/// notation ("1.4e12", "177e6"). Throws ConfigError if the value is not an
/// integer.
FlopCount parse_count(std::string_view s);
/// Scientific rendering with up to `digits` significant digits, e.g. "4.956e20".
std::string to_scientific(const FlopCount& v, int digits = 6);

enum class MetricDirection { HigherBetter, LowerBetter };

struct FrontierPoint {
  FlopCount flops;
  double metric = 0.0;
  std::string tags;
};

/// Indices (ascending) of the points no other point dominates. q dominates p
/// when q.flops <= p.flops and q.metric is strictly better.
std::vector<std::size_t> pareto_indices(const std::vector<FrontierPoint>& points,
                                        MetricDirection direction);
std::vector<FrontierPoint> pareto_frontier(const std::vector<FrontierPoint>& points,
                                           MetricDirection direction);

}  // namespace trove
