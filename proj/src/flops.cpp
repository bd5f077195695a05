#include "trove/flops.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "trove/errors.hpp"

namespace trove {

namespace {

void require_non_negative(const FlopCount& v, const char* what) {
  if (v < 0) throw ConfigError(std::string(what) + " must be >= 0");
}

bool better(double a, double b, MetricDirection d) {
  return d == MetricDirection::HigherBetter ? a > b : a < b;
}

}  // namespace

FlopCount flops_pretrain(const FlopCount& lm_params, const FlopCount& pretrain_tokens) {
  require_non_negative(lm_params, "N_LM");
  require_non_negative(pretrain_tokens, "D_pretrain");
  return 6 * lm_params * pretrain_tokens;
}

FlopCount flops_datastore(const FlopCount& retriever_params, const FlopCount& datastore_tokens) {
  require_non_negative(retriever_params, "N_retriever");
  require_non_negative(datastore_tokens, "D_datastore");
  return 2 * retriever_params * datastore_tokens;
}

FlopCount flops_total(const FlopsModel& m) {
  return flops_pretrain(m.lm_params, m.pretrain_tokens) +
         flops_datastore(m.retriever_params, m.datastore_tokens);
}

FlopCount parse_count(std::string_view s) {
  const std::string original(s);
  auto fail = [&]() -> FlopCount {
    throw ConfigError("'" + original + "' is not a non-negative integer count");
  };
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) return fail();

  std::string digits;
  long long scale = 0;  // value = digits * 10^scale
  std::size_t i = 0;
  for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) digits += s[i];
  if (i < s.size() && s[i] == '.') {
    for (++i; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
      digits += s[i];
      --scale;
    }
  }
  if (digits.empty()) return fail();
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
    if (i == s.size()) return fail();
    long long exp = 0;
    for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
      exp = exp * 10 + (s[i] - '0');
      if (exp > 10000) return fail();
    }
    scale += neg ? -exp : exp;
  }
  if (i != s.size()) return fail();

  FlopCount v(digits);
  for (; scale > 0; --scale) v *= 10;
  for (; scale < 0; ++scale) {
    if (v % 10 != 0) return fail();
    v /= 10;
  }
  return v;
}

std::string to_scientific(const FlopCount& v, int digits) {
  if (v == 0) return "0";
  std::string s = v.str();
  const bool neg = s.front() == '-';
  if (neg) s.erase(0, 1);
  const auto exponent = static_cast<int>(s.size()) - 1;
  std::string mant = s.substr(0, static_cast<std::size_t>(std::max(1, digits)));
  while (mant.size() > 1 && mant.back() == '0') mant.pop_back();
  std::string out = neg ? "-" : "";
  out += mant.substr(0, 1);
  if (mant.size() > 1) out += "." + mant.substr(1);
  return out + "e" + std::to_string(exponent);
}

std::vector<std::size_t> pareto_indices(const std::vector<FrontierPoint>& points,
                                        MetricDirection direction) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a].flops < points[b].flops; });

  std::vector<bool> keep(points.size(), false);
  bool have_best = false;
  double best = 0.0;  // best metric among points with flops <= current group
  for (std::size_t g = 0; g < order.size();) {
    std::size_t end = g;
    while (end < order.size() && points[order[end]].flops == points[order[g]].flops) {
      const double m = points[order[end]].metric;
      if (!have_best || better(m, best, direction)) best = m;
      have_best = true;
      ++end;
    }
    for (std::size_t i = g; i < end; ++i) {
      keep[order[i]] = !better(best, points[order[i]].metric, direction);
    }
    g = end;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (keep[i]) out.push_back(i);
  }
  return out;
}

std::vector<FrontierPoint> pareto_frontier(const std::vector<FrontierPoint>& points,
                                           MetricDirection direction) {
  std::vector<FrontierPoint> out;
  for (std::size_t i : pareto_indices(points, direction)) out.push_back(points[i]);
  return out;
}

}  // namespace trove
