#include <fstream>

#include "trove/pipeline.hpp"
#include "trove/text.hpp"

namespace trove {

using nlohmann::json;

std::string_view to_string(DedupSetting d) {
  switch (d) {
    case DedupSetting::Off: return "off";
    case DedupSetting::Exact: return "exact";
    case DedupSetting::Jaccard: return "jaccard";
    case DedupSetting::MinHash: return "minhash";
  }
  return "unknown";
}

DedupSetting dedup_setting_from_name(std::string_view name) {
  if (name == "off" || name == "none") return DedupSetting::Off;
  if (name == "exact") return DedupSetting::Exact;
  if (name == "jaccard" || name == "on") return DedupSetting::Jaccard;
  if (name == "minhash") return DedupSetting::MinHash;
  throw ConfigError("dedup: unknown setting '" + std::string(name) +
                    "' (expected off, exact, jaccard or minhash)");
}

std::size_t PipelineConfig::effective_K_prime() const {
  if (K_prime) return *K_prime;
  return reranker == "none" ? k : std::max(k, std::min(kDefaultRerankDepth, K));
}

std::size_t PipelineConfig::required_survivors() const {
  return reranker == "none" ? k : effective_K_prime();
}

DedupConfig PipelineConfig::dedup_config() const {
  DedupConfig c;
  c.threshold = dedup_threshold;
  c.n = dedup_n;
  c.min_words = min_words;
  switch (dedup) {
    case DedupSetting::Exact: c.method = DedupMethod::Exact; break;
    case DedupSetting::MinHash: c.method = DedupMethod::MinHash; break;
    default: c.method = DedupMethod::Jaccard; break;
  }
  return c;
}

void PipelineConfig::validate() const {
  std::vector<std::string> errors;
  if (K < 1) errors.push_back("K: must be >= 1");
  if (k < 1) errors.push_back("k: must be >= 1");
  const std::size_t kp = effective_K_prime();
  if (kp < k) errors.push_back("K_prime: must be >= k");
  if (kp > K) errors.push_back("K_prime: must be <= K");
  if (k > K) errors.push_back("k: must be <= K");
  if (ratios.empty()) errors.push_back("p: at least one ratio required");
  for (double p : ratios) {
    if (!(p >= 0.0 && p <= 1.0)) {
      errors.push_back("p: " + std::to_string(p) + " is outside [0, 1]");
    }
  }
  if (seeds.empty()) errors.push_back("seeds: at least one seed required");
  if (decon.jaccard_threshold <= 0.0 || decon.jaccard_threshold > 1.0) {
    errors.push_back("decon_jaccard_threshold: must be in (0, 1]");
  }
  if (decon.jaccard_n < 1) errors.push_back("decon_jaccard_n: must be >= 1");
  if (decon.contiguous_n < 1) errors.push_back("decon_contiguous_n: must be >= 1");
  if (dedup_threshold <= 0.0 || dedup_threshold > 1.0) {
    errors.push_back("dedup_threshold: must be in (0, 1]");
  }
  if (dedup_n < 1) errors.push_back("dedup_n: must be >= 1");
  if (fallback_K && *fallback_K <= K) errors.push_back("fallback_K: must be > K");
  if (embedder.dim < 1) errors.push_back("dim: must be >= 1");
  if (!(reranker == "none" || reranker == "oracle" || reranker == "identity" ||
        (reranker.starts_with("extern:") && reranker.size() > 7))) {
    errors.push_back("reranker: expected none, oracle, identity or extern:<path>");
  }
  if (errors.empty()) return;
  std::string msg = "invalid pipeline config:";
  for (const auto& e : errors) msg += "\n  " + e;
  throw ConfigError(msg);
}

namespace {

template <typename T>
T field(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

}  // namespace

PipelineConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  PipelineConfig c;
  std::vector<std::string> unknown;
  for (const auto& [key, value] : j.items()) {
    if (key == "K") {
      c.K = field<std::size_t>(j, key);
    } else if (key == "k") {
      c.k = field<std::size_t>(j, key);
    } else if (key == "K_prime") {
      if (!value.is_null()) c.K_prime = field<std::size_t>(j, key);
    } else if (key == "p") {
      c.ratios = field<std::vector<double>>(j, key);
    } else if (key == "seeds") {
      c.seeds = field<std::vector<std::uint64_t>>(j, key);
    } else if (key == "decon") {
      c.decon = DecontaminationMode::from_name(field<std::string>(j, key));
    } else if (key == "decon_jaccard_threshold" || key == "decon_jaccard_n" ||
               key == "decon_contiguous_n") {
      // applied after the mode so the order of keys does not matter
    } else if (key == "dedup") {
      c.dedup = dedup_setting_from_name(field<std::string>(j, key));
    } else if (key == "dedup_threshold") {
      c.dedup_threshold = field<double>(j, key);
    } else if (key == "dedup_n") {
      c.dedup_n = field<std::size_t>(j, key);
    } else if (key == "min_words") {
      c.min_words = field<std::size_t>(j, key);
    } else if (key == "quality_min_tokens") {
      c.quality.min_whitespace_tokens = field<std::size_t>(j, key);
    } else if (key == "quality_require_alnum") {
      c.quality.require_alphanumeric = field<bool>(j, key);
    } else if (key == "quality_max_punct_span") {
      c.quality.max_punct_span = field<std::size_t>(j, key);
    } else if (key == "reranker") {
      c.reranker = field<std::string>(j, key);
    } else if (key == "domains") {
      const auto d = field<std::vector<std::string>>(j, key);
      c.domains = {d.begin(), d.end()};
    } else if (key == "fallback_K") {
      if (!value.is_null()) c.fallback_K = field<std::size_t>(j, key);
    } else if (key == "embedder") {
      c.embedder.name = field<std::string>(j, key);
    } else if (key == "dim") {
      c.embedder.dim = field<std::uint32_t>(j, key);
    } else if (key == "retriever_params") {
      c.embedder.parameter_count = field<std::uint64_t>(j, key);
    } else {
      unknown.push_back(key);
    }
  }
  if (j.contains("decon_jaccard_threshold")) {
    c.decon.jaccard_threshold = field<double>(j, "decon_jaccard_threshold");
  }
  if (j.contains("decon_jaccard_n")) c.decon.jaccard_n = field<std::size_t>(j, "decon_jaccard_n");
  if (j.contains("decon_contiguous_n")) {
    c.decon.contiguous_n = field<std::size_t>(j, "decon_contiguous_n");
  }
  if (!unknown.empty()) {
    throw ConfigError("config: unknown field(s): " + text::join(unknown, ", "));
  }
  return c;
}

json config_to_json(const PipelineConfig& c) {
  json j{{"K", c.K},
         {"k", c.k},
         {"K_prime", c.effective_K_prime()},
         {"p", c.ratios},
         {"seeds", c.seeds},
         {"decon", std::string(to_string(c.decon.variant))},
         {"decon_jaccard_threshold", c.decon.jaccard_threshold},
         {"decon_jaccard_n", c.decon.jaccard_n},
         {"decon_contiguous_n", c.decon.contiguous_n},
         {"dedup", std::string(to_string(c.dedup))},
         {"dedup_threshold", c.dedup_threshold},
         {"dedup_n", c.dedup_n},
         {"min_words", c.min_words},
         {"quality_min_tokens", c.quality.min_whitespace_tokens},
         {"quality_require_alnum", c.quality.require_alphanumeric},
         {"quality_max_punct_span", c.quality.max_punct_span},
         {"reranker", c.reranker},
         {"domains", c.domains},
         {"fallback_K", c.fallback_K ? json(*c.fallback_K) : json(nullptr)},
         {"embedder", c.embedder.name},
         {"dim", c.embedder.dim},
         {"retriever_params", c.embedder.parameter_count}};
  return j;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::vector<QueryRecord> read_queries_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::vector<QueryRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(lineno);
    try {
      const json j = json::parse(line);
      QueryRecord q;
      q.query_id = j.at("qid").get<std::string>();
      q.question = j.at("question").get<std::string>();
      if (j.contains("answers")) q.answers = j.at("answers").get<std::vector<std::string>>();
      if (j.contains("fewshot")) q.fewshot = j.at("fewshot").get<std::string>();
      if (j.contains("ppl_target_tokens")) {
        const auto& t = j.at("ppl_target_tokens");
        q.ppl_target = t.is_array() ? text::join(t.get<std::vector<std::string>>())
                                    : t.get<std::string>();
        if (!q.answers.empty()) {
          throw ConfigError(where + ": perplexity query must not carry answers");
        }
      }
      out.push_back(std::move(q));
    } catch (const json::exception& e) {
      throw IntegrityError(where + ": " + e.what());
    }
  }
  return out;
}

void write_queries_jsonl(const std::filesystem::path& path, const std::vector<QueryRecord>& qs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& q : qs) {
    json j{{"qid", q.query_id}, {"question", q.question}};
    if (!q.answers.empty()) j["answers"] = q.answers;
    if (!q.fewshot.empty()) j["fewshot"] = q.fewshot;
    if (q.ppl_target) j["ppl_target_tokens"] = *q.ppl_target;
    out << j.dump() << '\n';
  }
}

}  // namespace trove
