#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "trove/corpus.hpp"
#include "trove/errors.hpp"
#include "trove/embedding.hpp"
#include "trove/filters.hpp"
#include "trove/flat_index.hpp"
#include "trove/rerank.hpp"
#include "trove/retrieval.hpp"
#include "trove/subsample.hpp"

namespace trove {

enum class DedupSetting { Off, Exact, Jaccard, MinHash };

std::string_view to_string(DedupSetting d);
DedupSetting dedup_setting_from_name(std::string_view name);

struct PipelineConfig {
  std::size_t K = kDefaultRetrievalDepth;
  std::size_t k = 3;
  std::optional<std::size_t> K_prime;  // unset: k without reranker, 500 with one
  std::vector<double> ratios = {0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0};
  std::vector<std::uint64_t> seeds = {100, 101, 102};
  DecontaminationMode decon = DecontaminationMode::standard();
  DedupSetting dedup = DedupSetting::Jaccard;
  double dedup_threshold = 0.8;
  std::size_t dedup_n = 13;
  std::size_t min_words = 13;
  QualityConfig quality;
  std::string reranker = "none";
  std::set<std::string> domains;  // empty: every domain present
  std::optional<std::size_t> fallback_K;
  EmbedderSpec embedder;

  std::size_t effective_K_prime() const;
  /// Docs that must survive subsampling for the output to be the naive one.
  std::size_t required_survivors() const;
  DedupConfig dedup_config() const;
  /// Throws ConfigError listing every invalid field by name.
  void validate() const;
};

/// Flat-key JSON document. Unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& c);
PipelineConfig load_config(const std::filesystem::path& path);

struct QueryRecord {
  std::string query_id;
  std::string question;  // retrieval query; the prefix for perplexity queries
  std::vector<std::string> answers;
  std::string fewshot;
  std::optional<std::string> ppl_target;

  TaskKind kind() const {
    return ppl_target ? TaskKind::Perplexity : TaskKind::Downstream;
  }
  EvalUnit eval_unit() const { return {question, answers, ppl_target.value_or("")}; }
};

/// Lines {qid, question, answers?, fewshot?, ppl_target_tokens?}; the target
/// may be an array of tokens or a string.
std::vector<QueryRecord> read_queries_jsonl(const std::filesystem::path& path);
void write_queries_jsonl(const std::filesystem::path& path, const std::vector<QueryRecord>& q);

struct ContextBundle {
  std::string query_id;
  SubsampleSpec subsample;
  Pool docs;  // final documents, best first
  std::string prompt;
  FilterReport report;
  std::size_t pool_size = 0;  // filtered pool size before subsampling
  std::size_t survivors = 0;  // after subsampling, before top-k
  bool short_pool = false;    // survivors < required_survivors()
  bool fallback_used = false;
};

nlohmann::json bundle_to_json(const ContextBundle& b);
void write_bundles_jsonl(const std::filesystem::path& path, const std::vector<ContextBundle>& b);

/// Passages indexed by id.
class PassageStore {
 public:
  PassageStore() = default;
  explicit PassageStore(std::vector<Passage> passages);

  const std::vector<Passage>& passages() const { return passages_; }
  const Passage* find(std::string_view passage_id) const;
  TextLookup lookup() const;
  std::size_t total_words() const;

 private:
  std::vector<Passage> passages_;
  std::unordered_map<std::string_view, std::size_t> by_id_;
};

struct StageStats {
  double retrieval_seconds = 0.0;
  double filter_seconds = 0.0;
  double subsample_rerank_seconds = 0.0;
  double index_build_seconds = 0.0;
  std::size_t queries = 0;
  std::size_t bundles = 0;
  std::size_t short_bundles = 0;
  std::size_t cache_hits = 0;
  std::size_t removed_duplicate = 0;
  std::size_t removed_short_chunk = 0;
  std::size_t removed_contaminated = 0;
  std::size_t removed_quality = 0;
};

struct PipelineRun {
  std::vector<ContextBundle> bundles;  // sorted by (query_id, p, seed)
  StageStats stats;
};

struct RunOptions {
  unsigned jobs = 1;
  const RetrievalCache* cache = nullptr;
};

/// Retrieve once, filter the top-K pool, then subsample / rerank / take top-k
/// per (p, seed).
PipelineRun run_efficient(const std::vector<QueryRecord>& queries,
                          std::span<const ShardIndex> shards, const PassageStore& store,
                          const PipelineConfig& config, const Embedder& embedder,
                          const RunOptions& options = {});

/// Testing oracle: per (p, seed) subsample the corpus, embed it into a fresh
/// unsharded index and retrieve directly. Corpus-level filtering covers short
/// chunks, exact duplicates (whenever dedup is on), quality and per-query
/// decontamination.
PipelineRun run_naive(const std::vector<QueryRecord>& queries, const PassageStore& store,
                      const PipelineConfig& config, const Embedder& embedder,
                      const RunOptions& options = {});

struct VerifyRow {
  double p = 0.0;
  std::size_t bundles = 0;
  std::size_t compared = 0;
  std::size_t mismatched = 0;
  std::size_t short_bundles = 0;
  double expected_short_rate = 0.0;  // mean over bundles of 1 - tail_bound(pool, p, need)
};

struct VerifyReport {
  std::size_t compared = 0;
  std::size_t mismatched = 0;
  std::size_t skipped_short = 0;
  std::vector<VerifyRow> per_ratio;
  std::vector<std::string> mismatches;  // "qid p seed"
};

/// Compares final doc ids and scores bundle by bundle (both runs from the same
/// config) wherever the efficient bundle is not short.
VerifyReport verify_equivalence(const PipelineRun& efficient, const PipelineRun& naive,
                                const PipelineConfig& config);
nlohmann::json verify_to_json(const VerifyReport& r);

/// Documents in reverse rank order (best last), then the few-shot block, then
/// the question; parts separated by a blank line. Empty parts are omitted.
std::string assemble_context(std::span<const std::string> docs_best_first,
                             std::string_view few_shot, std::string_view question);

template <typename T>
struct PplWindow {
  std::size_t offset = 0;
  std::vector<T> prefix;
  std::vector<T> target;
};

/// Sliding windows of `chunk` tokens every `stride` tokens while a full chunk
/// fits; each splits into a prefix (first half) and target (second half).
template <typename T>
std::vector<PplWindow<T>> make_ppl_queries(std::span<const T> tokens, std::size_t chunk = 1024,
                                           std::size_t stride = 512) {
  if (chunk == 0 || chunk % 2 != 0) throw ConfigError("chunk must be a positive even number");
  if (stride == 0 || stride > chunk) throw ConfigError("stride must be in [1, chunk]");
  std::vector<PplWindow<T>> out;
  const std::size_t half = chunk / 2;
  for (std::size_t off = 0; off + chunk <= tokens.size(); off += stride) {
    out.push_back({off, {tokens.begin() + off, tokens.begin() + off + half},
                   {tokens.begin() + off + half, tokens.begin() + off + chunk}});
  }
  return out;
}

/// Whitespace-tokenizes `text` and turns each window into a perplexity query
/// "<source_id>@<offset>".
std::vector<QueryRecord> ppl_queries_from_text(const std::string& source_id, std::string_view text,
                                               std::size_t chunk = 1024, std::size_t stride = 512);

}  // namespace trove
