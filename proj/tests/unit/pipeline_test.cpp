#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "support/synthetic.hpp"
#include "trove/errors.hpp"
#include "trove/pipeline.hpp"

using namespace trove;

namespace {

struct Fixture {
  std::vector<Passage> passages;
  PassageStore store;
  HashedBowEmbedder embedder{{.dim = 64}};
  std::vector<ShardIndex> shards;
  std::vector<QueryRecord> queries;

  Fixture(std::uint64_t seed, synth::CorpusShape shape, std::size_t n_queries) {
    std::mt19937_64 rng(seed);
    passages = synth::synthetic_passages(rng, shape, 3);
    store = PassageStore(passages);
    shards = synth::build_indices(passages, embedder);
    queries = synth::synthetic_queries(rng, passages, n_queries);
  }
};

PipelineConfig small_config() {
  PipelineConfig c;
  c.K = 200;
  c.ratios = {0.05, 0.3, 1.0};
  c.seeds = {1, 2};
  c.embedder.dim = 64;
  return c;
}

void expect_equivalent(const PipelineRun& eff, const PipelineRun& naive, const PipelineConfig& c) {
  const auto r = verify_equivalence(eff, naive, c);
  EXPECT_EQ(r.mismatched, 0u) << (r.mismatches.empty() ? "" : r.mismatches.front());
  EXPECT_GT(r.compared, 0u);
}

}  // namespace

TEST(PipelineConfig, JsonRoundTripAndValidation) {
  auto c = small_config();
  c.fallback_K = 400;
  c.domains = {"news"};
  const auto back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));

  EXPECT_THROW(config_from_json({{"bogus", 1}}), ConfigError);
  EXPECT_THROW(config_from_json({{"decon", "extreme"}}), ConfigError);
  EXPECT_THROW(config_from_json({{"K", "many"}}), ConfigError);
  auto bad = small_config();
  bad.k = 0;
  bad.ratios = {1.5};
  try {
    bad.validate();
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("k:"), std::string::npos);
    EXPECT_NE(msg.find("p:"), std::string::npos);
  }
}

TEST(PipelineConfig, RerankDepthDefaults) {
  PipelineConfig c;
  EXPECT_EQ(c.effective_K_prime(), 3u);
  c.reranker = "oracle";
  EXPECT_EQ(c.effective_K_prime(), 500u);
  EXPECT_EQ(c.required_survivors(), 500u);
  c.K = 100;
  EXPECT_EQ(c.effective_K_prime(), 100u);
}

TEST(Pipeline, EfficientEqualsNaiveWithoutFilters) {
  Fixture f(61, {.passages = 800}, 10);
  auto c = small_config();
  c.dedup = DedupSetting::Off;
  c.decon = DecontaminationMode::none();
  const auto eff = run_efficient(f.queries, f.shards, f.store, c, f.embedder);
  const auto naive = run_naive(f.queries, f.store, c, f.embedder);
  EXPECT_EQ(eff.bundles.size(), 10u * 6u);
  expect_equivalent(eff, naive, c);
  for (const auto& b : eff.bundles) {
    if (b.subsample.p == 1.0) EXPECT_EQ(b.docs.size(), 3u);
  }
}

TEST(Pipeline, EfficientEqualsNaiveWithExactDedupDeconAndQuality) {
  Fixture f(62, {.passages = 800, .short_fraction = 0.1, .duplicate_fraction = 0.1}, 10);
  // Plant contamination: each query's text inside some passages.
  auto c = small_config();
  c.dedup = DedupSetting::Exact;
  c.decon = DecontaminationMode::aggressive();
  c.quality.min_whitespace_tokens = 25;
  const auto eff = run_efficient(f.queries, f.shards, f.store, c, f.embedder);
  const auto naive = run_naive(f.queries, f.store, c, f.embedder);
  expect_equivalent(eff, naive, c);
  EXPECT_GT(eff.stats.removed_duplicate, 0u);
  EXPECT_GT(eff.stats.removed_short_chunk, 0u);
}

TEST(Pipeline, EfficientEqualsNaiveWithOracleReranker) {
  Fixture f(63, {.passages = 600}, 6);
  auto c = small_config();
  c.dedup = DedupSetting::Off;
  c.decon = DecontaminationMode::none();
  c.reranker = "oracle";
  c.K_prime = 20;
  const auto eff = run_efficient(f.queries, f.shards, f.store, c, f.embedder);
  const auto naive = run_naive(f.queries, f.store, c, f.embedder);
  expect_equivalent(eff, naive, c);
  for (const auto& b : eff.bundles) {
    for (const auto& d : b.docs) EXPECT_TRUE(d.rerank_score.has_value());
  }
}

TEST(Pipeline, DomainSelectionRestrictsResults) {
  Fixture f(64, {.passages = 600}, 5);
  auto c = small_config();
  c.domains = {"news"};
  const auto eff = run_efficient(f.queries, f.shards, f.store, c, f.embedder);
  for (const auto& b : eff.bundles) {
    for (const auto& d : b.docs) EXPECT_EQ(d.doc.domain, "news");
  }
  c.domains = {"poetry"};
  EXPECT_THROW(run_efficient(f.queries, f.shards, f.store, c, f.embedder), ConfigError);
}

TEST(Pipeline, DeterministicAcrossJobs) {
  Fixture f(65, {.passages = 600}, 12);
  const auto c = small_config();
  const auto a = run_efficient(f.queries, f.shards, f.store, c, f.embedder, {.jobs = 1});
  const auto b = run_efficient(f.queries, f.shards, f.store, c, f.embedder, {.jobs = 6});
  ASSERT_EQ(a.bundles.size(), b.bundles.size());
  for (std::size_t i = 0; i < a.bundles.size(); ++i) {
    EXPECT_EQ(bundle_to_json(a.bundles[i]), bundle_to_json(b.bundles[i]));
  }
}

TEST(Pipeline, CacheHitsGiveSameBundles) {
  Fixture f(66, {.passages = 400}, 5);
  const auto dir = std::filesystem::temp_directory_path() / "trove_pipeline_cache";
  std::filesystem::remove_all(dir);
  const RetrievalCache cache(dir);
  const auto c = small_config();
  const auto cold = run_efficient(f.queries, f.shards, f.store, c, f.embedder, {.cache = &cache});
  const auto warm = run_efficient(f.queries, f.shards, f.store, c, f.embedder, {.cache = &cache});
  EXPECT_EQ(cold.stats.cache_hits, 0u);
  EXPECT_EQ(warm.stats.cache_hits, 5u * 3u);
  for (std::size_t i = 0; i < cold.bundles.size(); ++i) {
    EXPECT_EQ(bundle_to_json(cold.bundles[i]), bundle_to_json(warm.bundles[i]));
  }
}

TEST(Pipeline, FallbackDeepensShortPools) {
  Fixture f(67, {.passages = 800}, 8);
  auto c = small_config();
  c.K = 10;
  c.ratios = {0.05};
  c.seeds = {1, 2, 3};
  c.decon = DecontaminationMode::none();
  c.dedup = DedupSetting::Off;
  const auto without = run_efficient(f.queries, f.shards, f.store, c, f.embedder);
  c.fallback_K = 500;
  const auto with = run_efficient(f.queries, f.shards, f.store, c, f.embedder);
  EXPECT_GT(without.stats.short_bundles, with.stats.short_bundles);
  std::size_t used = 0;
  for (const auto& b : with.bundles) used += b.fallback_used;
  EXPECT_GT(used, 0u);
  // Deepened bundles agree with the naive oracle.
  expect_equivalent(with, run_naive(f.queries, f.store, c, f.embedder), c);
}

TEST(Pipeline, DimMismatchIsConfigError) {
  Fixture f(68, {.passages = 100}, 2);
  const HashedBowEmbedder other({.dim = 32});
  EXPECT_THROW(run_efficient(f.queries, f.shards, f.store, small_config(), other), ConfigError);
}

TEST(Queries, JsonlRoundTrip) {
  const auto p = std::filesystem::temp_directory_path() / "trove_queries.jsonl";
  std::vector<QueryRecord> qs(2);
  qs[0] = {"a", "who?", {"x", "y"}, "Q: 1\nA: 2", std::nullopt};
  qs[1] = {"b", "prefix text", {}, "", std::string("target text")};
  write_queries_jsonl(p, qs);
  const auto back = read_queries_jsonl(p);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].answers, qs[0].answers);
  EXPECT_EQ(back[0].fewshot, qs[0].fewshot);
  EXPECT_EQ(back[1].ppl_target, qs[1].ppl_target);
}

TEST(Verify, DetectsTamperedBundles) {
  Fixture f(69, {.passages = 400}, 4);
  auto c = small_config();
  c.decon = DecontaminationMode::none();
  c.dedup = DedupSetting::Off;
  const auto eff = run_efficient(f.queries, f.shards, f.store, c, f.embedder);
  auto naive = run_naive(f.queries, f.store, c, f.embedder);
  ASSERT_EQ(verify_equivalence(eff, naive, c).mismatched, 0u);
  for (auto& b : naive.bundles) {
    if (b.subsample.p == 1.0) {
      std::swap(b.docs[0], b.docs[1]);
      break;
    }
  }
  const auto r = verify_equivalence(eff, naive, c);
  EXPECT_EQ(r.mismatched, 1u);
  ASSERT_EQ(r.mismatches.size(), 1u);
  EXPECT_EQ(verify_to_json(r)["mismatched"], 1);
}
