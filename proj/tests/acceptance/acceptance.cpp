// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. argv[1] is the path of the trove CLI.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <sys/wait.h>

#include "support/synthetic.hpp"
#include "trove/errors.hpp"
#include "trove/filters.hpp"
#include "trove/flops.hpp"
#include "trove/hash.hpp"
#include "trove/pipeline.hpp"
#include "trove/rerank.hpp"
#include "trove/retrieval.hpp"
#include "trove/subsample.hpp"
#include "trove/text.hpp"

namespace fs = std::filesystem;
using namespace trove;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

// --- independent oracles ---------------------------------------------------

std::size_t lcs_tokens(std::string_view a, std::string_view b) {
  const auto x = text::lower_tokens(a);
  const auto y = text::lower_tokens(b);
  std::vector<std::size_t> prev(y.size() + 1, 0), cur(y.size() + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    for (std::size_t j = 1; j <= y.size(); ++j) {
      cur[j] = x[i - 1] == y[j - 1] ? prev[j - 1] + 1 : 0;
      best = std::max(best, cur[j]);
    }
    std::swap(prev, cur);
  }
  return best;
}

std::set<std::string> string_ngrams(std::string_view s, std::size_t n) {
  const auto t = text::lower_tokens(s);
  std::set<std::string> g;
  for (std::size_t i = 0; i + n <= t.size(); ++i) g.insert(text::join(std::span(t).subspan(i, n)));
  return g;
}

double jaccard_strings(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& g : a) inter += b.count(g);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

std::string mutate(std::mt19937_64& rng, const std::string& s, double frac) {
  auto words = text::lower_tokens(s);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& w : words) {
    if (u(rng) < frac) w = synth::random_word(rng, 100000);
  }
  return text::join(words);
}

Pool pool_of(const std::vector<std::string>& texts, const std::string& prefix = "p") {
  Pool p;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    Candidate c;
    char id[32];
    std::snprintf(id, sizeof id, "%s%06zu", prefix.c_str(), i);
    c.doc = {id, 1.0 - 1e-4 * static_cast<double>(i), "d", 0};
    c.text = texts[i];
    c.rank = i;
    p.push_back(std::move(c));
  }
  return p;
}

// --- criteria --------------------------------------------------------------

// Scatter-gather over m shards equals a single index, ids and scores.
Outcome criterion_1() {
  std::mt19937_64 rng(1001);
  std::size_t corpora = 20, compared = 0;
  for (std::size_t c = 0; c < corpora; ++c) {
    const std::size_t rows = 1000 + rng() % 9001;
    const auto matrix = synth::random_matrix(rng, rows, 64);
    std::map<std::uint32_t, std::vector<ShardIndex>> by_m;
    for (std::uint32_t m : {1u, 2u, 4u, 8u}) {
      std::vector<EmbeddingMatrix> parts(m);
      for (auto& p : parts) p.dim = 64;
      for (std::size_t r = 0; r < rows; ++r) {
        auto& p = parts[hash64(matrix.ids[r]) % m];
        p.ids.push_back(matrix.ids[r]);
        const auto row = matrix.row(r);
        p.values.insert(p.values.end(), row.begin(), row.end());
      }
      for (std::uint32_t s = 0; s < m; ++s) by_m[m].emplace_back(parts[s], "d", s);
    }
    for (int q = 0; q < 50; ++q) {
      const auto query = synth::random_query(rng, 64);
      const std::size_t K = q % 2 ? 1000 : 1 + rng() % 200;
      const auto ref = search_distributed(query, std::span<const ShardIndex>(by_m[1]), K).docs;
      for (std::uint32_t m : {2u, 4u, 8u}) {
        const auto got =
            search_distributed(query, std::span<const ShardIndex>(by_m[m]), K, m).docs;
        if (got.size() != ref.size()) return {false, "length differs at m=" + std::to_string(m)};
        for (std::size_t i = 0; i < got.size(); ++i) {
          if (got[i].passage_id != ref[i].passage_id || got[i].score != ref[i].score) {
            return {false, "corpus " + std::to_string(c) + " m=" + std::to_string(m) +
                               " differs at rank " + std::to_string(i)};
          }
        }
        ++compared;
      }
    }
  }
  return {true, std::to_string(corpora) + " corpora, " + std::to_string(compared) +
                    " sharded result lists bit-identical to m=1"};
}

struct BundleDiff {
  std::size_t compared = 0, mismatched = 0;
  std::map<double, std::pair<std::size_t, std::size_t>> short_by_p;  // p -> (short, total)
};

BundleDiff compare_runs(const PipelineRun& eff, const PipelineRun& naive, std::size_t need) {
  BundleDiff d;
  if (eff.bundles.size() != naive.bundles.size()) {
    d.mismatched = std::max(eff.bundles.size(), naive.bundles.size());
    return d;
  }
  for (std::size_t i = 0; i < eff.bundles.size(); ++i) {
    const auto& e = eff.bundles[i];
    const auto& n = naive.bundles[i];
    auto& sp = d.short_by_p[e.subsample.p];
    ++sp.second;
    if (e.survivors < need) {
      ++sp.first;
      continue;
    }
    ++d.compared;
    bool same = e.query_id == n.query_id && e.subsample == n.subsample &&
                e.docs.size() == n.docs.size() && e.prompt == n.prompt;
    for (std::size_t j = 0; same && j < e.docs.size(); ++j) {
      same = e.docs[j].doc == n.docs[j].doc;
    }
    d.mismatched += !same;
  }
  return d;
}

// Efficient pipeline equals the naive per-(p, seed) re-index oracle.
Outcome criterion_2() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2002);
  const auto passages = synth::synthetic_passages(rng, {.passages = 5000}, 4);
  const PassageStore store(passages);
  const HashedBowEmbedder embedder({.dim = 256});
  const auto shards = synth::build_indices(passages, embedder);
  const auto queries = synth::synthetic_queries(rng, passages, 50);

  PipelineConfig c;
  c.K = 1000;
  c.k = 3;
  c.dedup = DedupSetting::Off;
  c.decon = DecontaminationMode::none();
  const RunOptions opts{.jobs = 4};
  const auto eff = run_efficient(queries, shards, store, c, embedder, opts);
  const auto naive = run_naive(queries, store, c, embedder, opts);
  const auto d = compare_runs(eff, naive, c.k);

  std::ostringstream detail;
  bool pass = d.mismatched == 0 && d.compared > 0;
  detail << d.compared << " bundles compared, " << d.mismatched << " mismatched";
  for (const auto& [p, sn] : d.short_by_p) {
    const double q = 1.0 - tail_bound(1000, p, 3);
    const double sigma = std::sqrt(q * (1 - q) / static_cast<double>(sn.second));
    const double rate = static_cast<double>(sn.first) / static_cast<double>(sn.second);
    if (rate > q + 3 * sigma) {
      pass = false;
      detail << "; short rate " << rate << " > " << q + 3 * sigma << " at p=" << p;
    }
    if (sn.first > 0) detail << "; p=" << p << " short " << sn.first << "/" << sn.second;
  }

  // Same check with every filter on: exact dedup, standard decon, quality.
  std::mt19937_64 rng_f(2003);
  const auto fpassages = synth::synthetic_passages(
      rng_f, {.passages = 5000, .short_fraction = 0.05, .duplicate_fraction = 0.05}, 4);
  const PassageStore fstore(fpassages);
  const auto fshards = synth::build_indices(fpassages, embedder);
  auto fq = synth::synthetic_queries(rng_f, fpassages, 50);
  for (std::size_t i = 0; i < fq.size(); i += 5) {
    fq[i].question = fpassages[rng_f() % fpassages.size()].text;  // planted contamination
  }
  PipelineConfig cf = c;
  cf.dedup = DedupSetting::Exact;
  cf.decon = DecontaminationMode::standard();
  cf.quality.min_whitespace_tokens = 30;
  const auto eff_f = run_efficient(fq, fshards, fstore, cf, embedder, opts);
  const auto naive_f = run_naive(fq, fstore, cf, embedder, opts);
  const auto df = compare_runs(eff_f, naive_f, cf.k);
  pass = pass && df.mismatched == 0 && df.compared > 0;
  detail << "; filtered variant " << df.compared << " compared, " << df.mismatched
         << " mismatched (removed dup " << eff_f.stats.removed_duplicate << ", short "
         << eff_f.stats.removed_short_chunk << ", contaminated " << eff_f.stats.removed_contaminated
         << ", quality " << eff_f.stats.removed_quality << ")";
  detail << "; " << std::chrono::duration<double>(Clock::now() - t0).count() << "s";
  return {pass, detail.str()};
}

// Published tail-bound lookup values.
Outcome criterion_3() {
  const double v = tail_bound(1000, 0.01, 3);
  std::ostringstream detail;
  detail.precision(6);
  detail << "tail_bound(1000, 0.01, 3) = " << v;
  bool pass = std::abs(v - 0.9973) <= 5e-5;
  for (double p : {0.05, 0.1, 0.25, 0.5, 0.75}) {
    const double t = tail_bound(1000, p, 3);
    const bool ok = std::round(t * 1000.0) / 1000.0 == 1.0;
    pass = pass && ok;
    if (!ok) detail << "; p=" << p << " gives " << t;
  }
  return {pass, detail.str() + "; p in {0.05..0.75} round to 1.000"};
}

// Post-hoc exact dedup equals retrieval from a pre-deduplicated corpus.
Outcome criterion_4() {
  std::mt19937_64 rng(4004);
  const HashedBowEmbedder embedder({.dim = 64});
  const std::size_t K = 1000, K_prime = 100;
  for (int trial = 0; trial < 20; ++trial) {
    auto passages = synth::synthetic_passages(
        rng, {.passages = 2000, .duplicate_fraction = 0.25, .vocab = 800}, 1);
    const PassageStore store(passages);
    const auto shards = synth::build_indices(passages, embedder);

    // Pre-deduplicated corpus: smallest passage id per distinct text.
    std::map<std::string, std::string> first_by_text;
    for (const auto& p : passages) {
      auto [it, fresh] = first_by_text.emplace(p.text, p.passage_id);
      if (!fresh && p.passage_id < it->second) it->second = p.passage_id;
    }
    std::set<std::string> keep;
    for (const auto& [t, id] : first_by_text) keep.insert(id);
    std::vector<Passage> deduped;
    for (const auto& p : passages) {
      if (keep.count(p.passage_id)) deduped.push_back(p);
    }
    const ShardIndex clean(embed_shard(deduped, embedder), "d", 0);

    const auto queries = synth::synthetic_queries(rng, passages, 10);
    for (const auto& q : queries) {
      const auto v = embedder.embed(q.question);
      const auto top = search_distributed(v, std::span<const ShardIndex>(shards), K).docs;
      const auto post = dedup_retrieved(make_pool(top, store.lookup()),
                                        {.method = DedupMethod::Exact, .min_words = 0});
      if (post.kept.size() < K_prime) return {false, "too few survivors in trial " + std::to_string(trial)};
      const auto pre = clean.search(v, K_prime);
      for (std::size_t i = 0; i < K_prime; ++i) {
        if (post.kept[i].doc.passage_id != pre[i].passage_id || post.kept[i].doc.score != pre[i].score) {
          return {false, "trial " + std::to_string(trial) + " query " + q.query_id +
                             " differs at rank " + std::to_string(i)};
        }
      }
    }
  }
  return {true, "20 trials x 10 queries, top-100 identical after post-hoc exact dedup"};
}

// Element-level operations commute.
Outcome criterion_5() {
  std::mt19937_64 rng(5005);
  const OracleScorer oracle;
  std::size_t pools = 100, perms = 0;
  for (std::size_t t = 0; t < pools; ++t) {
    std::vector<std::string> texts;
    const auto question = synth::random_text(rng, 40, 300);
    for (int i = 0; i < 150; ++i) {
      const auto r = rng() % 10;
      if (r == 0) {
        texts.push_back(mutate(rng, question, 0.05));  // contaminated
      } else if (r == 1) {
        texts.push_back(synth::random_text(rng, 2 + rng() % 5, 300));  // low quality
      } else {
        texts.push_back(synth::random_text(rng, 20 + rng() % 60, 300));
      }
    }
    const Pool pool = pool_of(texts, "t" + std::to_string(t) + "_");
    const EvalUnit unit{question, {synth::random_word(rng, 300)}, ""};
    const RerankQuery rq{"q", question, unit.answers};
    const auto mode = t % 2 ? DecontaminationMode::standard() : DecontaminationMode::aggressive();
    QualityConfig qc;
    qc.min_whitespace_tokens = 10;
    const SubsampleSpec spec{0.2 + 0.6 * static_cast<double>(t % 4) / 3.0, 100 + t};
    const std::size_t k = 3;

    using Op = std::function<Pool(Pool)>;
    const std::array<Op, 4> ops = {
        [&](Pool p) { return decontaminate(std::move(p), unit, mode, TaskKind::Downstream).kept; },
        [&](Pool p) { return quality_filter(std::move(p), qc).kept; },
        [&](Pool p) {
          score_pool(p, oracle, rq);
          return p;
        },
        [&](Pool p) {
          return subsample_by(p, spec, [](const Candidate& c) -> std::string_view {
            return c.doc.passage_id;
          });
        }};
    std::array<int, 4> order = {0, 1, 2, 3};
    std::optional<Pool> reference;
    do {
      Pool p = pool;
      for (int i : order) p = ops[i](std::move(p));
      const Pool top = select_top(std::move(p), k);
      if (!reference) {
        reference = top;
      } else if (top != *reference) {
        return {false, "pool " + std::to_string(t) + " differs for order " + std::to_string(order[0]) +
                           std::to_string(order[1]) + std::to_string(order[2]) + std::to_string(order[3])};
      }
      ++perms;
    } while (std::next_permutation(order.begin(), order.end()));
  }
  return {true, std::to_string(pools) + " pools x 24 orders, identical top-3"};
}

// Filter outputs re-checked with independent oracles.
Outcome criterion_6() {
  std::mt19937_64 rng(6006);
  std::size_t dedup_pairs = 0, decon_docs = 0, short_docs = 0;
  for (int t = 0; t < 20; ++t) {
    std::vector<std::string> texts;
    for (int i = 0; i < 120; ++i) {
      if (!texts.empty() && rng() % 3 == 0) {
        texts.push_back(mutate(rng, texts[rng() % texts.size()], 0.01 * (rng() % 8)));
      } else {
        texts.push_back(synth::random_text(rng, 1 + rng() % 80, 500));
      }
    }
    const auto pool = pool_of(texts);
    const auto f = dedup_retrieved(pool);
    std::set<std::string> short_removed;
    for (const auto& r : f.report.removed) {
      if (r.reason == RemovalReason::ShortChunk) short_removed.insert(r.passage_id);
    }
    for (const auto& c : pool) {
      const bool is_short = text::split_whitespace(c.text).size() < 13;
      if (is_short != (short_removed.count(c.doc.passage_id) == 1)) {
        return {false, "short-chunk rule wrong for " + c.doc.passage_id};
      }
      short_docs += is_short;
    }
    for (std::size_t i = 0; i < f.kept.size(); ++i) {
      const auto gi = string_ngrams(f.kept[i].text, 13);
      for (std::size_t j = i + 1; j < f.kept.size(); ++j) {
        if (jaccard_strings(gi, string_ngrams(f.kept[j].text, 13)) >= 0.8) {
          return {false, "dedup kept a near-duplicate pair"};
        }
        ++dedup_pairs;
      }
    }
  }

  for (int t = 0; t < 40; ++t) {
    const auto target = synth::random_text(rng, 200, 100000);
    const auto toks = text::lower_tokens(target);
    std::vector<std::string> texts;
    for (int i = 0; i < 60; ++i) {
      const std::size_t len = rng() % 45;
      const std::size_t start = rng() % (toks.size() - len);
      texts.push_back(synth::random_text(rng, rng() % 30, 100000) + " " +
                      text::join(std::span(toks).subspan(start, len)) + " " +
                      synth::random_text(rng, rng() % 30, 100000));
    }
    const EvalUnit ppl{"prefix", {}, target};
    const EvalUnit down{target, {"x"}, ""};
    const auto std_out = decontaminate(pool_of(texts), ppl, DecontaminationMode::standard(), TaskKind::Perplexity);
    for (const auto& c : std_out.kept) {
      if (lcs_tokens(c.text, target) >= 32) return {false, "standard mode kept a 32-token overlap"};
    }
    const auto agg = decontaminate(pool_of(texts), down, DecontaminationMode::aggressive(), TaskKind::Downstream);
    for (const auto& c : agg.kept) {
      if (lcs_tokens(c.text, target) >= 8) return {false, "aggressive mode kept an 8-token overlap"};
    }
    // Nothing below the thresholds is removed by the contiguous rule alone.
    for (const auto& r : agg.report.removed) {
      const auto& text_of = texts[std::stoul(r.passage_id.substr(1))];
      if (lcs_tokens(text_of, target) < 8) return {false, "aggressive mode removed a clean doc"};
    }
    decon_docs += texts.size();
  }
  return {true, std::to_string(dedup_pairs) + " kept pairs below 0.8, " + std::to_string(decon_docs) +
                    " docs decontaminated in both modes, " + std::to_string(short_docs) +
                    " short docs removed exactly"};
}

// Exact FLOPs formulas.
Outcome criterion_7() {
  const auto pre = flops_pretrain(parse_count("1e9"), parse_count("3e11"));
  const auto ds = flops_datastore(parse_count("177e6"), parse_count("1.4e12"));
  const bool pass = pre == parse_count("1.8e21") && ds == parse_count("4.956e20") &&
                    pre.str() == "1800000000000000000000" && ds.str() == "495600000000000000000";
  return {pass, "pretrain " + pre.str() + ", datastore " + ds.str()};
}

int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = "'" + cli + "' " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// Full CLI runs with identical inputs give byte-identical bundle files.
Outcome criterion_8(const std::string& cli) {
  const auto dir = fs::temp_directory_path() / "trove_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto t0 = Clock::now();
  std::mt19937_64 rng(8008);
  auto docs = synth::synthetic_documents(
      rng, {.passages = 1500, .min_words = 5, .max_words = 600, .short_fraction = 0.05,
            .duplicate_fraction = 0.05});
  write_corpus_jsonl(dir / "corpus.jsonl", docs);
  const auto passages = chunk_corpus(docs);
  auto queries = synth::synthetic_queries(rng, passages, 20);
  for (std::size_t i = 0; i < queries.size(); i += 4) queries[i].question = passages[i * 7].text;
  write_queries_jsonl(dir / "queries.jsonl", queries);
  {
    std::ofstream cfg(dir / "config.json");
    cfg << R"({"K": 1000, "k": 3, "decon": "standard", "dedup": "jaccard", "reranker": "oracle",
               "K_prime": 50, "seeds": [100, 101, 102], "dim": 128})";
  }
  const std::string d = "'" + dir.string() + "/";
  if (run_cli(cli, "chunk --input " + d + "corpus.jsonl' --output " + d + "passages.jsonl' --shards 3") != 0 ||
      run_cli(cli, "embed --passages " + d + "passages.jsonl' --out-dir " + d + "emb' --dim 128") != 0 ||
      run_cli(cli, "index --emb-dir " + d + "emb' --out-dir " + d + "idx'") != 0) {
    return {false, "chunk/embed/index failed"};
  }
  std::vector<std::string> contents;
  for (const char* jobs : {"1", "1", "8", "8"}) {
    const auto out = dir / ("bundles_" + std::to_string(contents.size()) + ".jsonl");
    const int rc = run_cli(cli, "pipeline --config " + d + "config.json' --index-dir " + d + "idx' --passages " +
                                    d + "passages.jsonl' --queries " + d + "queries.jsonl' --output '" +
                                    out.string() + "' --jobs " + jobs);
    if (rc != 0) return {false, "pipeline exited with " + std::to_string(rc)};
    std::ifstream in(out, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    contents.push_back(ss.str());
  }
  const bool same = std::all_of(contents.begin(), contents.end(),
                                [&](const std::string& s) { return s == contents[0]; });
  const auto lines = std::count(contents[0].begin(), contents[0].end(), '\n');

  // Truncated embedding files are refused with the integrity exit code.
  const auto emb = dir / "emb" / "books.0000.emb";
  auto bytes = read_file_bytes(emb);
  bytes.resize(bytes.size() - 5);
  write_file_bytes(emb, bytes);
  const int corrupt_rc = run_cli(cli, "index --emb-dir " + d + "emb' --out-dir " + d + "idx2'");

  std::ostringstream detail;
  detail << "4 runs (jobs 1,1,8,8), " << lines << " bundles each, "
         << (same ? "byte-identical" : "DIFFERENT") << "; truncated embedding exit code " << corrupt_rc
         << "; " << std::chrono::duration<double>(Clock::now() - t0).count() << "s";
  return {same && lines > 0 && corrupt_rc == 2, detail.str()};
}

// Inclusion frequency and nestedness of the seeded draw.
Outcome criterion_9() {
  const double p = 0.25;
  const int seeds = 1000;
  const double sigma = std::sqrt(p * (1 - p) / seeds);
  std::mt19937_64 rng(9009);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto id = "doc" + std::to_string(rng() % 1000000) + "#" + std::to_string(i);
    int hits = 0;
    for (int s = 0; s < seeds; ++s) hits += include(id, {p, static_cast<std::uint64_t>(s)});
    const double f = static_cast<double>(hits) / seeds;
    lo = std::min(lo, f);
    hi = std::max(hi, f);
    if (std::abs(f - p) > 4 * sigma) return {false, id + " frequency " + std::to_string(f)};
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    const auto id = "p" + std::to_string(rng());
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    const std::uint64_t seed = rng() % 1000;
    if (include(id, {a, seed}) && !include(id, {b, seed})) return {false, "nestedness violated for " + id};
  }
  std::ostringstream detail;
  detail << "100 ids: frequency in [" << lo << ", " << hi << "] within 0.25 +/- " << 4 * sigma
         << "; 100000 nested pairs hold";
  return {true, detail.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Context layout against golden files.
Outcome criterion_10() {
  const fs::path golden = TROVE_GOLDEN_DIR;
  const auto j = nlohmann::json::parse(slurp(golden / "docs.json"));
  const auto docs = j.at("docs_best_first").get<std::vector<std::string>>();
  for (std::size_t k : {0u, 1u, 3u}) {
    const auto got = assemble_context(std::span(docs).first(k), j.at("fewshot").get<std::string>(),
                                      j.at("question").get<std::string>());
    if (got != slurp(golden / ("context_k" + std::to_string(k) + ".txt"))) {
      return {false, "k=" + std::to_string(k) + " differs from golden file"};
    }
  }
  return {true, "k in {0, 1, 3} match golden files"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-trove-cli>\n";
    return 1;
  }
  const std::string cli = argv[1];
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"sharded retrieval equals single index", criterion_1},
      {"efficient pipeline equals naive pipeline", criterion_2},
      {"tail bound lookup values", criterion_3},
      {"post-hoc exact dedup equals pre-dedup", criterion_4},
      {"element-level operations commute", criterion_5},
      {"filter soundness", criterion_6},
      {"FLOPs formulas", criterion_7},
      {"CLI determinism across jobs", [&] { return criterion_8(cli); }},
      {"subsampling statistics", criterion_9},
      {"context assembly golden files", criterion_10},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("%s criterion %zu: %s (%s) [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
