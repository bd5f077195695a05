#include "trove/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <mutex>
#include <unordered_set>

#include "trove/parallel.hpp"
#include "trove/text.hpp"

namespace trove {

using nlohmann::json;

// --- passages --------------------------------------------------------------

PassageStore::PassageStore(std::vector<Passage> passages) : passages_(std::move(passages)) {
  by_id_.reserve(passages_.size());
  for (std::size_t i = 0; i < passages_.size(); ++i) {
    if (!by_id_.emplace(passages_[i].passage_id, i).second) {
      throw IntegrityError("duplicate passage id '" + passages_[i].passage_id + "'");
    }
  }
}

const Passage* PassageStore::find(std::string_view passage_id) const {
  auto it = by_id_.find(passage_id);
  return it == by_id_.end() ? nullptr : &passages_[it->second];
}

TextLookup PassageStore::lookup() const {
  return [this](std::string_view id) -> const std::string* {
    const Passage* p = find(id);
    return p ? &p->text : nullptr;
  };
}

std::size_t PassageStore::total_words() const {
  std::size_t n = 0;
  for (const auto& p : passages_) n += p.word_count;
  return n;
}

// --- bundles ---------------------------------------------------------------

json bundle_to_json(const ContextBundle& b) {
  json docs = json::array();
  for (const auto& c : b.docs) {
    json d{{"pid", c.doc.passage_id},
           {"score", c.doc.score},
           {"domain", c.doc.domain},
           {"shard", c.doc.shard},
           {"rank", c.rank}};
    if (c.rerank_score) d["rerank_score"] = *c.rerank_score;
    docs.push_back(std::move(d));
  }
  json removed = json::array();
  for (const auto& r : b.report.removed) {
    removed.push_back({{"pid", r.passage_id}, {"reason", std::string(to_string(r.reason))}});
  }
  return json{{"qid", b.query_id},
              {"p", b.subsample.p},
              {"seed", b.subsample.seed},
              {"docs", std::move(docs)},
              {"prompt", b.prompt},
              {"pool_size", b.pool_size},
              {"survivors", b.survivors},
              {"short", b.short_pool},
              {"fallback", b.fallback_used},
              {"report", {{"kept", b.report.kept_count}, {"removed", std::move(removed)}}}};
}

void write_bundles_jsonl(const std::filesystem::path& path, const std::vector<ContextBundle>& bs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& b : bs) out << bundle_to_json(b).dump() << '\n';
  if (!out) throw ConfigError("write failed on " + path.string());
}

// --- shared helpers --------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void sort_bundles(std::vector<ContextBundle>& bundles) {
  std::stable_sort(bundles.begin(), bundles.end(), [](const ContextBundle& a, const ContextBundle& b) {
    if (a.query_id != b.query_id) return a.query_id < b.query_id;
    if (a.subsample.p != b.subsample.p) return a.subsample.p < b.subsample.p;
    return a.subsample.seed < b.subsample.seed;
  });
}

std::vector<SubsampleSpec> grid_of(const PipelineConfig& config) {
  std::vector<SubsampleSpec> grid;
  for (double p : config.ratios) {
    for (std::uint64_t s : config.seeds) grid.push_back({p, s});
  }
  return grid;
}

RerankQuery rerank_query(const QueryRecord& q) { return {q.query_id, q.question, q.answers}; }

// Reranks when a scorer is configured, otherwise keeps the first k.
Pool final_docs(const Pool& survivors, const Scorer* scorer, const QueryRecord& q,
                const PipelineConfig& config) {
  if (scorer == nullptr) {
    return Pool(survivors.begin(),
                survivors.begin() + static_cast<std::ptrdiff_t>(std::min(config.k, survivors.size())));
  }
  return rerank(survivors, *scorer, rerank_query(q),
                {config.reranker, config.effective_K_prime(), config.k});
}

std::string prompt_for(const Pool& docs, const QueryRecord& q) {
  std::vector<std::string> texts;
  texts.reserve(docs.size());
  for (const auto& c : docs) texts.push_back(c.text);
  return assemble_context(texts, q.fewshot, q.question);
}

void tally(StageStats& s, const FilterReport& r) {
  s.removed_duplicate += r.count(RemovalReason::Duplicate);
  s.removed_short_chunk += r.count(RemovalReason::ShortChunk);
  s.removed_contaminated += r.count(RemovalReason::Contaminated);
  s.removed_quality += r.count(RemovalReason::Quality);
}

struct FilteredPool {
  Pool pool;
  FilterReport report;
};

FilteredPool filter_pool(Pool pool, const QueryRecord& q, const PipelineConfig& config) {
  FilteredPool out;
  out.report.kept_count = pool.size();
  if (config.dedup != DedupSetting::Off) {
    auto f = dedup_retrieved(std::move(pool), config.dedup_config());
    out.report.absorb(f.report);
    pool = std::move(f.kept);
  }
  if (config.decon.variant != DeconVariant::None) {
    auto f = decontaminate(std::move(pool), q.eval_unit(), config.decon, q.kind());
    out.report.absorb(f.report);
    pool = std::move(f.kept);
  }
  if (config.quality.enabled()) {
    auto f = quality_filter(std::move(pool), config.quality);
    out.report.absorb(f.report);
    pool = std::move(f.kept);
  }
  out.pool = std::move(pool);
  return out;
}

}  // namespace

// --- efficient pipeline ----------------------------------------------------

PipelineRun run_efficient(const std::vector<QueryRecord>& queries,
                          std::span<const ShardIndex> shards, const PassageStore& store,
                          const PipelineConfig& config, const Embedder& embedder,
                          const RunOptions& options) {
  config.validate();
  if (shards.empty()) throw ConfigError("run_efficient: no shard indices");
  for (const auto& s : shards) {
    if (s.dim() != embedder.spec().dim) {
      throw ConfigError("index " + s.domain() + "/" + std::to_string(s.shard()) + " has dim " +
                        std::to_string(s.dim()) + " but the embedder produces " +
                        std::to_string(embedder.spec().dim));
    }
  }

  std::map<std::string, std::vector<const ShardIndex*>> by_domain;
  for (const auto& s : shards) by_domain[s.domain()].push_back(&s);
  std::set<std::string> targets = config.domains;
  if (targets.empty()) {
    for (const auto& [d, _] : by_domain) targets.insert(d);
  }
  for (const auto& d : targets) {
    if (!by_domain.contains(d)) throw ConfigError("domains: no index for target domain '" + d + "'");
  }
  std::map<std::string, std::uint64_t> fingerprints;
  if (options.cache != nullptr) {
    for (const auto& d : targets) {
      fingerprints[d] = index_fingerprint(std::span<const ShardIndex* const>(by_domain[d]));
    }
  }

  const auto scorer = make_scorer(config.reranker);
  const auto grid = grid_of(config);
  const std::size_t need = config.required_survivors();

  std::vector<std::vector<ContextBundle>> per_query(queries.size());
  std::vector<StageStats> per_query_stats(queries.size());

  auto retrieve = [&](const QueryRecord& q, const EmbeddingVector& qv, std::size_t depth,
                      StageStats& st) {
    DomainResults per_domain;
    for (const auto& d : targets) {
      const auto& ptrs = by_domain.at(d);
      std::optional<RetrievalCache::Key> key;
      if (options.cache != nullptr) {
        key = RetrievalCache::Key{q.query_id, d, embedder.spec().name, depth, fingerprints.at(d)};
        if (auto hit = options.cache->get(*key)) {
          per_domain[d] = std::move(*hit);
          ++st.cache_hits;
          continue;
        }
      }
      auto docs = search_distributed(qv, std::span<const ShardIndex* const>(ptrs), depth).docs;
      if (key) options.cache->put(*key, docs);
      per_domain[d] = std::move(docs);
    }
    return merge_domains(per_domain, targets, depth);
  };

  parallel_for(queries.size(), options.jobs, [&](std::size_t qi) {
    const auto& q = queries[qi];
    auto& st = per_query_stats[qi];
    const auto qv = embedder.embed(q.question);

    auto prepare = [&](std::size_t depth) {
      auto t0 = Clock::now();
      auto merged = retrieve(q, qv, depth, st);
      st.retrieval_seconds += seconds_since(t0);
      t0 = Clock::now();
      auto filtered = filter_pool(make_pool(merged, store.lookup()), q, config);
      st.filter_seconds += seconds_since(t0);
      return filtered;
    };

    const FilteredPool base = prepare(config.K);
    tally(st, base.report);
    std::optional<FilteredPool> deep;  // built on first fallback

    const auto t0 = Clock::now();
    for (const auto& spec : grid) {
      const FilteredPool* source = &base;
      auto survivors = subsample_by(base.pool, spec, [](const Candidate& c) -> std::string_view {
        return c.doc.passage_id;
      });
      bool fallback = false;
      if (survivors.size() < need && config.fallback_K) {
        if (!deep) deep = prepare(*config.fallback_K);
        source = &*deep;
        survivors = subsample_by(deep->pool, spec, [](const Candidate& c) -> std::string_view {
          return c.doc.passage_id;
        });
        fallback = true;
      }
      ContextBundle b;
      b.query_id = q.query_id;
      b.subsample = spec;
      b.report = source->report;
      b.pool_size = source->pool.size();
      b.survivors = survivors.size();
      b.short_pool = survivors.size() < need;
      b.fallback_used = fallback;
      b.docs = final_docs(survivors, scorer.get(), q, config);
      b.prompt = prompt_for(b.docs, q);
      st.short_bundles += b.short_pool;
      per_query[qi].push_back(std::move(b));
    }
    st.subsample_rerank_seconds += seconds_since(t0);
  });

  PipelineRun run;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    for (auto& b : per_query[qi]) run.bundles.push_back(std::move(b));
    const auto& st = per_query_stats[qi];
    run.stats.retrieval_seconds += st.retrieval_seconds;
    run.stats.filter_seconds += st.filter_seconds;
    run.stats.subsample_rerank_seconds += st.subsample_rerank_seconds;
    run.stats.short_bundles += st.short_bundles;
    run.stats.cache_hits += st.cache_hits;
    run.stats.removed_duplicate += st.removed_duplicate;
    run.stats.removed_short_chunk += st.removed_short_chunk;
    run.stats.removed_contaminated += st.removed_contaminated;
    run.stats.removed_quality += st.removed_quality;
  }
  run.stats.queries = queries.size();
  run.stats.bundles = run.bundles.size();
  sort_bundles(run.bundles);
  return run;
}

// --- naive pipeline --------------------------------------------------------

PipelineRun run_naive(const std::vector<QueryRecord>& queries, const PassageStore& store,
                      const PipelineConfig& config, const Embedder& embedder,
                      const RunOptions& options) {
  config.validate();
  const auto scorer = make_scorer(config.reranker);
  const std::size_t need = config.required_survivors();

  // Corpus-level filters that do not depend on the query or the subsample.
  std::vector<const Passage*> base;
  {
    std::vector<const Passage*> in_domains;
    for (const auto& p : store.passages()) {
      if (config.domains.empty() || config.domains.contains(p.domain)) in_domains.push_back(&p);
    }
    if (config.dedup != DedupSetting::Off) {
      // Exact duplicates embed identically, so the smallest passage id is the
      // copy that outranks the others for every query.
      std::sort(in_domains.begin(), in_domains.end(),
                [](const Passage* a, const Passage* b) { return a->passage_id < b->passage_id; });
      std::unordered_set<std::string> seen;
      std::vector<const Passage*> kept;
      for (const auto* p : in_domains) {
        if (p->word_count < config.min_words) continue;
        if (seen.insert(text::join(text::split_whitespace(p->text))).second) kept.push_back(p);
      }
      in_domains = std::move(kept);
    }
    for (const auto* p : in_domains) {
      if (!config.quality.enabled() || passes_quality(p->text, config.quality)) base.push_back(p);
    }
  }

  const auto grid = grid_of(config);
  std::vector<std::vector<ContextBundle>> per_grid(grid.size());
  std::vector<double> build_seconds(grid.size(), 0.0);
  std::vector<double> search_seconds(grid.size(), 0.0);

  std::vector<ContaminationCheck> checks;
  checks.reserve(queries.size());
  for (const auto& q : queries) checks.emplace_back(q.eval_unit(), config.decon, q.kind());
  std::vector<EmbeddingVector> query_vectors;
  for (const auto& q : queries) query_vectors.push_back(embedder.embed(q.question));

  parallel_for(grid.size(), options.jobs, [&](std::size_t gi) {
    const auto& spec = grid[gi];
    auto t0 = Clock::now();
    std::vector<Passage> sub;
    for (const auto* p : base) {
      if (include(p->passage_id, spec)) sub.push_back(*p);
    }
    const ShardIndex index(embed_shard(sub, embedder), "naive", 0);
    build_seconds[gi] = seconds_since(t0);

    t0 = Clock::now();
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      const auto& q = queries[qi];
      std::vector<ScoredDoc> picked;
      if (index.rows() > 0) {
        // Grow the search depth until enough uncontaminated docs are found.
        for (std::size_t depth = std::max<std::size_t>(need, 1);; depth *= 4) {
          picked.clear();
          for (auto& d : index.search(query_vectors[qi], depth)) {
            const Passage* p = store.find(d.passage_id);
            if (checks[qi](p->text)) continue;
            d.domain = p->domain;
            d.shard = p->shard;
            picked.push_back(std::move(d));
            if (picked.size() == need) break;
          }
          if (picked.size() == need || depth >= index.rows()) break;
        }
      }
      ContextBundle b;
      b.query_id = q.query_id;
      b.subsample = spec;
      b.pool_size = base.size();
      b.survivors = sub.size();
      b.report.kept_count = sub.size();
      b.short_pool = picked.size() < need;
      b.docs = final_docs(make_pool(picked, store.lookup()), scorer.get(), q, config);
      b.prompt = prompt_for(b.docs, q);
      per_grid[gi].push_back(std::move(b));
    }
    search_seconds[gi] = seconds_since(t0);
  });

  PipelineRun run;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    for (auto& b : per_grid[gi]) {
      run.stats.short_bundles += b.short_pool;
      run.bundles.push_back(std::move(b));
    }
    run.stats.index_build_seconds += build_seconds[gi];
    run.stats.retrieval_seconds += search_seconds[gi];
  }
  run.stats.queries = queries.size();
  run.stats.bundles = run.bundles.size();
  sort_bundles(run.bundles);
  return run;
}

// --- verification ----------------------------------------------------------

VerifyReport verify_equivalence(const PipelineRun& efficient, const PipelineRun& naive,
                                const PipelineConfig& config) {
  auto key = [](const ContextBundle& b) {
    return b.query_id + '\x1f' + json(b.subsample.p).dump() + '\x1f' +
           std::to_string(b.subsample.seed);
  };
  std::unordered_map<std::string, const ContextBundle*> naive_by_key;
  for (const auto& b : naive.bundles) naive_by_key[key(b)] = &b;

  const std::size_t need = config.required_survivors();
  VerifyReport r;
  std::map<double, VerifyRow> rows;
  for (const auto& b : efficient.bundles) {
    auto& row = rows[b.subsample.p];
    row.p = b.subsample.p;
    ++row.bundles;
    row.expected_short_rate += 1.0 - tail_bound(b.pool_size, b.subsample.p, need);
    if (b.short_pool) {
      ++row.short_bundles;
      ++r.skipped_short;
      continue;
    }
    ++row.compared;
    ++r.compared;
    auto it = naive_by_key.find(key(b));
    bool same = it != naive_by_key.end() && it->second->docs.size() == b.docs.size();
    if (same) {
      for (std::size_t i = 0; i < b.docs.size(); ++i) {
        const auto& x = b.docs[i].doc;
        const auto& y = it->second->docs[i].doc;
        if (x.passage_id != y.passage_id || x.score != y.score) {
          same = false;
          break;
        }
      }
    }
    if (!same) {
      ++row.mismatched;
      ++r.mismatched;
      r.mismatches.push_back(b.query_id + " " + json(b.subsample.p).dump() + " " +
                             std::to_string(b.subsample.seed));
    }
  }
  for (auto& [p, row] : rows) {
    if (row.bundles > 0) row.expected_short_rate /= static_cast<double>(row.bundles);
    r.per_ratio.push_back(row);
  }
  return r;
}

json verify_to_json(const VerifyReport& r) {
  json rows = json::array();
  for (const auto& row : r.per_ratio) {
    rows.push_back({{"p", row.p},
                    {"bundles", row.bundles},
                    {"compared", row.compared},
                    {"mismatched", row.mismatched},
                    {"short", row.short_bundles},
                    {"short_rate", row.bundles ? static_cast<double>(row.short_bundles) /
                                                     static_cast<double>(row.bundles)
                                               : 0.0},
                    {"expected_short_rate", row.expected_short_rate}});
  }
  return json{{"compared", r.compared},
              {"mismatched", r.mismatched},
              {"skipped_short", r.skipped_short},
              {"per_ratio", std::move(rows)},
              {"mismatches", r.mismatches}};
}

// --- context assembly ------------------------------------------------------

std::string assemble_context(std::span<const std::string> docs_best_first,
                             std::string_view few_shot, std::string_view question) {
  std::vector<std::string_view> parts;
  for (auto it = docs_best_first.rbegin(); it != docs_best_first.rend(); ++it) parts.push_back(*it);
  if (!few_shot.empty()) parts.push_back(few_shot);
  if (!question.empty()) parts.push_back(question);
  return text::join(parts, "\n\n");
}

std::vector<QueryRecord> ppl_queries_from_text(const std::string& source_id, std::string_view text,
                                               std::size_t chunk, std::size_t stride) {
  const auto tokens = text::split_whitespace(text);
  std::vector<QueryRecord> out;
  for (const auto& w : make_ppl_queries(std::span<const std::string_view>(tokens), chunk, stride)) {
    QueryRecord q;
    q.query_id = source_id + "@" + std::to_string(w.offset);
    q.question = text::join(w.prefix);
    q.ppl_target = text::join(w.target);
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace trove
