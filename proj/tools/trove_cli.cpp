// trove: command-line driver for chunking, embedding, indexing, retrieval,
// the datastore pipeline, sweeps and FLOPs accounting.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "trove/corpus.hpp"
#include "trove/embedding.hpp"
#include "trove/errors.hpp"
#include "trove/flat_index.hpp"
#include "trove/flops.hpp"
#include "trove/hash.hpp"
#include "trove/pipeline.hpp"
#include "trove/retrieval.hpp"
#include "trove/subsample.hpp"
#include "trove/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace trove;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json file_record(const fs::path& p) {
  const auto bytes = read_file_bytes(p);
  return {{"path", p.string()}, {"bytes", bytes.size()}, {"checksum", to_hex(hash64(bytes))}};
}

/// Run manifest: command line, configuration, input and output checksums,
/// timings and counts.
class Manifest {
 public:
  Manifest(std::string command, std::vector<std::string> argv)
      : started_(utc_now()), t0_(std::chrono::steady_clock::now()) {
    doc_ = {{"tool", "trove"}, {"version", kVersion}, {"command", std::move(command)},
            {"argv", std::move(argv)}, {"inputs", json::array()}, {"outputs", json::array()}};
  }

  void input(const fs::path& p) { doc_["inputs"].push_back(file_record(p)); }
  void output(const fs::path& p) { doc_["outputs"].push_back(file_record(p)); }
  json& operator[](const char* key) { return doc_[key]; }

  void write(const fs::path& path) {
    if (path.empty()) return;
    doc_["started_at"] = started_;
    doc_["finished_at"] = utc_now();
    doc_["elapsed_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write manifest " + path.string());
    out << doc_.dump(2) << '\n';
  }

 private:
  json doc_;
  std::string started_;
  std::chrono::steady_clock::time_point t0_;
};

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + p.string());
  return out;
}

std::string num(double v) { return json(v).dump(); }

// --- chunk -----------------------------------------------------------------

struct ChunkArgs {
  fs::path input, output, manifest;
  std::size_t max_words = kDefaultMaxWords;
  std::uint32_t shards = 1;
  std::vector<std::string> domain_shards;
  std::string rule = "round-robin";
};

int cmd_chunk(const ChunkArgs& a, Manifest& man) {
  require_file(a.input, "corpus");
  man.input(a.input);
  ShardingPlan plan;
  plan.default_shards = a.shards;
  for (const auto& spec : a.domain_shards) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw ConfigError("--domain-shards expects domain=N, got " + spec);
    try {
      plan.shards_per_domain[spec.substr(0, eq)] =
          static_cast<std::uint32_t>(std::stoul(spec.substr(eq + 1)));
    } catch (const std::exception&) {
      throw ConfigError("--domain-shards: bad count in " + spec);
    }
  }
  if (a.rule == "hash") {
    plan.rule = ShardRule::Hash;
  } else if (a.rule != "round-robin") {
    throw ConfigError("--shard-rule must be round-robin or hash");
  }
  const auto docs = read_corpus_jsonl(a.input);
  const auto passages = assign_shards(chunk_corpus(docs, a.max_words), plan);
  write_passages_jsonl(a.output, passages);
  man.output(a.output);
  man["counts"] = {{"documents", docs.size()}, {"passages", passages.size()}};
  std::cout << passages.size() << " passages from " << docs.size() << " documents\n";
  return 0;
}

// --- embed / index ---------------------------------------------------------

struct EmbedArgs {
  fs::path passages, out_dir, manifest;
  std::uint32_t dim = kDefaultDim;
};

int cmd_embed(const EmbedArgs& a, Manifest& man) {
  require_file(a.passages, "passages");
  man.input(a.passages);
  const HashedBowEmbedder embedder({.dim = a.dim});
  std::map<std::pair<std::string, std::uint32_t>, std::vector<Passage>> groups;
  for (auto& p : read_passages_jsonl(a.passages)) groups[{p.domain, p.shard}].push_back(std::move(p));
  fs::create_directories(a.out_dir);
  for (const auto& [key, group] : groups) {
    const auto bytes = encode_embedding_file(embed_shard(group, embedder));
    const auto stem = a.out_dir / index_stem(key.first, key.second);
    const auto file = fs::path(stem.string() + ".emb");
    write_file_bytes(file, bytes);
    const json side{{"domain", key.first},      {"shard", key.second},
                    {"dim", a.dim},             {"rows", group.size()},
                    {"embedder", embedder.spec().name},
                    {"checksum", to_hex(hash64(bytes))}};
    open_out(fs::path(stem.string() + ".emb.json")) << side.dump(2) << '\n';
    man.output(file);
  }
  man["counts"] = {{"shards", groups.size()}};
  std::cout << groups.size() << " embedding shards written to " << a.out_dir.string() << "\n";
  return 0;
}

struct IndexArgs {
  fs::path emb_dir, out_dir, manifest;
};

int cmd_index(const IndexArgs& a, Manifest& man) {
  if (!fs::is_directory(a.emb_dir)) throw ConfigError("embedding dir not found: " + a.emb_dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.emb_dir)) {
    if (e.path().extension() == ".emb") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("no .emb files in " + a.emb_dir.string());
  fs::create_directories(a.out_dir);
  for (const auto& f : files) {
    const fs::path side_path = f.string() + ".json";
    require_file(side_path, "embedding sidecar");
    json side;
    try {
      side = json::parse(std::ifstream(side_path));
    } catch (const json::exception& e) {
      throw IntegrityError(side_path.string() + ": " + e.what());
    }
    const auto bytes = read_file_bytes(f);
    if (to_hex(hash64(bytes)) != side.value("checksum", "")) {
      throw IntegrityError("checksum mismatch for " + f.string() + " (file changed or truncated)");
    }
    const auto matrix = decode_embedding_file(bytes);
    const ShardIndex idx(matrix, side.at("domain").get<std::string>(), side.at("shard").get<std::uint32_t>());
    save_index(idx, a.out_dir);
    man.input(f);
    man.output(a.out_dir / (index_stem(idx.domain(), idx.shard()) + ".trve"));
  }
  man["counts"] = {{"shards", files.size()}};
  std::cout << files.size() << " shard indices written to " << a.out_dir.string() << "\n";
  return 0;
}

// --- search ----------------------------------------------------------------

struct SearchArgs {
  fs::path index_dir, queries, output, manifest;
  std::string query;
  std::size_t K = 10;
  std::vector<std::string> domains;
  unsigned jobs = 1;
};

int cmd_search(const SearchArgs& a, Manifest& man) {
  const auto shards = load_index_dir(a.index_dir);
  if (shards.empty()) throw ConfigError("no indices in " + a.index_dir.string());
  std::vector<QueryRecord> queries;
  if (!a.queries.empty()) {
    require_file(a.queries, "queries");
    man.input(a.queries);
    queries = read_queries_jsonl(a.queries);
  } else if (!a.query.empty()) {
    queries.push_back({"query", a.query, {}, "", std::nullopt});
  } else {
    throw ConfigError("search needs --query or --queries");
  }
  const HashedBowEmbedder embedder({.dim = shards.front().dim()});
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!a.output.empty()) {
    file = open_out(a.output);
    out = &file;
  }
  for (const auto& q : queries) {
    const auto v = embedder.embed(q.question);
    const auto per = search_by_domain(v, shards, a.K, a.jobs);
    std::set<std::string> targets(a.domains.begin(), a.domains.end());
    if (targets.empty()) {
      for (const auto& [d, _] : per) targets.insert(d);
    }
    json docs = json::array();
    for (const auto& d : merge_domains(per, targets, a.K)) {
      docs.push_back({{"pid", d.passage_id}, {"score", d.score}, {"domain", d.domain}, {"shard", d.shard}});
    }
    *out << json{{"qid", q.query_id}, {"docs", docs}}.dump() << '\n';
  }
  if (!a.output.empty()) {
    file.close();
    man.output(a.output);
  }
  return 0;
}

// --- pipeline --------------------------------------------------------------

struct PipelineArgs {
  fs::path config, index_dir, passages, queries, output, manifest, cache_dir, filter_report,
      verify_out;
  bool naive = false;
  bool verify = false;
  unsigned jobs = 1;
  std::vector<double> p;
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> k, K, K_prime, fallback_K;
  std::optional<std::uint32_t> dim;
  std::optional<std::string> decon, reranker, dedup;
  std::vector<std::string> domains;
};

PipelineConfig resolve_config(const PipelineArgs& a) {
  PipelineConfig c = a.config.empty() ? PipelineConfig{} : load_config(a.config);
  if (!a.p.empty()) c.ratios = a.p;
  if (!a.seeds.empty()) c.seeds = a.seeds;
  if (a.k) c.k = *a.k;
  if (a.K) c.K = *a.K;
  if (a.K_prime) c.K_prime = *a.K_prime;
  if (a.fallback_K) c.fallback_K = *a.fallback_K;
  if (a.decon) c.decon = DecontaminationMode::from_name(*a.decon);
  if (a.reranker) c.reranker = *a.reranker;
  if (a.dedup) c.dedup = dedup_setting_from_name(*a.dedup);
  if (!a.domains.empty()) c.domains = {a.domains.begin(), a.domains.end()};
  if (a.dim) c.embedder.dim = *a.dim;
  c.validate();
  if (c.embedder.name != "hashed-bow") {
    throw ConfigError("embedder: only hashed-bow is built in, got '" + c.embedder.name + "'");
  }
  return c;
}

json stats_json(const StageStats& s) {
  return {{"retrieval_seconds", s.retrieval_seconds},
          {"filter_seconds", s.filter_seconds},
          {"subsample_rerank_seconds", s.subsample_rerank_seconds},
          {"index_build_seconds", s.index_build_seconds},
          {"queries", s.queries},
          {"bundles", s.bundles},
          {"short_bundles", s.short_bundles},
          {"cache_hits", s.cache_hits},
          {"removed_duplicate", s.removed_duplicate},
          {"removed_short_chunk", s.removed_short_chunk},
          {"removed_contaminated", s.removed_contaminated},
          {"removed_quality", s.removed_quality}};
}

void write_filter_report(const fs::path& path, const std::vector<ContextBundle>& bundles) {
  auto out = open_out(path);
  for (const auto& b : bundles) {
    json counts = json::object();
    for (auto r : {RemovalReason::Duplicate, RemovalReason::ShortChunk, RemovalReason::Contaminated,
                   RemovalReason::Quality}) {
      counts[std::string(to_string(r))] = b.report.count(r);
    }
    out << json{{"qid", b.query_id}, {"p", b.subsample.p}, {"seed", b.subsample.seed},
                {"kept", b.report.kept_count}, {"removed", counts}}
               .dump()
        << '\n';
  }
}

int cmd_pipeline(const PipelineArgs& a, Manifest& man) {
  const auto config = resolve_config(a);
  if (!a.config.empty()) man.input(a.config);
  require_file(a.passages, "passages");
  require_file(a.queries, "queries");
  man.input(a.passages);
  man.input(a.queries);
  man["config"] = config_to_json(config);
  const PassageStore store(read_passages_jsonl(a.passages));
  const auto queries = read_queries_jsonl(a.queries);
  const HashedBowEmbedder embedder(config.embedder);

  std::optional<RetrievalCache> cache;
  if (!a.cache_dir.empty()) cache.emplace(a.cache_dir);
  const RunOptions opts{a.jobs, cache ? &*cache : nullptr};

  auto efficient = [&] {
    if (a.index_dir.empty()) throw ConfigError("--index-dir is required for the efficient pipeline");
    const auto shards = load_index_dir(a.index_dir);
    for (const auto& s : shards) {
      man.input(a.index_dir / (index_stem(s.domain(), s.shard()) + ".trve"));
    }
    return run_efficient(queries, shards, store, config, embedder, opts);
  };

  PipelineRun run;
  int rc = 0;
  if (a.verify) {
    run = efficient();
    const auto naive = run_naive(queries, store, config, embedder, opts);
    const auto report = verify_equivalence(run, naive, config);
    json vj = verify_to_json(report);
    man["verify"] = {{"compared", report.compared}, {"mismatched", report.mismatched},
                     {"skipped_short", report.skipped_short}};
    man["naive_stats"] = stats_json(naive.stats);
    if (a.verify_out.empty()) {
      std::cout << vj.dump(2) << '\n';
    } else {
      open_out(a.verify_out) << vj.dump(2) << '\n';
    }
    if (report.mismatched > 0) {
      std::cerr << "error: " << report.mismatched << " bundle(s) differ from the naive pipeline\n";
      rc = 2;
    }
  } else if (a.naive) {
    run = run_naive(queries, store, config, embedder, opts);
  } else {
    run = efficient();
  }

  write_bundles_jsonl(a.output, run.bundles);
  man.output(a.output);
  if (!a.filter_report.empty()) {
    write_filter_report(a.filter_report, run.bundles);
    man.output(a.filter_report);
  }
  man["mode"] = a.verify ? "verify" : a.naive ? "naive" : "efficient";
  man["stats"] = stats_json(run.stats);
  std::cerr << run.bundles.size() << " bundles, " << run.stats.short_bundles << " short\n";
  return rc;
}

// --- sweep -----------------------------------------------------------------

struct SweepArgs {
  fs::path bundles, passages, output, manifest;
};

int cmd_sweep(const SweepArgs& a, Manifest& man) {
  require_file(a.bundles, "bundles");
  require_file(a.passages, "passages");
  man.input(a.bundles);
  man.input(a.passages);
  const auto passages = read_passages_jsonl(a.passages);
  std::uint64_t raw_tokens = 0;
  std::set<std::string> domains;
  for (const auto& p : passages) {
    raw_tokens += p.word_count;
    domains.insert(p.domain);
  }

  struct Row {
    std::size_t bundles = 0, with_docs = 0, short_count = 0, fallback = 0;
    double top1_sum = 0.0;
    std::map<std::string, std::size_t> top1_domain;
  };
  std::map<std::pair<double, std::uint64_t>, Row> rows;
  std::ifstream in(a.bundles);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json b;
    try {
      b = json::parse(line);
    } catch (const json::exception& e) {
      throw IntegrityError(a.bundles.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    auto& r = rows[{b.at("p").get<double>(), b.at("seed").get<std::uint64_t>()}];
    ++r.bundles;
    r.short_count += b.at("short").get<bool>();
    r.fallback += b.at("fallback").get<bool>();
    const auto& docs = b.at("docs");
    if (docs.empty()) {
      ++r.top1_domain["none"];
      continue;
    }
    ++r.with_docs;
    r.top1_sum += docs[0].at("score").get<double>();
    const auto d = docs[0].at("domain").get<std::string>();
    domains.insert(d);
    ++r.top1_domain[d];
  }

  auto out = open_out(a.output);
  out << "p,seed,datastore_tokens,queries";
  for (const auto& d : domains) out << ",top1_" << d;
  out << ",top1_none,mean_top1_score,short_rate,fallback_rate\n";
  for (const auto& [key, r] : rows) {
    const FlopCount tokens = static_cast<std::uint64_t>(std::llround(static_cast<double>(raw_tokens) * key.first));
    out << num(key.first) << ',' << key.second << ',' << tokens.str() << ',' << r.bundles;
    for (const auto& d : domains) {
      const auto it = r.top1_domain.find(d);
      out << ',' << (it == r.top1_domain.end() ? 0 : it->second);
    }
    const auto none = r.top1_domain.find("none");
    out << ',' << (none == r.top1_domain.end() ? 0 : none->second) << ','
        << (r.with_docs ? num(r.top1_sum / static_cast<double>(r.with_docs)) : "") << ','
        << num(static_cast<double>(r.short_count) / static_cast<double>(r.bundles)) << ','
        << num(static_cast<double>(r.fallback) / static_cast<double>(r.bundles)) << '\n';
  }
  out.close();
  man.output(a.output);
  man["counts"] = {{"rows", rows.size()}, {"raw_tokens", raw_tokens}};
  return 0;
}

// --- flops -----------------------------------------------------------------

struct FlopsArgs {
  fs::path input, output, manifest;
  std::string direction = "higher";
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int cmd_flops(const FlopsArgs& a, Manifest& man) {
  require_file(a.input, "flops csv");
  man.input(a.input);
  MetricDirection dir;
  if (a.direction == "higher") {
    dir = MetricDirection::HigherBetter;
  } else if (a.direction == "lower") {
    dir = MetricDirection::LowerBetter;
  } else {
    throw ConfigError("--direction must be higher or lower");
  }
  std::ifstream in(a.input);
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  const auto cols = split_csv(header);
  auto col = [&](const std::string& name) {
    const auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end()) throw ConfigError("flops csv: missing column " + name);
    return static_cast<std::size_t>(it - cols.begin());
  };
  const std::size_t c_nlm = col("N_LM"), c_dp = col("D_pretrain"), c_nr = col("N_retriever"),
                    c_dd = col("D_datastore"), c_m = col("metric");

  std::vector<std::vector<std::string>> cells;
  std::vector<FrontierPoint> points;
  std::vector<FlopsModel> models;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto row = split_csv(line);
    if (row.size() != cols.size()) {
      throw IntegrityError("flops csv line " + std::to_string(lineno) + ": expected " +
                           std::to_string(cols.size()) + " cells");
    }
    const FlopsModel m{parse_count(row[c_nlm]), parse_count(row[c_dp]), parse_count(row[c_nr]),
                       parse_count(row[c_dd])};
    double metric;
    try {
      metric = std::stod(row[c_m]);
    } catch (const std::exception&) {
      throw IntegrityError("flops csv line " + std::to_string(lineno) + ": bad metric");
    }
    points.push_back({flops_total(m), metric, ""});
    models.push_back(m);
    cells.push_back(std::move(row));
  }
  std::vector<bool> frontier(points.size(), false);
  for (std::size_t i : pareto_indices(points, dir)) frontier[i] = true;

  auto out = open_out(a.output);
  out << header << ",flops_pretrain,flops_datastore,flops_total,frontier\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out << text::join(cells[i], ",") << ','
        << flops_pretrain(models[i].lm_params, models[i].pretrain_tokens).str() << ','
        << flops_datastore(models[i].retriever_params, models[i].datastore_tokens).str() << ','
        << points[i].flops.str() << ',' << (frontier[i] ? "true" : "false") << '\n';
  }
  out.close();
  man.output(a.output);
  return 0;
}

// --- tailbound -------------------------------------------------------------

struct TailArgs {
  std::uint64_t K = kDefaultRetrievalDepth;
  std::uint64_t m = 3;
  std::vector<double> p = {0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0};
};

int cmd_tailbound(const TailArgs& a) {
  std::cout << "p,K,m,tail_bound\n";
  for (double p : a.p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", tail_bound(a.K, p, a.m));
    std::cout << num(p) << ',' << a.K << ',' << a.m << ',' << buf << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trove: datastore construction, retrieval and scaling pipeline"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ChunkArgs chunk;
  auto* sc = app.add_subcommand("chunk", "Chunk a JSONL corpus into sharded passages");
  sc->add_option("--input", chunk.input, "Corpus JSONL {id, domain, text}")->required();
  sc->add_option("--output", chunk.output, "Passage JSONL")->required();
  sc->add_option("--max-words", chunk.max_words, "Words per passage")->check(CLI::PositiveNumber);
  sc->add_option("--shards", chunk.shards, "Shards per domain")->check(CLI::PositiveNumber);
  sc->add_option("--domain-shards", chunk.domain_shards, "Per-domain shard counts, domain=N");
  sc->add_option("--shard-rule", chunk.rule, "round-robin or hash");
  sc->add_option("--manifest", chunk.manifest, "Run manifest path");

  EmbedArgs embed;
  auto* se = app.add_subcommand("embed", "Embed passages into per-shard embedding files");
  se->add_option("--passages", embed.passages)->required();
  se->add_option("--out-dir", embed.out_dir)->required();
  se->add_option("--dim", embed.dim, "Embedding dimension")->check(CLI::PositiveNumber);
  se->add_option("--manifest", embed.manifest);

  IndexArgs index;
  auto* si = app.add_subcommand("index", "Verify embedding files and build shard indices");
  si->add_option("--emb-dir", index.emb_dir)->required();
  si->add_option("--out-dir", index.out_dir)->required();
  si->add_option("--manifest", index.manifest);

  SearchArgs search;
  auto* ss = app.add_subcommand("search", "Top-K retrieval over an index directory");
  ss->add_option("--index-dir", search.index_dir)->required();
  ss->add_option("--query", search.query);
  ss->add_option("--queries", search.queries, "Query JSONL");
  ss->add_option("--K", search.K)->check(CLI::PositiveNumber);
  ss->add_option("--domains", search.domains);
  ss->add_option("--jobs", search.jobs)->check(CLI::PositiveNumber);
  ss->add_option("--output", search.output);
  ss->add_option("--manifest", search.manifest);

  PipelineArgs pipe;
  auto* sp = app.add_subcommand("pipeline", "Build context bundles for every (p, seed)");
  sp->add_option("--config", pipe.config, "JSON config");
  sp->add_option("--index-dir", pipe.index_dir);
  sp->add_option("--passages", pipe.passages)->required();
  sp->add_option("--queries", pipe.queries)->required();
  sp->add_option("--output", pipe.output, "Bundle JSONL")->required();
  sp->add_flag("--naive", pipe.naive, "Subsample, re-index and retrieve per (p, seed)");
  sp->add_flag("--verify", pipe.verify, "Run both pipelines and compare");
  sp->add_option("--verify-out", pipe.verify_out);
  sp->add_option("--jobs", pipe.jobs)->check(CLI::PositiveNumber);
  sp->add_option("--p", pipe.p, "Subsampling ratios");
  sp->add_option("--seeds", pipe.seeds);
  sp->add_option("--k", pipe.k);
  sp->add_option("--K", pipe.K);
  sp->add_option("--K-prime", pipe.K_prime);
  sp->add_option("--fallback-K", pipe.fallback_K);
  sp->add_option("--decon", pipe.decon, "none, standard or aggressive");
  sp->add_option("--reranker", pipe.reranker, "none, identity, oracle or extern:<path>");
  sp->add_option("--dedup", pipe.dedup, "off, exact, jaccard or minhash");
  sp->add_option("--domains", pipe.domains);
  sp->add_option("--dim", pipe.dim, "Embedding dimension");
  sp->add_option("--cache-dir", pipe.cache_dir);
  sp->add_option("--filter-report", pipe.filter_report);
  sp->add_option("--manifest", pipe.manifest);
  sp->get_option("--naive")->excludes(sp->get_option("--verify"));

  SweepArgs sweep;
  auto* sw = app.add_subcommand("sweep", "Aggregate bundles per (p, seed) into CSV");
  sw->add_option("--bundles", sweep.bundles)->required();
  sw->add_option("--passages", sweep.passages)->required();
  sw->add_option("--output", sweep.output)->required();
  sw->add_option("--manifest", sweep.manifest);

  FlopsArgs flops;
  auto* sf = app.add_subcommand("flops", "Annotate configurations with FLOPs and the Pareto frontier");
  sf->add_option("--input", flops.input)->required();
  sf->add_option("--output", flops.output)->required();
  sf->add_option("--direction", flops.direction, "higher or lower metric is better");
  sf->add_option("--manifest", flops.manifest);

  TailArgs tail;
  auto* st = app.add_subcommand("tailbound", "P(Binomial(K, p) >= m) table");
  st->add_option("--K", tail.K);
  st->add_option("--m", tail.m);
  st->add_option("--p", tail.p);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const std::vector<std::string> args(argv, argv + argc);
  try {
    auto run = [&](const char* name, const fs::path& manifest_path, auto&& fn) {
      Manifest man(name, args);
      const int rc = fn(man);
      man.write(manifest_path);
      return rc;
    };
    if (*sc) return run("chunk", chunk.manifest, [&](Manifest& m) { return cmd_chunk(chunk, m); });
    if (*se) return run("embed", embed.manifest, [&](Manifest& m) { return cmd_embed(embed, m); });
    if (*si) return run("index", index.manifest, [&](Manifest& m) { return cmd_index(index, m); });
    if (*ss) return run("search", search.manifest, [&](Manifest& m) { return cmd_search(search, m); });
    if (*sp) return run("pipeline", pipe.manifest, [&](Manifest& m) { return cmd_pipeline(pipe, m); });
    if (*sw) return run("sweep", sweep.manifest, [&](Manifest& m) { return cmd_sweep(sweep, m); });
    if (*sf) return run("flops", flops.manifest, [&](Manifest& m) { return cmd_flops(flops, m); });
    if (*st) return cmd_tailbound(tail);
  } catch (const IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "integrity error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
