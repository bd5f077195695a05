#include "trove/rerank.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <set>
#include <unistd.h>

#include <json.hpp>

#include "trove/errors.hpp"
#include "trove/text.hpp"

namespace trove {

void RerankSpec::validate() const {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (k > K_prime) throw ConfigError("K_prime must be >= k");
}

std::vector<double> IdentityScorer::score(const RerankQuery&, const Pool& docs) const {
  std::vector<double> out;
  out.reserve(docs.size());
  for (const auto& c : docs) out.push_back(c.doc.score);
  return out;
}

std::vector<double> OracleScorer::score(const RerankQuery& query, const Pool& docs) const {
  std::vector<double> out;
  out.reserve(docs.size());
  for (const auto& c : docs) out.push_back(oracle_score(c.text, query.answers));
  return out;
}

ExternalScorer::ExternalScorer(std::filesystem::path program) : program_(std::move(program)) {
  if (!std::filesystem::exists(program_)) {
    throw ConfigError("reranker program not found: " + program_.string());
  }
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

std::vector<double> ExternalScorer::score(const RerankQuery& query, const Pool& docs) const {
  if (docs.empty()) return {};
  const auto tmp = std::filesystem::temp_directory_path();
  static std::atomic<std::uint64_t> counter{0};
  const auto stem = "trove-rerank-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter.fetch_add(1));
  const auto in_path = tmp / (stem + ".in");
  const auto out_path = tmp / (stem + ".out");
  {
    std::ofstream in(in_path, std::ios::trunc);
    for (const auto& c : docs) {
      nlohmann::json j{{"qid", query.query_id},
                       {"query", query.text},
                       {"pid", c.doc.passage_id},
                       {"doc", c.text}};
      in << j.dump() << '\n';
    }
  }
  const std::string cmd = shell_quote(program_.string()) + " < " + shell_quote(in_path.string()) +
                          " > " + shell_quote(out_path.string());
  const int rc = std::system(cmd.c_str());
  std::filesystem::remove(in_path);
  if (rc != 0) {
    std::filesystem::remove(out_path);
    throw IntegrityError("reranker " + program_.string() + " exited with status " +
                         std::to_string(rc));
  }
  std::vector<double> scores;
  {
    std::ifstream out(out_path);
    std::string line;
    while (std::getline(out, line)) {
      if (line.empty()) continue;
      try {
        scores.push_back(std::stod(line));
      } catch (const std::exception&) {
        throw IntegrityError("reranker printed a non-numeric line: " + line);
      }
    }
  }
  std::filesystem::remove(out_path);
  if (scores.size() != docs.size()) {
    throw IntegrityError("reranker returned " + std::to_string(scores.size()) + " scores for " +
                         std::to_string(docs.size()) + " documents");
  }
  return scores;
}

std::unique_ptr<Scorer> make_scorer(std::string_view name) {
  if (name == "none" || name.empty()) return nullptr;
  if (name == "identity") return std::make_unique<IdentityScorer>();
  if (name == "oracle") return std::make_unique<OracleScorer>();
  if (name.starts_with("extern:")) {
    return std::make_unique<ExternalScorer>(std::filesystem::path(name.substr(7)));
  }
  throw ConfigError("reranker: unknown scorer '" + std::string(name) +
                    "' (expected none, oracle, identity or extern:<path>)");
}

double oracle_score(std::string_view doc, const std::vector<std::string>& answers) {
  if (answers.empty()) throw ConfigError("oracle_score needs at least one answer");
  const auto doc_tokens = text::normalized_words(doc);
  const std::set<std::string> doc_vocab(doc_tokens.begin(), doc_tokens.end());
  double best = 0.0;
  for (const auto& answer : answers) {
    const auto ans = text::normalized_words(answer);
    if (ans.empty()) continue;
    if (std::search(doc_tokens.begin(), doc_tokens.end(), ans.begin(), ans.end()) !=
        doc_tokens.end()) {
      return 1.0;
    }
    const std::set<std::string> ans_vocab(ans.begin(), ans.end());
    std::size_t hit = 0;
    for (const auto& w : ans_vocab) hit += doc_vocab.count(w);
    best = std::max(best, static_cast<double>(hit) / static_cast<double>(ans_vocab.size()));
  }
  return best;
}

void score_pool(Pool& pool, const Scorer& scorer, const RerankQuery& query) {
  const auto scores = scorer.score(query, pool);
  if (scores.size() != pool.size()) throw IntegrityError("scorer returned wrong number of scores");
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i].rerank_score = scores[i];
}

Pool select_top(Pool pool, std::size_t k) {
  std::stable_sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
    if (a.rerank_score.has_value() != b.rerank_score.has_value()) return a.rerank_score.has_value();
    if (a.rerank_score && *a.rerank_score != *b.rerank_score) return *a.rerank_score > *b.rerank_score;
    return a.rank < b.rank;
  });
  if (pool.size() > k) pool.resize(k);
  return pool;
}

Pool rerank(const Pool& docs, const Scorer& scorer, const RerankQuery& query,
            const RerankSpec& spec) {
  spec.validate();
  Pool head(docs.begin(), docs.begin() + static_cast<std::ptrdiff_t>(std::min(spec.K_prime, docs.size())));
  score_pool(head, scorer, query);
  return select_top(std::move(head), spec.k);
}

}  // namespace trove
