#include "trove/corpus.hpp"

#include <cstdio>
#include <algorithm>
#include <fstream>
#include <span>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "trove/errors.hpp"
#include "trove/hash.hpp"
#include "trove/text.hpp"

namespace trove {

using nlohmann::json;

std::uint32_t ShardingPlan::shards_for(const std::string& domain) const {
  std::uint32_t m = 0;
  if (auto it = shards_per_domain.find(domain); it != shards_per_domain.end()) {
    m = it->second;
  } else if (default_shards) {
    m = *default_shards;
  } else {
    throw ConfigError("sharding plan has no entry for domain '" + domain + "'");
  }
  if (m < 1) throw ConfigError("shard count for domain '" + domain + "' must be >= 1");
  return m;
}

std::string make_passage_id(const std::string& doc_id, std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "#%06zu", ordinal);
  return doc_id + buf;
}

std::vector<Passage> chunk_corpus(const std::vector<RawDocument>& docs, std::size_t max_words) {
  if (max_words < 1) throw ConfigError("max_words must be >= 1");
  std::vector<Passage> out;
  for (const auto& doc : docs) {
    if (doc.doc_id.empty()) throw ConfigError("document with empty id");
    if (doc.domain.empty()) throw ConfigError("document '" + doc.doc_id + "' has empty domain");
    const auto tokens = text::split_whitespace(doc.text);
    std::size_t ordinal = 0;
    for (std::size_t begin = 0; begin < tokens.size(); begin += max_words, ++ordinal) {
      const std::size_t end = std::min(tokens.size(), begin + max_words);
      Passage p;
      p.passage_id = make_passage_id(doc.doc_id, ordinal);
      p.domain = doc.domain;
      p.text = text::join(std::span(tokens).subspan(begin, end - begin));
      p.word_count = static_cast<std::uint32_t>(end - begin);
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<Passage> assign_shards(std::vector<Passage> passages, const ShardingPlan& plan) {
  std::unordered_map<std::string, std::uint64_t> ordinal_in_domain;
  for (auto& p : passages) {
    const std::uint32_t m = plan.shards_for(p.domain);
    switch (plan.rule) {
      case ShardRule::RoundRobin:
        p.shard = static_cast<std::uint32_t>(ordinal_in_domain[p.domain]++ % m);
        break;
      case ShardRule::Hash:
        p.shard = static_cast<std::uint32_t>(hash64(p.passage_id) % m);
        break;
    }
  }
  return passages;
}

namespace {

template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
      fn(j);
    } catch (const json::exception& e) {
      throw IntegrityError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

}  // namespace

std::vector<RawDocument> read_corpus_jsonl(const std::filesystem::path& path) {
  std::vector<RawDocument> docs;
  std::unordered_set<std::string> seen;
  for_each_json_line(path, [&](const json& j) {
    RawDocument d{j.at("id").get<std::string>(), j.at("domain").get<std::string>(),
                  j.at("text").get<std::string>()};
    if (!seen.insert(d.doc_id).second) {
      throw IntegrityError("duplicate document id '" + d.doc_id + "' in " + path.string());
    }
    docs.push_back(std::move(d));
  });
  return docs;
}

void write_corpus_jsonl(const std::filesystem::path& path, const std::vector<RawDocument>& docs) {
  auto out = open_out(path);
  for (const auto& d : docs) {
    out << json{{"id", d.doc_id}, {"domain", d.domain}, {"text", d.text}}.dump() << '\n';
  }
}

std::vector<Passage> read_passages_jsonl(const std::filesystem::path& path) {
  std::vector<Passage> out;
  for_each_json_line(path, [&](const json& j) {
    Passage p;
    p.passage_id = j.at("pid").get<std::string>();
    p.domain = j.at("domain").get<std::string>();
    p.shard = j.at("shard").get<std::uint32_t>();
    p.text = j.at("text").get<std::string>();
    p.word_count = j.at("wc").get<std::uint32_t>();
    out.push_back(std::move(p));
  });
  return out;
}

void write_passages_jsonl(const std::filesystem::path& path, const std::vector<Passage>& passages) {
  auto out = open_out(path);
  for (const auto& p : passages) {
    json j{{"pid", p.passage_id},
           {"domain", p.domain},
           {"shard", p.shard},
           {"text", p.text},
           {"wc", p.word_count}};
    out << j.dump() << '\n';
  }
}

}  // namespace trove
