#include "trove/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <queue>
#include <unordered_set>

#include <json.hpp>

#include "trove/errors.hpp"
#include "trove/hash.hpp"
#include "trove/parallel.hpp"

namespace trove {

using nlohmann::json;

std::vector<ScoredDoc> merge_topk(const std::vector<std::vector<ScoredDoc>>& lists,
                                  std::size_t K) {
  std::unordered_set<std::string_view> ids;
  for (std::size_t l = 0; l < lists.size(); ++l) {
    const auto& list = lists[l];
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i > 0 && ranks_before(list[i], list[i - 1])) {
        throw ConfigError("merge_topk: input list " + std::to_string(l) + " is not sorted");
      }
      if (!ids.insert(list[i].passage_id).second) {
        throw ConfigError("merge_topk: passage id '" + list[i].passage_id +
                          "' appears in more than one list");
      }
    }
  }

  // Heap of (list, position); top is the best remaining head.
  using Cursor = std::pair<std::size_t, std::size_t>;
  auto worse = [&](const Cursor& a, const Cursor& b) {
    return ranks_before(lists[b.first][b.second], lists[a.first][a.second]);
  };
  std::priority_queue<Cursor, std::vector<Cursor>, decltype(worse)> heap(worse);
  for (std::size_t l = 0; l < lists.size(); ++l) {
    if (!lists[l].empty()) heap.emplace(l, 0);
  }
  std::vector<ScoredDoc> out;
  while (!heap.empty() && out.size() < K) {
    auto [l, i] = heap.top();
    heap.pop();
    out.push_back(lists[l][i]);
    if (i + 1 < lists[l].size()) heap.emplace(l, i + 1);
  }
  return out;
}

RetrievalResult search_distributed(std::span<const float> query,
                                   std::span<const ShardIndex* const> shards, std::size_t K,
                                   unsigned jobs) {
  if (K < 1) throw ConfigError("K must be >= 1");
  for (const auto* s : shards) {
    if (s->dim() != query.size()) {
      throw ConfigError("shard " + s->domain() + "/" + std::to_string(s->shard()) + " has dim " +
                        std::to_string(s->dim()) + ", query has " + std::to_string(query.size()));
    }
  }
  std::vector<std::vector<ScoredDoc>> partial(shards.size());
  parallel_for(shards.size(), jobs, [&](std::size_t i) { partial[i] = shards[i]->search(query, K); });

  RetrievalResult r;
  r.K = K;
  for (const auto* s : shards) r.domains.insert(s->domain());
  r.docs = merge_topk(partial, K);
  return r;
}

RetrievalResult search_distributed(std::span<const float> query,
                                   std::span<const ShardIndex> shards, std::size_t K,
                                   unsigned jobs) {
  std::vector<const ShardIndex*> ptrs;
  for (const auto& s : shards) ptrs.push_back(&s);
  return search_distributed(query, std::span<const ShardIndex* const>(ptrs), K, jobs);
}

DomainResults search_by_domain(std::span<const float> query, std::span<const ShardIndex> shards,
                               std::size_t K, unsigned jobs) {
  std::map<std::string, std::vector<const ShardIndex*>> by_domain;
  for (const auto& s : shards) by_domain[s.domain()].push_back(&s);
  DomainResults out;
  for (const auto& [domain, ptrs] : by_domain) {
    out[domain] =
        search_distributed(query, std::span<const ShardIndex* const>(ptrs), K, jobs).docs;
  }
  return out;
}

std::vector<ScoredDoc> merge_domains(const DomainResults& per_domain,
                                     const std::set<std::string>& target_domains, std::size_t K) {
  std::vector<std::vector<ScoredDoc>> lists;
  for (const auto& d : target_domains) {
    auto it = per_domain.find(d);
    if (it == per_domain.end()) {
      throw ConfigError("target domain '" + d + "' has no retrieved results");
    }
    lists.push_back(it->second);
  }
  return merge_topk(lists, K);
}

std::uint64_t index_fingerprint(std::span<const ShardIndex* const> shards) {
  std::vector<const ShardIndex*> sorted(shards.begin(), shards.end());
  std::sort(sorted.begin(), sorted.end(), [](const ShardIndex* a, const ShardIndex* b) {
    if (a->domain() != b->domain()) return a->domain() < b->domain();
    return a->shard() < b->shard();
  });
  Hasher64 h;
  for (const auto* s : sorted) {
    h.update(s->domain());
    h.update_u64_le(s->shard());
    h.update_u64_le(s->rows());
    h.update_u64_le(s->dim());
    for (const auto& id : s->payload().ids) {
      h.update_u64_le(id.size());
      h.update(id);
    }
    for (float f : s->payload().values) h.update_u64_le(std::bit_cast<std::uint32_t>(f));
  }
  return h.digest();
}

RetrievalCache::RetrievalCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path RetrievalCache::path_for(const Key& key) const {
  Hasher64 h;
  for (const auto* part : {&key.query_id, &key.domain, &key.embedder}) {
    h.update_u64_le(part->size());
    h.update(*part);
  }
  h.update_u64_le(key.K);
  h.update_u64_le(key.index_fingerprint);
  return dir_ / (to_hex(h.digest()) + ".jsonl");
}

std::optional<std::vector<ScoredDoc>> RetrievalCache::get(const Key& key) const {
  std::ifstream in(path_for(key));
  if (!in) return std::nullopt;
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception&) {
    return std::nullopt;
  }
  if (j.value("qid", "") != key.query_id || j.value("domain", "") != key.domain ||
      j.value("K", std::size_t{0}) != key.K) {
    return std::nullopt;
  }
  std::vector<ScoredDoc> docs;
  for (const auto& d : j.at("docs")) {
    docs.push_back({d.at("pid").get<std::string>(), d.at("score").get<double>(), key.domain,
                    d.at("shard").get<std::uint32_t>()});
  }
  return docs;
}

void RetrievalCache::put(const Key& key, const std::vector<ScoredDoc>& docs) const {
  json arr = json::array();
  for (const auto& d : docs) {
    arr.push_back({{"pid", d.passage_id}, {"score", d.score}, {"shard", d.shard}});
  }
  json j{{"qid", key.query_id}, {"domain", key.domain}, {"K", key.K}, {"docs", std::move(arr)}};
  const auto target = path_for(key);
  auto tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << j.dump() << '\n';
    if (!out) throw ConfigError("cannot write cache file " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace trove
