#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "trove/flat_index.hpp"

namespace trove {

inline constexpr std::size_t kDefaultRetrievalDepth = 1000;

struct RetrievalResult {
  std::string query_id;
  std::vector<ScoredDoc> docs;  // ordered by ranks_before, no duplicate ids
  std::size_t K = 0;
  std::set<std::string> domains;
};

/// Merges individually sorted lists over disjoint passage sets into the
/// global top-K. Throws ConfigError if a list is unsorted or an id occurs in
/// more than one list.
std::vector<ScoredDoc> merge_topk(const std::vector<std::vector<ScoredDoc>>& lists, std::size_t K);

/// Scatter-gather search: top-K from every shard (concurrently when
/// jobs > 1), then merge_topk. Identical to searching one index holding all
/// rows.
RetrievalResult search_distributed(std::span<const float> query,
                                   std::span<const ShardIndex* const> shards, std::size_t K,
                                   unsigned jobs = 1);
RetrievalResult search_distributed(std::span<const float> query,
                                   std::span<const ShardIndex> shards, std::size_t K,
                                   unsigned jobs = 1);

using DomainResults = std::map<std::string, std::vector<ScoredDoc>>;

/// Per-domain top-K lists (the cacheable unit).
DomainResults search_by_domain(std::span<const float> query, std::span<const ShardIndex> shards,
                               std::size_t K, unsigned jobs = 1);

/// Pools the cached lists of `target_domains` and re-selects the top-K.
/// Throws ConfigError naming the first target absent from `per_domain`.
std::vector<ScoredDoc> merge_domains(const DomainResults& per_domain,
                                     const std::set<std::string>& target_domains, std::size_t K);

/// Content-addressed per-(query, domain) result cache. The address covers the
/// query id, domain, embedder name, K and a fingerprint of the domain's
/// shard checksums, so re-embedding never reuses stale lists.
class RetrievalCache {
 public:
  struct Key {
    std::string query_id;
    std::string domain;
    std::string embedder;
    std::size_t K = 0;
    std::uint64_t index_fingerprint = 0;
  };

  explicit RetrievalCache(std::filesystem::path dir);

  std::filesystem::path path_for(const Key& key) const;
  std::optional<std::vector<ScoredDoc>> get(const Key& key) const;
  void put(const Key& key, const std::vector<ScoredDoc>& docs) const;

 private:
  std::filesystem::path dir_;
};

/// hash64 over (domain, shard, rows, dim, payload bytes) of the given shards,
/// in (domain, shard) order.
std::uint64_t index_fingerprint(std::span<const ShardIndex* const> shards);

}  // namespace trove
