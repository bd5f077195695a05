#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "trove/embedding.hpp"

namespace trove {

struct ScoredDoc {
  std::string passage_id;
  double score = 0.0;
  std::string domain;
  std::uint32_t shard = 0;

  friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

/// The retrieval total order: score descending, then passage id ascending.
inline bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.passage_id < b.passage_id;
}

/// Sum of float products accumulated in double, strictly left to right.
double inner_product(std::span<const float> a, std::span<const float> b);

/// Immutable exhaustive inner-product index over one shard.
class ShardIndex {
 public:
  /// Throws ConfigError on shape mismatch or a duplicate passage id.
  ShardIndex(EmbeddingMatrix payload, std::string domain, std::uint32_t shard);

  const std::string& domain() const { return domain_; }
  std::uint32_t shard() const { return shard_; }
  std::uint32_t dim() const { return payload_.dim; }
  std::size_t rows() const { return payload_.rows(); }
  const EmbeddingMatrix& payload() const { return payload_; }

  /// Exact top-K under ranks_before; min(K, rows) results.
  std::vector<ScoredDoc> search(std::span<const float> query, std::size_t K) const;

 private:
  EmbeddingMatrix payload_;
  std::string domain_;
  std::uint32_t shard_;
};

ShardIndex build_index(EmbeddingMatrix payload, std::string domain, std::uint32_t shard);
std::vector<ScoredDoc> search_shard(const ShardIndex& index, std::span<const float> query,
                                    std::size_t K);

/// Sidecar written next to each index file.
struct IndexManifest {
  std::string domain;
  std::uint32_t shard = 0;
  std::uint32_t dim = 0;
  std::uint64_t rows = 0;
  std::uint64_t checksum = 0;  // hash64 of the index file bytes
};

std::string index_stem(const std::string& domain, std::uint32_t shard);

/// Writes `<dir>/<stem>.trve` and `<dir>/<stem>.json`.
IndexManifest save_index(const ShardIndex& index, const std::filesystem::path& dir);
/// Loads `<stem>.trve` and verifies it against the `<stem>.json` sidecar.
/// Throws IntegrityError on any mismatch.
ShardIndex load_index(const std::filesystem::path& trve_file);
/// All indices in a directory, ordered by (domain, shard).
std::vector<ShardIndex> load_index_dir(const std::filesystem::path& dir);

}  // namespace trove
