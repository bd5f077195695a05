#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trove/corpus.hpp"

namespace trove {

using EmbeddingVector = std::vector<float>;

inline constexpr std::uint32_t kDefaultDim = 256;
/// Retriever size used for FLOPs reporting regardless of which embedder runs.
inline constexpr std::uint64_t kDefaultRetrieverParams = 177'000'000;

struct EmbedderSpec {
  std::string name = "hashed-bow";
  std::uint32_t dim = kDefaultDim;
  std::uint64_t parameter_count = kDefaultRetrieverParams;
};

/// Pluggable text encoder. Implementations must be deterministic and
/// thread-safe for concurrent calls.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual const EmbedderSpec& spec() const = 0;
  virtual EmbeddingVector embed(std::string_view text) const = 0;
};

/// Reference embedder: lowercase, whitespace-tokenize, add one to bucket
/// hash64(token) mod dim per token, then L2-normalize. The norm is summed in
/// double precision in ascending bucket order. Empty text gives the zero vector.
class HashedBowEmbedder final : public Embedder {
 public:
  explicit HashedBowEmbedder(EmbedderSpec spec = {});
  const EmbedderSpec& spec() const override { return spec_; }
  EmbeddingVector embed(std::string_view text) const override;

 private:
  EmbedderSpec spec_;
};

EmbeddingVector embed_text(std::string_view text, const EmbedderSpec& spec);

/// Row-major matrix of embeddings with the passage-id table aligned to rows.
struct EmbeddingMatrix {
  std::uint32_t dim = 0;
  std::vector<std::string> ids;
  std::vector<float> values;

  std::size_t rows() const { return ids.size(); }
  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(values).subspan(i * dim, dim);
  }
  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;
};

EmbeddingMatrix embed_shard(const std::vector<Passage>& passages, const Embedder& embedder);

// Binary layout, all integers and floats little-endian:
//   "TRVE" | u32 version | u32 dim | u64 rows
//   rows x (u32 byte length | UTF-8 passage id)
//   rows*dim x f32 (IEEE-754), row-major
inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;

std::vector<std::byte> encode_embedding_file(const EmbeddingMatrix& m);
/// Throws IntegrityError on bad magic, unknown version, truncation or
/// trailing bytes.
EmbeddingMatrix decode_embedding_file(std::span<const std::byte> bytes);

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes);

}  // namespace trove
