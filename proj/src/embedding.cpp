#include "trove/embedding.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "trove/errors.hpp"
#include "trove/hash.hpp"
#include "trove/text.hpp"

namespace trove {

HashedBowEmbedder::HashedBowEmbedder(EmbedderSpec spec) : spec_(std::move(spec)) {
  if (spec_.dim < 1) throw ConfigError("embedding dim must be >= 1");
}

EmbeddingVector HashedBowEmbedder::embed(std::string_view text) const {
  std::vector<std::uint64_t> counts(spec_.dim, 0);
  for (auto tok : text::split_whitespace(text)) {
    ++counts[hash64(text::ascii_lower(tok)) % spec_.dim];
  }
  double sq = 0.0;
  for (std::uint64_t c : counts) sq += static_cast<double>(c) * static_cast<double>(c);
  EmbeddingVector out(spec_.dim, 0.0f);
  if (sq == 0.0) return out;
  const double norm = std::sqrt(sq);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(counts[i]) / norm);
  }
  return out;
}

EmbeddingVector embed_text(std::string_view text, const EmbedderSpec& spec) {
  return HashedBowEmbedder(spec).embed(text);
}

EmbeddingMatrix embed_shard(const std::vector<Passage>& passages, const Embedder& embedder) {
  EmbeddingMatrix m;
  m.dim = embedder.spec().dim;
  m.ids.reserve(passages.size());
  m.values.reserve(passages.size() * m.dim);
  for (const auto& p : passages) {
    auto v = embedder.embed(p.text);
    if (v.size() != m.dim) throw ConfigError("embedder returned vector of wrong dim");
    m.ids.push_back(p.passage_id);
    m.values.insert(m.values.end(), v.begin(), v.end());
  }
  return m;
}

namespace {

constexpr char kMagic[4] = {'T', 'R', 'V', 'E'};

class Writer {
 public:
  explicit Writer(std::vector<std::byte>& out) : out_(out) {}
  template <typename UInt>
  void uint(UInt v) {
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
      out_.push_back(static_cast<std::byte>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
    }
  }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::byte*>(p);
    out_.insert(out_.end(), b, b + n);
  }

 private:
  std::vector<std::byte>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::byte> in) : in_(in) {}
  template <typename UInt>
  UInt uint() {
    need(sizeof(UInt));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
      v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(UInt);
    return static_cast<UInt>(v);
  }
  std::span<const std::byte> take(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw IntegrityError("embedding file truncated");
  }
  std::span<const std::byte> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::byte> encode_embedding_file(const EmbeddingMatrix& m) {
  if (m.values.size() != m.rows() * m.dim) throw ConfigError("embedding matrix shape mismatch");
  std::vector<std::byte> out;
  Writer w(out);
  w.raw(kMagic, 4);
  w.uint<std::uint32_t>(kEmbeddingFormatVersion);
  w.uint<std::uint32_t>(m.dim);
  w.uint<std::uint64_t>(m.rows());
  for (const auto& id : m.ids) {
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(id.size()));
    w.raw(id.data(), id.size());
  }
  for (float f : m.values) w.uint<std::uint32_t>(std::bit_cast<std::uint32_t>(f));
  return out;
}

EmbeddingMatrix decode_embedding_file(std::span<const std::byte> bytes) {
  Reader r(bytes);
  auto magic = r.take(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw IntegrityError("bad embedding file magic");
  const auto version = r.uint<std::uint32_t>();
  if (version != kEmbeddingFormatVersion) {
    throw IntegrityError("unsupported embedding file version " + std::to_string(version));
  }
  EmbeddingMatrix m;
  m.dim = r.uint<std::uint32_t>();
  const auto rows = r.uint<std::uint64_t>();
  // Each row needs at least 4 bytes of id length plus dim floats.
  if (rows > r.remaining() / (4 + 4ULL * m.dim)) throw IntegrityError("embedding file truncated");
  m.ids.reserve(rows);
  for (std::uint64_t i = 0; i < rows; ++i) {
    const auto len = r.uint<std::uint32_t>();
    auto s = r.take(len);
    m.ids.emplace_back(reinterpret_cast<const char*>(s.data()), s.size());
  }
  m.values.resize(rows * m.dim);
  for (auto& f : m.values) f = std::bit_cast<float>(r.uint<std::uint32_t>());
  if (r.remaining() != 0) throw IntegrityError("trailing bytes after embedding payload");
  return m;
}

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::byte> out(size);
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(size));
  if (!in) throw IntegrityError("short read on " + path.string());
  return out;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("write failed on " + path.string());
}

}  // namespace trove
