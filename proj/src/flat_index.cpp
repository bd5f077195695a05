#include "trove/flat_index.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "trove/errors.hpp"
#include "trove/hash.hpp"

namespace trove {

using nlohmann::json;

double inner_product(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

ShardIndex::ShardIndex(EmbeddingMatrix payload, std::string domain, std::uint32_t shard)
    : payload_(std::move(payload)), domain_(std::move(domain)), shard_(shard) {
  if (payload_.values.size() != payload_.rows() * payload_.dim) {
    throw ConfigError("index payload has " + std::to_string(payload_.values.size()) +
                      " floats, expected rows*dim = " +
                      std::to_string(payload_.rows() * payload_.dim));
  }
  std::unordered_set<std::string_view> seen;
  seen.reserve(payload_.ids.size());
  for (const auto& id : payload_.ids) {
    if (!seen.insert(id).second) {
      throw ConfigError("duplicate passage id '" + id + "' in shard " + domain_ + "/" +
                        std::to_string(shard_));
    }
  }
}

std::vector<ScoredDoc> ShardIndex::search(std::span<const float> query, std::size_t K) const {
  if (query.size() != payload_.dim) {
    throw ConfigError("query dim " + std::to_string(query.size()) + " != index dim " +
                      std::to_string(payload_.dim));
  }
  if (K < 1) throw ConfigError("K must be >= 1");
  const std::size_t n = rows();
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) scores[i] = inner_product(query, payload_.row(i));

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  auto better = [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return payload_.ids[a] < payload_.ids[b];
  };
  const std::size_t take = std::min(K, n);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    better);

  std::vector<ScoredDoc> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back({payload_.ids[order[i]], scores[order[i]], domain_, shard_});
  }
  return out;
}

ShardIndex build_index(EmbeddingMatrix payload, std::string domain, std::uint32_t shard) {
  return ShardIndex(std::move(payload), std::move(domain), shard);
}

std::vector<ScoredDoc> search_shard(const ShardIndex& index, std::span<const float> query,
                                    std::size_t K) {
  return index.search(query, K);
}

std::string index_stem(const std::string& domain, std::uint32_t shard) {
  if (domain.empty() || domain.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("domain '" + domain + "' cannot be used in a file name");
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04u", shard);
  return domain + "." + buf;
}

IndexManifest save_index(const ShardIndex& index, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto stem = index_stem(index.domain(), index.shard());
  const auto bytes = encode_embedding_file(index.payload());
  write_file_bytes(dir / (stem + ".trve"), bytes);

  IndexManifest m{index.domain(), index.shard(), index.dim(), index.rows(), hash64(bytes)};
  json j{{"domain", m.domain},
         {"shard", m.shard},
         {"dim", m.dim},
         {"rows", m.rows},
         {"checksum", to_hex(m.checksum)}};
  std::ofstream out(dir / (stem + ".json"), std::ios::trunc);
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("cannot write manifest for " + stem);
  return m;
}

ShardIndex load_index(const std::filesystem::path& trve_file) {
  auto sidecar = trve_file;
  sidecar.replace_extension(".json");
  std::ifstream in(sidecar);
  if (!in) throw IntegrityError("missing index manifest " + sidecar.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw IntegrityError("unreadable index manifest " + sidecar.string() + ": " + e.what());
  }
  const auto bytes = read_file_bytes(trve_file);
  const auto expected = j.at("checksum").get<std::string>();
  if (to_hex(hash64(bytes)) != expected) {
    throw IntegrityError("checksum mismatch for " + trve_file.string() + " (manifest " +
                         expected + ", file " + to_hex(hash64(bytes)) + ")");
  }
  auto payload = decode_embedding_file(bytes);
  if (payload.dim != j.at("dim").get<std::uint32_t>() ||
      payload.rows() != j.at("rows").get<std::uint64_t>()) {
    throw IntegrityError("index " + trve_file.string() + " disagrees with its manifest");
  }
  return ShardIndex(std::move(payload), j.at("domain").get<std::string>(),
                    j.at("shard").get<std::uint32_t>());
}

std::vector<ShardIndex> load_index_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".trve") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ShardIndex> out;
  for (const auto& f : files) out.push_back(load_index(f));
  std::sort(out.begin(), out.end(), [](const ShardIndex& a, const ShardIndex& b) {
    if (a.domain() != b.domain()) return a.domain() < b.domain();
    return a.shard() < b.shard();
  });
  return out;
}

}  // namespace trove
