#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace trove {

struct RawDocument {
  std::string doc_id;
  std::string domain;
  std::string text;
};

struct Passage {
  std::string passage_id;  // "<doc_id>#<6-digit ordinal>"
  std::string domain;
  std::uint32_t shard = 0;
  std::string text;
  std::uint32_t word_count = 0;

  friend bool operator==(const Passage&, const Passage&) = default;
};

inline constexpr std::size_t kDefaultMaxWords = 256;

enum class ShardRule { RoundRobin, Hash };

/// Per-domain shard counts. `default_shards`, when set, covers domains that
/// have no explicit entry; otherwise an unlisted domain is an error.
struct ShardingPlan {
  std::map<std::string, std::uint32_t> shards_per_domain;
  std::optional<std::uint32_t> default_shards;
  ShardRule rule = ShardRule::RoundRobin;

  std::uint32_t shards_for(const std::string& domain) const;
};

std::string make_passage_id(const std::string& doc_id, std::size_t ordinal);

/// Word-aligned fixed-size chunking. Passage text is the chunk's tokens joined
/// by single spaces; every chunk except a document's last has exactly
/// `max_words` tokens.
std::vector<Passage> chunk_corpus(const std::vector<RawDocument>& docs,
                                  std::size_t max_words = kDefaultMaxWords);

/// Populates `shard`. Round-robin assigns the i-th passage of a domain (in
/// input order) to shard i mod m; the hash rule uses hash64(passage_id) mod m.
std::vector<Passage> assign_shards(std::vector<Passage> passages, const ShardingPlan& plan);

// JSON-lines I/O. Corpus lines: {id, domain, text}. Passage lines:
// {pid, domain, shard, text, wc}.
std::vector<RawDocument> read_corpus_jsonl(const std::filesystem::path& path);
void write_corpus_jsonl(const std::filesystem::path& path, const std::vector<RawDocument>& docs);
std::vector<Passage> read_passages_jsonl(const std::filesystem::path& path);
void write_passages_jsonl(const std::filesystem::path& path, const std::vector<Passage>& passages);

}  // namespace trove
