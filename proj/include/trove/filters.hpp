#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "trove/pool.hpp"

namespace trove {

enum class RemovalReason { Duplicate, ShortChunk, Contaminated, Quality };

std::string_view to_string(RemovalReason r);

struct Removal {
  std::string passage_id;
  RemovalReason reason;

  friend bool operator==(const Removal&, const Removal&) = default;
};

struct FilterReport {
  std::vector<Removal> removed;
  std::size_t kept_count = 0;

  /// Appends the removals of a later stage; kept_count becomes the later
  /// stage's.
  void absorb(const FilterReport& later);
  std::size_t count(RemovalReason r) const;
};

struct Filtered {
  Pool kept;
  FilterReport report;
};

// --- n-grams ---------------------------------------------------------------

/// Sorted, unique 64-bit fingerprints of every window of n lowercased
/// whitespace tokens (hash64 of the window joined by single spaces). Empty
/// when the text has fewer than n tokens.
using NGramSet = std::vector<std::uint64_t>;

NGramSet ngram_set(std::string_view text, std::size_t n);
/// |a ∩ b| / |a ∪ b|, or 0 when both are empty.
double jaccard(const NGramSet& a, const NGramSet& b);
double jaccard_ngram(std::string_view a, std::string_view b, std::size_t n = 13);

/// Length in tokens of the longest common contiguous run of lowercased
/// whitespace tokens.
std::size_t longest_contiguous_overlap(std::string_view doc, std::string_view reference);

/// 128-permutation MinHash signature over an n-gram set.
class MinHasher {
 public:
  explicit MinHasher(std::size_t num_perm = 128);
  std::vector<std::uint64_t> signature(const NGramSet& grams) const;
  /// Fraction of agreeing slots; estimates Jaccard with standard error
  /// sqrt(J(1-J)/num_perm).
  static double estimate(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b);

 private:
  std::vector<std::uint64_t> salts_;
};

// --- deduplication ---------------------------------------------------------

enum class DedupMethod {
  Jaccard,  // exact pairwise n-gram Jaccard (default)
  MinHash,  // approximate Jaccard via MinHasher
  Exact,    // identical whitespace-token sequence
};

struct DedupConfig {
  DedupMethod method = DedupMethod::Jaccard;
  double threshold = 0.8;
  std::size_t n = 13;
  std::size_t min_words = 13;  // docs with fewer words are dropped as short_chunk
};

/// Drops short chunks, then sweeps in rank order: a doc survives unless it
/// duplicates an already surviving (higher-ranked) doc. Order is preserved.
Filtered dedup_retrieved(Pool docs, const DedupConfig& config = {});

// --- decontamination -------------------------------------------------------

enum class DeconVariant { None, Standard, Aggressive };
enum class TaskKind { Perplexity, Downstream };

struct DecontaminationMode {
  DeconVariant variant = DeconVariant::Standard;
  double jaccard_threshold = 0.8;
  std::size_t jaccard_n = 13;
  std::size_t contiguous_n = 32;

  static DecontaminationMode none();
  static DecontaminationMode standard();
  static DecontaminationMode aggressive();
  static DecontaminationMode from_name(std::string_view name);
  void validate() const;
};

std::string_view to_string(DeconVariant v);

/// Evaluation data a retrieved document is compared against.
struct EvalUnit {
  std::string question;
  std::vector<std::string> answers;
  std::string target;  // perplexity continuation
};

/// Contamination predicate for one evaluation unit. Standard mode: n-gram
/// Jaccard >= threshold against the question (downstream) or the target
/// (perplexity), and for perplexity also a contiguous overlap of at least
/// contiguous_n tokens with the target. Aggressive mode: contiguous overlap of
/// at least contiguous_n tokens with the same reference. None: never.
class ContaminationCheck {
 public:
  ContaminationCheck(const EvalUnit& unit, DecontaminationMode mode, TaskKind kind);
  bool operator()(std::string_view doc_text) const;

 private:
  DecontaminationMode mode_;
  TaskKind kind_;
  NGramSet reference_jaccard_;
  std::vector<std::uint64_t> reference_runs_;  // sorted contiguous_n-gram fingerprints
};

Filtered decontaminate(Pool docs, const EvalUnit& unit, const DecontaminationMode& mode,
                       TaskKind kind);

// --- quality ---------------------------------------------------------------

struct QualityConfig {
  std::size_t min_whitespace_tokens = 0;  // 0 disables
  bool require_alphanumeric = false;
  std::size_t max_punct_span = 0;  // longest allowed run of ASCII punctuation; 0 disables
  std::function<bool(std::string_view)> language_predicate;  // empty = accept all

  bool enabled() const;
};

bool passes_quality(std::string_view text, const QualityConfig& config);
Filtered quality_filter(Pool docs, const QualityConfig& config);

}  // namespace trove
