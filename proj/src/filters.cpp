#include "trove/filters.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "trove/errors.hpp"
#include "trove/hash.hpp"
#include "trove/text.hpp"

namespace trove {

Pool make_pool(const std::vector<ScoredDoc>& docs, const TextLookup& lookup) {
  Pool pool;
  pool.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const std::string* t = lookup(docs[i].passage_id);
    if (t == nullptr) throw IntegrityError("no text for passage '" + docs[i].passage_id + "'");
    pool.push_back({docs[i], *t, i, std::nullopt});
  }
  return pool;
}

std::vector<ScoredDoc> pool_docs(const Pool& pool) {
  std::vector<ScoredDoc> out;
  out.reserve(pool.size());
  for (const auto& c : pool) out.push_back(c.doc);
  return out;
}

std::string_view to_string(RemovalReason r) {
  switch (r) {
    case RemovalReason::Duplicate: return "duplicate";
    case RemovalReason::ShortChunk: return "short_chunk";
    case RemovalReason::Contaminated: return "contaminated";
    case RemovalReason::Quality: return "quality";
  }
  return "unknown";
}

void FilterReport::absorb(const FilterReport& later) {
  removed.insert(removed.end(), later.removed.begin(), later.removed.end());
  kept_count = later.kept_count;
}

std::size_t FilterReport::count(RemovalReason r) const {
  return static_cast<std::size_t>(
      std::count_if(removed.begin(), removed.end(), [r](const Removal& x) { return x.reason == r; }));
}

// --- n-grams ---------------------------------------------------------------

namespace {

NGramSet window_fingerprints(const std::vector<std::string>& tokens, std::size_t n) {
  NGramSet out;
  if (n == 0 || tokens.size() < n) return out;
  out.reserve(tokens.size() - n + 1);
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    Hasher64 h;
    for (std::size_t j = 0; j < n; ++j) {
      if (j > 0) h.update(" ");
      h.update(tokens[i + j]);
    }
    out.push_back(h.digest());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool intersects(const NGramSet& a, const NGramSet& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      return true;
    }
  }
  return false;
}

}  // namespace

NGramSet ngram_set(std::string_view text, std::size_t n) {
  if (n < 1) throw ConfigError("n-gram size must be >= 1");
  return window_fingerprints(text::lower_tokens(text), n);
}

double jaccard(const NGramSet& a, const NGramSet& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++inter;
      ++i;
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double jaccard_ngram(std::string_view a, std::string_view b, std::size_t n) {
  return jaccard(ngram_set(a, n), ngram_set(b, n));
}

std::size_t longest_contiguous_overlap(std::string_view doc, std::string_view reference) {
  const auto a = text::lower_tokens(doc);
  const auto b = text::lower_tokens(reference);
  // run[j] = length of the common run ending at a[i-1], b[j-1].
  std::vector<std::size_t> run(b.size() + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = b.size(); j >= 1; --j) {
      run[j] = (a[i - 1] == b[j - 1]) ? run[j - 1] + 1 : 0;
      best = std::max(best, run[j]);
    }
  }
  return best;
}

MinHasher::MinHasher(std::size_t num_perm) {
  if (num_perm < 1) throw ConfigError("MinHash needs at least one permutation");
  salts_.reserve(num_perm);
  for (std::size_t i = 0; i < num_perm; ++i) salts_.push_back(fmix64(0x9e3779b97f4a7c15ULL * (i + 1)));
}

std::vector<std::uint64_t> MinHasher::signature(const NGramSet& grams) const {
  std::vector<std::uint64_t> sig(salts_.size(), std::numeric_limits<std::uint64_t>::max());
  for (std::uint64_t g : grams) {
    for (std::size_t i = 0; i < salts_.size(); ++i) sig[i] = std::min(sig[i], fmix64(g ^ salts_[i]));
  }
  return sig;
}

double MinHasher::estimate(const std::vector<std::uint64_t>& a,
                           const std::vector<std::uint64_t>& b) {
  if (a.size() != b.size() || a.empty()) throw ConfigError("MinHash signatures differ in length");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

// --- deduplication ---------------------------------------------------------

Filtered dedup_retrieved(Pool docs, const DedupConfig& config) {
  if (config.threshold <= 0.0 || config.threshold > 1.0) {
    throw ConfigError("dedup threshold must be in (0, 1]");
  }
  Filtered out;
  Pool survivors;
  for (auto& c : docs) {
    if (text::count_words(c.text) < config.min_words) {
      out.report.removed.push_back({c.doc.passage_id, RemovalReason::ShortChunk});
    } else {
      survivors.push_back(std::move(c));
    }
  }

  auto drop = [&](Candidate& c) {
    out.report.removed.push_back({c.doc.passage_id, RemovalReason::Duplicate});
  };

  switch (config.method) {
    case DedupMethod::Exact: {
      std::unordered_set<std::string> seen;
      for (auto& c : survivors) {
        if (seen.insert(text::join(text::split_whitespace(c.text))).second) {
          out.kept.push_back(std::move(c));
        } else {
          drop(c);
        }
      }
      break;
    }
    case DedupMethod::Jaccard: {
      // Inverted index gram -> surviving docs; only docs sharing a gram can
      // reach a positive threshold, and intersections are counted exactly.
      std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> postings;
      std::vector<std::size_t> kept_sizes;
      std::unordered_map<std::uint32_t, std::size_t> shared;
      for (auto& c : survivors) {
        const auto grams = ngram_set(c.text, config.n);
        shared.clear();
        for (std::uint64_t g : grams) {
          if (auto it = postings.find(g); it != postings.end()) {
            for (std::uint32_t k : it->second) ++shared[k];
          }
        }
        bool dup = false;
        for (const auto& [k, inter] : shared) {
          const double j = static_cast<double>(inter) /
                           static_cast<double>(grams.size() + kept_sizes[k] - inter);
          if (j >= config.threshold) {
            dup = true;
            break;
          }
        }
        if (dup) {
          drop(c);
          continue;
        }
        const auto slot = static_cast<std::uint32_t>(kept_sizes.size());
        kept_sizes.push_back(grams.size());
        for (std::uint64_t g : grams) postings[g].push_back(slot);
        out.kept.push_back(std::move(c));
      }
      break;
    }
    case DedupMethod::MinHash: {
      const MinHasher hasher;
      std::vector<std::vector<std::uint64_t>> kept_sigs;
      for (auto& c : survivors) {
        const auto grams = ngram_set(c.text, config.n);
        auto sig = hasher.signature(grams);
        // An empty gram set has an all-max signature; never call it a duplicate.
        const bool dup = !grams.empty() &&
                         std::any_of(kept_sigs.begin(), kept_sigs.end(), [&](const auto& k) {
                           return MinHasher::estimate(sig, k) >= config.threshold;
                         });
        if (dup) {
          drop(c);
        } else {
          kept_sigs.push_back(std::move(sig));
          out.kept.push_back(std::move(c));
        }
      }
      break;
    }
  }
  out.report.kept_count = out.kept.size();
  return out;
}

// --- decontamination -------------------------------------------------------

DecontaminationMode DecontaminationMode::none() {
  return {DeconVariant::None, 0.8, 13, 32};
}
DecontaminationMode DecontaminationMode::standard() {
  return {DeconVariant::Standard, 0.8, 13, 32};
}
DecontaminationMode DecontaminationMode::aggressive() {
  return {DeconVariant::Aggressive, 0.8, 13, 8};
}

DecontaminationMode DecontaminationMode::from_name(std::string_view name) {
  if (name == "none") return none();
  if (name == "standard") return standard();
  if (name == "aggressive") return aggressive();
  throw ConfigError("decon: unknown mode '" + std::string(name) +
                    "' (expected none, standard or aggressive)");
}

void DecontaminationMode::validate() const {
  if (jaccard_threshold <= 0.0 || jaccard_threshold > 1.0) {
    throw ConfigError("decon.jaccard_threshold must be in (0, 1]");
  }
  if (jaccard_n < 1) throw ConfigError("decon.jaccard_n must be >= 1");
  if (contiguous_n < 1) throw ConfigError("decon.contiguous_n must be >= 1");
}

std::string_view to_string(DeconVariant v) {
  switch (v) {
    case DeconVariant::None: return "none";
    case DeconVariant::Standard: return "standard";
    case DeconVariant::Aggressive: return "aggressive";
  }
  return "unknown";
}

ContaminationCheck::ContaminationCheck(const EvalUnit& unit, DecontaminationMode mode,
                                       TaskKind kind)
    : mode_(mode), kind_(kind) {
  mode_.validate();
  if (mode_.variant == DeconVariant::None) return;
  const std::string& reference = kind_ == TaskKind::Perplexity ? unit.target : unit.question;
  const auto ref_tokens = text::lower_tokens(reference);
  if (mode_.variant == DeconVariant::Standard) {
    reference_jaccard_ = window_fingerprints(ref_tokens, mode_.jaccard_n);
  }
  if (mode_.variant == DeconVariant::Aggressive || kind_ == TaskKind::Perplexity) {
    reference_runs_ = window_fingerprints(ref_tokens, mode_.contiguous_n);
  }
}

bool ContaminationCheck::operator()(std::string_view doc_text) const {
  if (mode_.variant == DeconVariant::None) return false;
  const auto tokens = text::lower_tokens(doc_text);
  if (mode_.variant == DeconVariant::Standard &&
      jaccard(window_fingerprints(tokens, mode_.jaccard_n), reference_jaccard_) >=
          mode_.jaccard_threshold) {
    return true;
  }
  if (mode_.variant == DeconVariant::Aggressive || kind_ == TaskKind::Perplexity) {
    // A shared window of contiguous_n tokens is exactly an overlap >= contiguous_n.
    return intersects(window_fingerprints(tokens, mode_.contiguous_n), reference_runs_);
  }
  return false;
}

Filtered decontaminate(Pool docs, const EvalUnit& unit, const DecontaminationMode& mode,
                       TaskKind kind) {
  const ContaminationCheck contaminated(unit, mode, kind);
  Filtered out;
  for (auto& c : docs) {
    if (contaminated(c.text)) {
      out.report.removed.push_back({c.doc.passage_id, RemovalReason::Contaminated});
    } else {
      out.kept.push_back(std::move(c));
    }
  }
  out.report.kept_count = out.kept.size();
  return out;
}

// --- quality ---------------------------------------------------------------

bool QualityConfig::enabled() const {
  return min_whitespace_tokens > 0 || require_alphanumeric || max_punct_span > 0 ||
         static_cast<bool>(language_predicate);
}

bool passes_quality(std::string_view text, const QualityConfig& config) {
  if (config.min_whitespace_tokens > 0 && text::count_words(text) < config.min_whitespace_tokens) {
    return false;
  }
  if (config.require_alphanumeric &&
      std::none_of(text.begin(), text.end(),
                   [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; })) {
    return false;
  }
  if (config.max_punct_span > 0) {
    std::size_t run = 0;
    for (char c : text) {
      run = std::ispunct(static_cast<unsigned char>(c)) ? run + 1 : 0;
      if (run > config.max_punct_span) return false;
    }
  }
  if (config.language_predicate && !config.language_predicate(text)) return false;
  return true;
}

Filtered quality_filter(Pool docs, const QualityConfig& config) {
  Filtered out;
  for (auto& c : docs) {
    if (passes_quality(c.text, config)) {
      out.kept.push_back(std::move(c));
    } else {
      out.report.removed.push_back({c.doc.passage_id, RemovalReason::Quality});
    }
  }
  out.report.kept_count = out.kept.size();
  return out;
}

}  // namespace trove
