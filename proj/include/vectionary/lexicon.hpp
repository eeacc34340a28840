/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vectionary/embedding_store.hpp"

namespace vectionary {

/// Foundation identifiers. The five canonical moral foundations are provided
/// as constants; any nonempty string is a valid user-defined id (e.g. a
/// liberty_oppression lexicon, or a different latent feature entirely).
struct FoundationId {
  std::string name;

  FoundationId() = default;
  explicit FoundationId(std::string n) : name(std::move(n)) {}

  bool operator==(const FoundationId& other) const = default;
  auto operator<=>(const FoundationId& other) const = default;
};

const std::vector<FoundationId>& canonical_foundations();

struct FoundationWeight {
  double probability = 0.0;  // in [0, 1]
  double sentiment = 0.0;    // in [-1, 1]
};

/// One dictionary word with its per-foundation (probability, sentiment).
struct LexiconEntry {
  std::string word;
  std::vector<std::pair<FoundationId, FoundationWeight>> weights;

  const FoundationWeight* find(const FoundationId& foundation) const;
};

enum class DuplicatePolicy { error, keep_first };
enum class RelevanceRule { sign, product };
enum class ZeroSentimentPolicy { positive, zero };

struct RelevanceOptions {
  RelevanceRule rule = RelevanceRule::sign;
  ZeroSentimentPolicy zero_sentiment = ZeroSentimentPolicy::positive;
};

/// Column mapping for one foundation in a delimited lexicon file.
struct FoundationColumns {
  FoundationId foundation;
  std::string probability_column;
  std::string sentiment_column;
};

struct LexiconSchema {
  std::string word_column = "word";
  char delimiter = 0;  // 0 = sniff from the header line (tab beats comma)
  std::vector<FoundationColumns> foundations;
  DuplicatePolicy duplicate_policy = DuplicatePolicy::keep_first;
};

struct LexiconLoadReport {
  std::size_t rows_read = 0;
  std::size_t duplicates_skipped = 0;
};

/// Parse a delimited lexicon file with a header row. Throws MissingColumn if
/// a mapped column is absent, ValueOutOfRange if p is outside [0,1] or v
/// outside [-1,1], DuplicateWord under DuplicatePolicy::error.
std::vector<LexiconEntry> load_lexicon(const std::string& path, const LexiconSchema& schema,
                                       LexiconLoadReport* report = nullptr);

/// Observed relevance s for one (word, foundation):
///   sign rule:    s = sign(v) * p, with sign(0) decided by the zero policy
///   product rule: s = p * v      (kept for sensitivity analysis)
double observed_relevance(const LexiconEntry& entry, const FoundationId& foundation,
                          const RelevanceOptions& options = {});

struct RelevanceTable {
  FoundationId foundation;
  std::vector<std::pair<std::string, double>> entries;  // (word, s)
};

struct CoverageReport {
  std::size_t matched = 0;
  std::vector<std::pair<std::string, std::string>> dropped;  // (word, reason)

  double coverage() const {
    std::size_t total = matched + dropped.size();
    return total == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(total);
  }
};

struct MatchOptions {
  bool case_fold = false;  // ASCII fold on both sides when exact match fails
};

/// Restrict a lexicon to words present in the embedding vocabulary and attach
/// their observed relevances. Throws EmptyIntersection when nothing matches.
std::pair<RelevanceTable, CoverageReport> build_relevance_table(
    const std::vector<LexiconEntry>& entries, const FoundationId& foundation,
    const EmbeddingStore& store, const MatchOptions& match = {},
    const RelevanceOptions& relevance = {});

void write_coverage_report(const CoverageReport& report, std::ostream& out);

}  // namespace vectionary

template <>
struct std::hash<vectionary::FoundationId> {
  std::size_t operator()(const vectionary::FoundationId& f) const noexcept {
    return std::hash<std::string>{}(f.name);
  }
};
