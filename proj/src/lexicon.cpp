/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#include "vectionary/lexicon.hpp"

#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "vectionary/error.hpp"
#include "vectionary/io_util.hpp"

namespace vectionary {

const std::vector<FoundationId>& canonical_foundations() {
  static const std::vector<FoundationId> kFoundations = {
      FoundationId("care_harm"),      FoundationId("fairness_cheating"),
      FoundationId("loyalty_betrayal"), FoundationId("authority_subversion"),
      FoundationId("sanctity_degradation"),
  };
  return kFoundations;
}

const FoundationWeight* LexiconEntry::find(const FoundationId& foundation) const {
  for (const auto& [id, weight] : weights) {
    if (id == foundation) return &weight;
  }
  return nullptr;
}

namespace {

double parse_bounded(const std::string& raw, double lo, double hi, const std::string& word,
                     const std::string& column, std::size_t line_no) {
  auto value = parse_double(raw);
  if (!value) {
    throw format_error("ValueUnparsable",
                       "line " + std::to_string(line_no) + ", column '" + column +
                           "', word '" + word + "': cannot parse '" + raw + "'");
  }
  if (*value < lo || *value > hi) {
    throw domain_error("ValueOutOfRange",
                       "line " + std::to_string(line_no) + ", column '" + column +
                           "', word '" + word + "': " + raw + " outside [" +
                           format_double(lo) + ", " + format_double(hi) + "]");
  }
  return *value;
}

}  // namespace

std::vector<LexiconEntry> load_lexicon(const std::string& path, const LexiconSchema& schema,
                                       LexiconLoadReport* report) {
  std::ifstream in(path);
  if (!in) throw io_error("FileUnreadable", "cannot open lexicon: " + path);
  if (schema.foundations.empty()) {
    throw config_error("EmptySchema", "lexicon schema maps no foundation columns");
  }

  std::string line;
  if (!std::getline(in, line)) {
    throw format_error("MalformedHeader", "lexicon file has no header row: " + path);
  }
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();

  char delimiter = schema.delimiter ? schema.delimiter : sniff_delimiter(line);
  std::vector<std::string> header = split_delimited(line, delimiter);
  std::unordered_map<std::string, std::size_t> column_index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    column_index.emplace(std::string(trim(header[i])), i);
  }

  auto require_column = [&](const std::string& name) -> std::size_t {
    auto it = column_index.find(name);
    if (it == column_index.end()) {
      throw domain_error("MissingColumn", "lexicon is missing column '" + name + "'");
    }
    return it->second;
  };

  std::size_t word_col = require_column(schema.word_column);
  struct MappedColumns {
    FoundationId foundation;
    std::size_t p_col;
    std::size_t v_col;
  };
  std::vector<MappedColumns> mapped;
  mapped.reserve(schema.foundations.size());
  for (const auto& fc : schema.foundations) {
    mapped.push_back({fc.foundation, require_column(fc.probability_column),
                      require_column(fc.sentiment_column)});
  }

  std::vector<LexiconEntry> entries;
  std::unordered_set<std::string> seen;
  LexiconLoadReport local_report;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (trim(line).empty()) continue;
    ++local_report.rows_read;

    std::vector<std::string> fields = split_delimited(line, delimiter);
    if (fields.size() != header.size()) {
      throw format_error("RowShapeMismatch",
                         path + " line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
    }

    LexiconEntry entry;
    entry.word = std::string(trim(fields[word_col]));
    if (entry.word.empty()) {
      throw format_error("RowShapeMismatch",
                         path + " line " + std::to_string(line_no) + ": empty word field");
    }
    if (!seen.insert(entry.word).second) {
      if (schema.duplicate_policy == DuplicatePolicy::error) {
        throw domain_error("DuplicateWord",
                           path + " line " + std::to_string(line_no) + ": duplicate word '" +
                               entry.word + "'");
      }
      ++local_report.duplicates_skipped;
      continue;
    }
    entry.weights.reserve(mapped.size());
    for (const auto& mc : mapped) {
      FoundationWeight w;
      w.probability = parse_bounded(fields[mc.p_col], 0.0, 1.0, entry.word,
                                    header[mc.p_col], line_no);
      w.sentiment = parse_bounded(fields[mc.v_col], -1.0, 1.0, entry.word,
                                  header[mc.v_col], line_no);
      entry.weights.emplace_back(mc.foundation, w);
    }
    entries.push_back(std::move(entry));
  }

  if (report) *report = local_report;
  return entries;
}

double observed_relevance(const LexiconEntry& entry, const FoundationId& foundation,
                          const RelevanceOptions& options) {
  const FoundationWeight* w = entry.find(foundation);
  if (!w) {
    throw domain_error("MissingColumn",
                       "word '" + entry.word + "' carries no weights for foundation '" +
                           foundation.name + "'");
  }
  if (options.rule == RelevanceRule::product) {
    return w->probability * w->sentiment;
  }
  if (w->sentiment == 0.0 && options.zero_sentiment == ZeroSentimentPolicy::zero) {
    return 0.0;
  }
  return w->sentiment < 0.0 ? -w->probability : w->probability;
}

std::pair<RelevanceTable, CoverageReport> build_relevance_table(
    const std::vector<LexiconEntry>& entries, const FoundationId& foundation,
    const EmbeddingStore& store, const MatchOptions& match,
    const RelevanceOptions& relevance) {
  RelevanceTable table;
  table.foundation = foundation;
  CoverageReport coverage;

  // Folded index is built once, only when fold matching is on. First
  // occurrence wins, mirroring the store's duplicate policy.
  std::unordered_map<std::string, Eigen::Index> folded;
  if (match.case_fold) {
    const auto& tokens = store.tokens();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      folded.emplace(ascii_lower(tokens[i]), static_cast<Eigen::Index>(i));
    }
  }

  std::unordered_set<Eigen::Index> used_rows;
  for (const auto& entry : entries) {
    std::optional<Eigen::Index> idx = store.find(entry.word);
    if (!idx && match.case_fold) {
      auto it = folded.find(ascii_lower(entry.word));
      if (it != folded.end()) idx = it->second;
    }
    if (!idx) {
      coverage.dropped.emplace_back(entry.word, "not_in_vocabulary");
      continue;
    }
    // Two lexicon spellings can fold onto one vocabulary row; keep the first.
    if (!used_rows.insert(*idx).second) {
      coverage.dropped.emplace_back(entry.word, "duplicate_after_fold");
      continue;
    }
    double s = observed_relevance(entry, foundation, relevance);
    table.entries.emplace_back(store.tokens()[static_cast<std::size_t>(*idx)], s);
    ++coverage.matched;
  }

  if (table.entries.empty()) {
    throw domain_error("EmptyIntersection",
                       "no lexicon word for foundation '" + foundation.name +
                           "' is present in the embedding vocabulary");
  }
  return {std::move(table), std::move(coverage)};
}

void write_coverage_report(const CoverageReport& report, std::ostream& out) {
  out << "word,reason\n";
  for (const auto& [word, reason] : report.dropped) {
    out << join_delimited({word, reason}, ',') << '\n';
  }
}

}  // namespace vectionary
