/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#include "vectionary/scorer.hpp"

#include "json.hpp"

#include "vectionary/error.hpp"
#include "vectionary/io_util.hpp"

namespace vectionary {

using nlohmann::json;

namespace {

inline bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

bool chunk_is_url(std::string_view chunk) {
  return chunk.starts_with("http://") || chunk.starts_with("https://") ||
         chunk.starts_with("www.");
}

}  // namespace

std::vector<std::string> preprocess(std::string_view text, const PreprocessConfig& config) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  std::string lowered;
  while (pos < text.size()) {
    while (pos < text.size() && is_space(text[pos])) ++pos;
    if (pos >= text.size()) break;
    std::size_t end = pos;
    while (end < text.size() && !is_space(text[end])) ++end;
    std::string_view chunk = text.substr(pos, end - pos);
    pos = end;

    if (config.lowercase) {
      lowered = ascii_lower(chunk);
      chunk = lowered;
    }
    if (config.strip_urls && chunk_is_url(chunk)) continue;
    if (config.strip_mentions && !chunk.empty() && chunk.front() == '@') continue;

    std::string current;
    for (char c : chunk) {
      if (config.strip_hash_marks && c == '#') continue;
      if (is_ascii_alnum(c)) {
        current.push_back(c);
      } else if (!current.empty()) {
        if (config.stopwords.empty() || !config.stopwords.count(current)) {
          tokens.push_back(std::move(current));
        }
        current.clear();
      }
    }
    if (!current.empty() && (config.stopwords.empty() || !config.stopwords.count(current))) {
      tokens.push_back(std::move(current));
    }
  }
  return tokens;
}

FoundationMetrics document_metrics(const Eigen::Ref<const Eigen::VectorXd>& projections) {
  if (projections.size() == 0) {
    throw domain_error("EmptyProjection", "metrics undefined for zero projections");
  }
  FoundationMetrics m;
  m.strength = projections.cwiseAbs().mean();
  m.valence = projections.mean();
  m.ambivalence = (projections.array() - m.valence).square().mean();
  return m;
}

DocumentScores score_document(const std::vector<std::string>& tokens,
                              const EmbeddingStore& store, const MoralAxis& axis) {
  if (axis.direction.size() != store.dim()) {
    throw domain_error("DimMismatch",
                       "axis dim " + std::to_string(axis.direction.size()) +
                           " vs store dim " + std::to_string(store.dim()));
  }
  DocumentScores scores;
  scores.foundation = axis.foundation;
  scores.total_tokens = tokens.size();

  Eigen::VectorXd projections(static_cast<Eigen::Index>(tokens.size()));
  Eigen::Index n = 0;
  for (const auto& token : tokens) {
    if (auto idx = store.find(token)) {
      projections(n++) = store.matrix().row(*idx).dot(axis.direction);
    }
  }
  scores.matched_tokens = static_cast<std::size_t>(n);
  if (n > 0) {
    FoundationMetrics m = document_metrics(projections.head(n));
    scores.strength = m.strength;
    scores.valence = m.valence;
    scores.ambivalence = m.ambivalence;
  }
  return scores;
}

bool keyword_match(const std::vector<std::string>& tokens,
                   const std::unordered_set<std::string>& keywords_folded) {
  for (const auto& token : tokens) {
    if (keywords_folded.count(ascii_lower(token))) return true;
  }
  return false;
}

std::unordered_set<std::string> fold_keywords(const std::vector<std::string>& keywords) {
  if (keywords.empty()) {
    throw domain_error("EmptyKeywordList", "keyword filter requires at least one keyword");
  }
  std::unordered_set<std::string> folded;
  for (const auto& k : keywords) {
    auto t = std::string(trim(k));
    if (!t.empty()) folded.insert(ascii_lower(t));
  }
  if (folded.empty()) {
    throw domain_error("EmptyKeywordList", "keyword filter requires at least one keyword");
  }
  return folded;
}

const char* const kScoresHeader = "id,foundation,n,coverage,strength,valence,ambivalence";

std::string format_score_row(const DocumentScores& s) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  return join_delimited({s.id, s.foundation.name, std::to_string(s.matched_tokens),
                         opt(s.coverage()), opt(s.strength), opt(s.valence),
                         opt(s.ambivalence)},
                        ',');
}

namespace {

struct ParsedDoc {
  Document doc;
  bool ok = false;
  std::string error;
};

ParsedDoc parse_jsonl_line(const std::string& line) {
  ParsedDoc out;
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    out.error = "invalid JSON object";
    return out;
  }
  if (!j.contains("id") || !j.contains("text")) {
    out.error = "missing required field 'id' or 'text'";
    return out;
  }
  if (!j["id"].is_string() || !j["text"].is_string()) {
    out.error = "'id' and 'text' must be strings";
    return out;
  }
  out.doc.id = j["id"].get<std::string>();
  out.doc.text = j["text"].get<std::string>();
  if (j.contains("meta")) out.doc.meta = j["meta"].dump();
  out.ok = true;
  return out;
}

// Exact-text dedupe key: two independent 64-bit FNV streams. 128 combined
// bits make a false duplicate implausible at corpus scale without keeping
// the texts in memory.
struct TextKey {
  std::uint64_t a, b;
  bool operator==(const TextKey&) const = default;
};
struct TextKeyHash {
  std::size_t operator()(const TextKey& k) const noexcept { return k.a ^ (k.b * 0x9e3779b97f4a7c15ULL); }
};

}  // namespace

CorpusStats score_corpus(std::istream& corpus, const EmbeddingStore& store,
                         const std::vector<MoralAxis>& axes, const CorpusOptions& options,
                         std::ostream& scores_out, std::ostream& rejects_out) {
  for (const auto& axis : axes) {
    if (axis.direction.size() != store.dim()) {
      throw domain_error("DimMismatch",
                         "axis '" + axis.foundation.name + "' dim " +
                             std::to_string(axis.direction.size()) + " vs store dim " +
                             std::to_string(store.dim()));
    }
  }

  std::unordered_set<std::string> keyword_set;
  if (!options.keywords.empty()) keyword_set = fold_keywords(options.keywords);

  CorpusStats stats;
  std::unordered_set<std::string> seen_ids;
  std::unordered_set<TextKey, TextKeyHash> seen_texts;

  scores_out << kScoresHeader << '\n';

  auto reject = [&](std::size_t line_no, const std::string& reason, const std::string& raw) {
    json r;
    r["line"] = line_no;
    r["error"] = reason;
    r["raw"] = raw;
    rejects_out << r.dump() << '\n';
    ++stats.rejected;
  };

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  std::size_t id_col = 0, text_col = 0;
  char delimiter = ',';
  bool have_header = false;

  std::vector<Eigen::Index> rows;
  Eigen::VectorXd projections;

  while (std::getline(corpus, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;

    Document doc;
    if (options.format == CorpusFormat::jsonl) {
      ParsedDoc parsed = parse_jsonl_line(line);
      if (!parsed.ok) {
        reject(line_no, parsed.error, line);
        continue;
      }
      doc = std::move(parsed.doc);
    } else {
      if (!have_header) {
        delimiter = sniff_delimiter(line);
        header = split_delimited(line, delimiter);
        auto find_col = [&](std::string_view name) -> std::optional<std::size_t> {
          for (std::size_t i = 0; i < header.size(); ++i) {
            if (trim(header[i]) == name) return i;
          }
          return std::nullopt;
        };
        auto id_idx = find_col("id");
        auto text_idx = find_col("text");
        if (!id_idx || !text_idx) {
          throw format_error("MalformedHeader",
                             "delimited corpus header must contain 'id' and 'text'");
        }
        id_col = *id_idx;
        text_col = *text_idx;
        have_header = true;
        continue;
      }
      auto fields = split_delimited(line, delimiter);
      if (fields.size() != header.size()) {
        reject(line_no, "field count mismatch", line);
        continue;
      }
      doc.id = fields[id_col];
      doc.text = fields[text_col];
    }
    ++stats.documents_read;

    if (doc.id.empty()) {
      reject(line_no, "empty document id", line);
      continue;
    }
    if (!seen_ids.insert(doc.id).second) {
      reject(line_no, "duplicate document id: " + doc.id, line);
      ++stats.duplicate_ids;
      continue;
    }
    if (options.dedupe_exact_text) {
      TextKey key{fnv1a64(doc.text), fnv1a64(doc.text, 0x84222325cbf29ce4ULL)};
      if (!seen_texts.insert(key).second) {
        ++stats.duplicate_texts;
        continue;
      }
    }

    std::vector<std::string> tokens = preprocess(doc.text, options.preprocess);
    if (!keyword_set.empty() && !keyword_match(tokens, keyword_set)) {
      ++stats.filtered_out;
      continue;
    }

    // Row lookups once per document, shared across axes.
    rows.clear();
    for (const auto& token : tokens) {
      if (auto idx = store.find(token)) rows.push_back(*idx);
    }

    bool any_empty = rows.empty();
    for (const auto& axis : axes) {
      DocumentScores scores;
      scores.id = doc.id;
      scores.foundation = axis.foundation;
      scores.total_tokens = tokens.size();
      scores.matched_tokens = rows.size();
      if (!rows.empty()) {
        projections.resize(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) {
          projections(static_cast<Eigen::Index>(k)) =
              store.matrix().row(rows[k]).dot(axis.direction);
        }
        FoundationMetrics m = document_metrics(projections);
        scores.strength = m.strength;
        scores.valence = m.valence;
        scores.ambivalence = m.ambivalence;
      }
      scores_out << format_score_row(scores) << '\n';
    }
    if (any_empty) ++stats.empty_projection_docs;
    ++stats.documents_scored;
  }
  return stats;
}

}  // namespace vectionary
