/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#pragma once

#include <Eigen/Core>

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include "vectionary/axis_fit.hpp"
#include "vectionary/embedding_store.hpp"

namespace vectionary {

struct PreprocessConfig {
  bool lowercase = true;
  bool strip_urls = true;        // drop http://, https://, www. chunks wholesale
  bool strip_mentions = true;    // drop @... chunks wholesale
  bool strip_hash_marks = true;  // '#care' -> 'care'
  std::unordered_set<std::string> stopwords;  // empty = keep everything
};

/// Deterministic tokenizer: lowercase, strip URLs/mentions/'#', split on
/// non-alphanumeric ASCII, drop empties. Every step is toggleable.
std::vector<std::string> preprocess(std::string_view text, const PreprocessConfig& config = {});

struct Document {
  std::string id;
  std::string text;
  std::string meta;  // opaque passthrough (serialized JSON or empty)
};

struct DocumentScores {
  std::string id;
  FoundationId foundation;
  std::size_t matched_tokens = 0;  // n: tokens found in the embedding vocabulary
  std::size_t total_tokens = 0;
  std::optional<double> strength;     // mean |cos|, in [0, 1]
  std::optional<double> valence;      // mean cos, in [-1, 1]
  std::optional<double> ambivalence;  // population variance of cos, in [0, 1]

  std::optional<double> coverage() const {
    if (total_tokens == 0) return std::nullopt;
    return static_cast<double>(matched_tokens) / static_cast<double>(total_tokens);
  }
};

struct FoundationMetrics {
  double strength = 0.0;
  double valence = 0.0;
  double ambivalence = 0.0;
};

/// Metrics from a vector of token projections c_i = cos(theta_i):
///   strength    = mean |c|
///   valence     = mean c
///   ambivalence = mean (c - valence)^2
FoundationMetrics document_metrics(const Eigen::Ref<const Eigen::VectorXd>& projections);

/// Score one tokenized document against one axis. n = 0 yields absent
/// metrics (unmeasurable), never zeros.
DocumentScores score_document(const std::vector<std::string>& tokens,
                              const EmbeddingStore& store, const MoralAxis& axis);

/// True when any preprocessed token of the document is in the keyword set.
bool keyword_match(const std::vector<std::string>& tokens,
                   const std::unordered_set<std::string>& keywords_folded);

std::unordered_set<std::string> fold_keywords(const std::vector<std::string>& keywords);

enum class CorpusFormat { jsonl, delimited };

struct CorpusOptions {
  CorpusFormat format = CorpusFormat::jsonl;
  PreprocessConfig preprocess;
  bool dedupe_exact_text = true;
  std::vector<std::string> keywords;  // empty = no filtering
};

struct CorpusStats {
  std::size_t documents_read = 0;
  std::size_t documents_scored = 0;
  std::size_t rejected = 0;
  std::size_t duplicate_ids = 0;
  std::size_t duplicate_texts = 0;
  std::size_t filtered_out = 0;
  std::size_t empty_projection_docs = 0;  // rows emitted with n = 0
};

extern const char* const kScoresHeader;  // id,foundation,n,coverage,strength,valence,ambivalence

std::string format_score_row(const DocumentScores& scores);

/**
 * Stream a corpus, score every document against every axis, and emit one
 * CSV row per (document, axis). Token row lookups happen once per document
 * and are reused across axes. Per-line parse failures go to the reject
 * stream as JSONL records; the run continues.
 */
CorpusStats score_corpus(std::istream& corpus, const EmbeddingStore& store,
                         const std::vector<MoralAxis>& axes, const CorpusOptions& options,
                         std::ostream& scores_out, std::ostream& rejects_out);

}  // namespace vectionary
