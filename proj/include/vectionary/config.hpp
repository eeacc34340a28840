/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vectionary/embedding_store.hpp"
#include "vectionary/lexicon.hpp"
#include "vectionary/scorer.hpp"
#include "vectionary/sphere_lsq.hpp"
#include "vectionary/validation.hpp"

namespace vectionary {

/**
 * INI-style key-value config with nested sections:
 *
 *   [embeddings]
 *   path = vectors.txt
 *   [lexicon.columns]
 *   care_harm = care_p:care_sent
 *
 * Keys flatten to "section.key". '#' and ';' start comments. Relative paths
 * are resolved against the config file's directory, so a config plus its
 * data files is a relocatable replication artifact.
 */
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_text(const std::string& text, const std::string& base_dir = {});

  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  bool has(const std::string& key) const;

  /// Flag overrides. Overridden path keys stay relative to the process cwd
  /// instead of the config directory.
  void set(const std::string& key, const std::string& value);

  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key) const;  // comma-separated

  /// Resolve a path value against the config file's directory.
  std::string resolve_path(const std::string& value) const;

  /// Path-valued key: config-relative when file-sourced, verbatim when set().
  std::string get_path(const std::string& key, const std::string& fallback = {}) const;

  /// Keys with a given prefix ("lexicon.columns."), suffix part returned.
  std::vector<std::pair<std::string, std::string>> section(const std::string& prefix) const;

  /// Sorted "key = value" dump; hashed into the run manifest.
  std::string canonical() const;

  const std::string& base_dir() const { return base_dir_; }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> overridden_;
  std::string base_dir_;
};

/// Everything a run needs, resolved from config + flag overrides.
struct RunConfig {
  // [embeddings]
  std::string embeddings_path;
  EmbeddingFormat embeddings_format = EmbeddingFormat::glove_text;
  std::size_t vocab_limit = 0;

  // [lexicon]
  std::string lexicon_path;
  LexiconSchema lexicon_schema;
  RelevanceOptions relevance;
  MatchOptions match;

  // foundations = comma list (top level)
  std::vector<FoundationId> foundations;

  // [preprocess]
  PreprocessConfig preprocess;

  // [solver]
  SphereLsqOptions<double> solver;

  // [score]
  std::string corpus_path;
  CorpusFormat corpus_format = CorpusFormat::jsonl;
  bool dedupe_exact_text = true;
  std::string keywords_path;

  // [rank]
  std::string rank_scores_path;
  std::string rank_metric = "strength";
  TieRule tie_rule = TieRule::by_id;

  // [compare]
  std::string benchmark_path;
  std::string method_a_path;
  std::string method_b_path;
  std::string compare_metric = "strength";
  std::vector<int> rbo_depths;
  std::vector<double> rbo_weights;
  bool rbo_extrapolated = true;

  // [bootstrap]
  int resamples = 5000;
  std::optional<std::uint64_t> seed;

  // [io]
  std::string output_dir = ".";
  int workers = 1;

  /// Parse and validate shared fields; command-specific requirements are
  /// checked by the commands themselves.
  static RunConfig from_config(const ConfigFile& file);
};

}  // namespace vectionary
