/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#include "vectionary/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "vectionary/error.hpp"
#include "vectionary/io_util.hpp"

namespace vectionary {

namespace fs = std::filesystem;

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("FileUnreadable", "cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), fs::path(path).parent_path().string());
}

ConfigFile ConfigFile::parse_text(const std::string& text, const std::string& base_dir) {
  ConfigFile cfg;
  cfg.base_dir_ = base_dir;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#' || sv.front() == ';') continue;
    if (sv.front() == '[') {
      if (sv.back() != ']') {
        throw config_error("MalformedConfig",
                           "line " + std::to_string(line_no) + ": unterminated section header");
      }
      section = std::string(trim(sv.substr(1, sv.size() - 2)));
      if (section.empty()) {
        throw config_error("MalformedConfig",
                           "line " + std::to_string(line_no) + ": empty section name");
      }
      continue;
    }
    std::size_t eq = sv.find('=');
    if (eq == std::string_view::npos) {
      throw config_error("MalformedConfig",
                         "line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = std::string(trim(sv.substr(0, eq)));
    std::string value = std::string(trim(sv.substr(eq + 1)));
    if (key.empty()) {
      throw config_error("MalformedConfig", "line " + std::to_string(line_no) + ": empty key");
    }
    std::string full = section.empty() ? key : section + "." + key;
    cfg.values_[full] = value;
  }
  return cfg;
}

std::optional<std::string> ConfigFile::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string ConfigFile::get_or(const std::string& key, const std::string& fallback) const {
  auto v = get(key);
  return v ? *v : fallback;
}

void ConfigFile::set(const std::string& key, const std::string& value) {
  values_[key] = value;
  overridden_.insert(key);
}

bool ConfigFile::has(const std::string& key) const { return values_.count(key) != 0; }

double ConfigFile::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  auto parsed = parse_double(*v);
  if (!parsed) throw config_error("MalformedConfig", "key '" + key + "' is not a number: " + *v);
  return *parsed;
}

long long ConfigFile::get_int(const std::string& key, long long fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  auto parsed = parse_int(*v);
  if (!parsed) throw config_error("MalformedConfig", "key '" + key + "' is not an integer: " + *v);
  return *parsed;
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  std::string s = ascii_lower(*v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw config_error("MalformedConfig", "key '" + key + "' is not a boolean: " + *v);
}

std::vector<std::string> ConfigFile::get_list(const std::string& key) const {
  std::vector<std::string> out;
  auto v = get(key);
  if (!v) return out;
  for (auto& item : split_delimited(*v, ',')) {
    auto t = std::string(trim(item));
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::string ConfigFile::resolve_path(const std::string& value) const {
  if (value.empty() || base_dir_.empty()) return value;
  fs::path p(value);
  if (p.is_absolute()) return value;
  return (fs::path(base_dir_) / p).string();
}

std::string ConfigFile::get_path(const std::string& key, const std::string& fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  if (overridden_.count(key)) return *v;
  return resolve_path(*v);
}

std::vector<std::pair<std::string, std::string>> ConfigFile::section(
    const std::string& prefix) const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, value] : values_) {
    if (key.size() > prefix.size() && key.compare(0, prefix.size(), prefix) == 0) {
      out.emplace_back(key.substr(prefix.size()), value);
    }
  }
  return out;
}

std::string ConfigFile::canonical() const {
  std::string out;
  for (const auto& [key, value] : values_) {  // std::map: already sorted
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  return out;
}

namespace {

std::vector<FoundationColumns> parse_column_mapping(const ConfigFile& file,
                                                    const std::vector<FoundationId>& foundations) {
  std::vector<FoundationColumns> columns;
  for (const auto& f : foundations) {
    FoundationColumns fc;
    fc.foundation = f;
    // Default convention: <foundation>_p / <foundation>_sent, overridable via
    // [lexicon.columns] <foundation> = <prob_col>:<sent_col>
    fc.probability_column = f.name + "_p";
    fc.sentiment_column = f.name + "_sent";
    if (auto mapped = file.get("lexicon.columns." + f.name)) {
      std::size_t colon = mapped->find(':');
      if (colon == std::string::npos) {
        throw config_error("MalformedConfig",
                           "lexicon.columns." + f.name + " must be '<prob_col>:<sent_col>'");
      }
      fc.probability_column = std::string(trim(std::string_view(*mapped).substr(0, colon)));
      fc.sentiment_column = std::string(trim(std::string_view(*mapped).substr(colon + 1)));
      if (fc.probability_column.empty() || fc.sentiment_column.empty()) {
        throw config_error("MalformedConfig",
                           "lexicon.columns." + f.name + " has an empty column name");
      }
    }
    columns.push_back(std::move(fc));
  }
  return columns;
}

}  // namespace

RunConfig RunConfig::from_config(const ConfigFile& file) {
  RunConfig cfg;

  cfg.embeddings_path = file.get_path("embeddings.path");
  cfg.embeddings_format =
      embedding_format_from_string(file.get_or("embeddings.format", "glove-text"));
  long long limit = file.get_int("embeddings.vocab_limit", 0);
  if (limit < 0) throw config_error("MalformedConfig", "embeddings.vocab_limit must be >= 0");
  cfg.vocab_limit = static_cast<std::size_t>(limit);

  for (const auto& name : file.get_list("foundations")) {
    cfg.foundations.emplace_back(name);
  }
  if (cfg.foundations.empty()) {
    for (const auto& f : canonical_foundations()) cfg.foundations.push_back(f);
  }

  cfg.lexicon_path = file.get_path("lexicon.path");
  cfg.lexicon_schema.word_column = file.get_or("lexicon.word_column", "word");
  std::string delim = file.get_or("lexicon.delimiter", "");
  if (delim == "tab") {
    cfg.lexicon_schema.delimiter = '\t';
  } else if (delim == "comma") {
    cfg.lexicon_schema.delimiter = ',';
  } else if (!delim.empty()) {
    throw config_error("MalformedConfig", "lexicon.delimiter must be 'comma' or 'tab'");
  }
  cfg.lexicon_schema.foundations = parse_column_mapping(file, cfg.foundations);
  std::string dup = file.get_or("lexicon.duplicate_policy", "keep_first");
  if (dup == "error") {
    cfg.lexicon_schema.duplicate_policy = DuplicatePolicy::error;
  } else if (dup == "keep_first") {
    cfg.lexicon_schema.duplicate_policy = DuplicatePolicy::keep_first;
  } else {
    throw config_error("MalformedConfig", "lexicon.duplicate_policy must be 'error' or 'keep_first'");
  }
  std::string rule = file.get_or("lexicon.relevance_rule", "sign");
  if (rule == "sign") {
    cfg.relevance.rule = RelevanceRule::sign;
  } else if (rule == "product") {
    cfg.relevance.rule = RelevanceRule::product;
  } else {
    throw config_error("MalformedConfig", "lexicon.relevance_rule must be 'sign' or 'product'");
  }
  std::string zero = file.get_or("lexicon.zero_sentiment_policy", "positive");
  if (zero == "positive") {
    cfg.relevance.zero_sentiment = ZeroSentimentPolicy::positive;
  } else if (zero == "zero") {
    cfg.relevance.zero_sentiment = ZeroSentimentPolicy::zero;
  } else {
    throw config_error("MalformedConfig",
                       "lexicon.zero_sentiment_policy must be 'positive' or 'zero'");
  }
  cfg.match.case_fold = file.get_bool("lexicon.case_fold", false);

  cfg.preprocess.lowercase = file.get_bool("preprocess.lowercase", true);
  cfg.preprocess.strip_urls = file.get_bool("preprocess.strip_urls", true);
  cfg.preprocess.strip_mentions = file.get_bool("preprocess.strip_mentions", true);
  cfg.preprocess.strip_hash_marks = file.get_bool("preprocess.strip_hash_marks", true);
  if (file.has("preprocess.stopwords_path")) {
    std::string content = read_file(file.get_path("preprocess.stopwords_path"));
    std::istringstream ss(content);
    std::string word;
    while (std::getline(ss, word)) {
      auto t = std::string(trim(word));
      if (!t.empty()) cfg.preprocess.stopwords.insert(ascii_lower(t));
    }
  }

  cfg.solver.max_iterations = static_cast<int>(file.get_int("solver.max_iter", 10000));
  cfg.solver.rel_objective_tol = file.get_double("solver.tol_obj_rel", 1e-10);
  cfg.solver.gradient_tol = file.get_double("solver.tol_grad", 1e-8);
  cfg.solver.extra_basis_starts = static_cast<int>(file.get_int("solver.extra_basis_starts", 0));

  cfg.corpus_path = file.get_path("score.corpus");
  std::string cformat = file.get_or("score.corpus_format", "jsonl");
  if (cformat == "jsonl") {
    cfg.corpus_format = CorpusFormat::jsonl;
  } else if (cformat == "delimited") {
    cfg.corpus_format = CorpusFormat::delimited;
  } else {
    throw config_error("MalformedConfig", "score.corpus_format must be 'jsonl' or 'delimited'");
  }
  cfg.dedupe_exact_text = file.get_bool("score.dedupe_exact_text", true);
  cfg.keywords_path = file.get_path("score.keywords_path");

  cfg.rank_scores_path = file.get_path("rank.scores");
  cfg.rank_metric = file.get_or("rank.metric", "strength");
  cfg.tie_rule = tie_rule_from_string(file.get_or("rank.tie_rule", "by_id"));

  cfg.benchmark_path = file.get_path("compare.benchmark");
  cfg.method_a_path = file.get_path("compare.method_a");
  cfg.method_b_path = file.get_path("compare.method_b");
  cfg.compare_metric = file.get_or("compare.metric", "strength");
  for (const auto& d : file.get_list("compare.depths")) {
    auto parsed = parse_int(d);
    if (!parsed || *parsed < 1) {
      throw config_error("MalformedConfig", "compare.depths entries must be positive integers");
    }
    cfg.rbo_depths.push_back(static_cast<int>(*parsed));
  }
  for (const auto& w : file.get_list("compare.weights")) {
    auto parsed = parse_double(w);
    if (!parsed || !(*parsed > 0.0 && *parsed < 1.0)) {
      throw config_error("MalformedConfig", "compare.weights entries must lie in (0, 1)");
    }
    cfg.rbo_weights.push_back(*parsed);
  }
  cfg.rbo_extrapolated = file.get_bool("compare.extrapolated", true);

  long long resamples = file.get_int("bootstrap.resamples", 5000);
  if (resamples < 1) throw config_error("MalformedConfig", "bootstrap.resamples must be >= 1");
  cfg.resamples = static_cast<int>(resamples);
  if (file.has("bootstrap.seed")) {
    cfg.seed = static_cast<std::uint64_t>(file.get_int("bootstrap.seed", 0));
  }

  cfg.output_dir = file.get_path("io.output_dir", ".");
  long long workers = file.get_int("io.workers", 1);
  if (workers < 1) throw config_error("MalformedConfig", "io.workers must be >= 1");
  cfg.workers = static_cast<int>(workers);

  return cfg;
}

}  // namespace vectionary
