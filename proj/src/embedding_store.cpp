/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#include "vectionary/embedding_store.hpp"

#include <bit>
#include <charconv>
#include <fstream>

#include "vectionary/error.hpp"
#include "vectionary/io_util.hpp"

namespace vectionary {

std::string to_string(EmbeddingFormat format) {
  switch (format) {
    case EmbeddingFormat::word2vec_binary: return "word2vec-binary";
    case EmbeddingFormat::word2vec_text: return "word2vec-text";
    case EmbeddingFormat::glove_text: return "glove-text";
  }
  return "unknown";
}

EmbeddingFormat embedding_format_from_string(std::string_view name) {
  if (name == "word2vec-binary") return EmbeddingFormat::word2vec_binary;
  if (name == "word2vec-text") return EmbeddingFormat::word2vec_text;
  if (name == "glove-text") return EmbeddingFormat::glove_text;
  throw config_error("UnknownFormat", "unknown embedding format: " + std::string(name));
}

namespace {
constexpr double kZeroNormFloor = 1e-12;
}  // namespace

// Accumulates accepted rows; normalization happens at accept time.
class EmbeddingStoreBuilder {
 public:
  explicit EmbeddingStoreBuilder(std::size_t vocab_limit) : vocab_limit_(vocab_limit) {}

  bool full() const { return vocab_limit_ != 0 && tokens_.size() >= vocab_limit_; }

  void accept(std::string&& token, std::vector<double>& values,
              EmbeddingSourceMeta& meta) {
    if (dim_ == 0) dim_ = values.size();
    if (values.size() != dim_) {
      throw format_error("DimMismatch",
                         "row for token '" + token + "' has " +
                             std::to_string(values.size()) + " values, expected " +
                             std::to_string(dim_));
    }
    if (vocab_.count(token)) {
      ++meta.duplicates_skipped;
      return;
    }
    double sq = 0.0;
    for (double v : values) sq += v * v;
    double norm = std::sqrt(sq);
    if (norm < kZeroNormFloor) {
      ++meta.zero_vectors_skipped;
      return;
    }
    for (double& v : values) v /= norm;
    vocab_.emplace(token, static_cast<Eigen::Index>(tokens_.size()));
    tokens_.push_back(std::move(token));
    data_.insert(data_.end(), values.begin(), values.end());
  }

  EmbeddingStore finish(EmbeddingSourceMeta meta);

 private:
  std::size_t vocab_limit_;
  std::size_t dim_ = 0;
  std::unordered_map<std::string, Eigen::Index> vocab_;
  std::vector<std::string> tokens_;
  std::vector<double> data_;
};

namespace {

using Builder = EmbeddingStoreBuilder;

std::vector<double> parse_row_values(std::string_view rest, const std::string& token) {
  std::vector<double> values;
  size_t pos = 0;
  while (pos < rest.size()) {
    while (pos < rest.size() && (rest[pos] == ' ' || rest[pos] == '\r')) ++pos;
    if (pos >= rest.size()) break;
    size_t end = pos;
    while (end < rest.size() && rest[end] != ' ' && rest[end] != '\r') ++end;
    auto v = parse_double(rest.substr(pos, end - pos));
    if (!v) {
      throw format_error("DimMismatch", "unparsable value in row for token '" + token + "'");
    }
    values.push_back(*v);
    pos = end;
  }
  return values;
}

// One "<token> v1 ... vD" row. Returns false on blank lines.
bool parse_text_row(std::string_view line, std::string& token, std::vector<double>& values) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
  if (line.empty()) return false;
  size_t sp = line.find(' ');
  if (sp == std::string_view::npos) {
    throw format_error("DimMismatch", "row with no vector values: " + std::string(line.substr(0, 32)));
  }
  token.assign(line.substr(0, sp));
  values = parse_row_values(line.substr(sp + 1), token);
  if (values.empty()) {
    throw format_error("DimMismatch", "row with no vector values for token '" + token + "'");
  }
  return true;
}

std::pair<std::size_t, std::size_t> parse_header(const std::string& line, const std::string& path) {
  auto fields = split_delimited(std::string_view(trim(line)), ' ');
  if (fields.size() != 2) {
    throw format_error("MalformedHeader", "expected '<vocab> <dim>' header in " + path);
  }
  auto vocab = parse_int(fields[0]);
  auto dim = parse_int(fields[1]);
  if (!vocab || !dim || *vocab <= 0 || *dim <= 0) {
    throw format_error("MalformedHeader", "unparsable header counts in " + path);
  }
  return {static_cast<std::size_t>(*vocab), static_cast<std::size_t>(*dim)};
}

void load_glove_text(std::ifstream& in, Builder& builder, EmbeddingSourceMeta& meta) {
  std::string line, token;
  std::vector<double> values;
  while (!builder.full() && std::getline(in, line)) {
    if (!parse_text_row(line, token, values)) continue;
    ++meta.original_vocab;
    builder.accept(std::move(token), values, meta);
  }
}

void load_word2vec_text(std::ifstream& in, Builder& builder, EmbeddingSourceMeta& meta,
                        const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) {
    throw format_error("MalformedHeader", "empty file: " + path);
  }
  auto [vocab_count, dim] = parse_header(line, path);
  meta.original_vocab = vocab_count;
  std::string token;
  std::vector<double> values;
  for (std::size_t i = 0; i < vocab_count && !builder.full(); ++i) {
    if (!std::getline(in, line)) {
      throw format_error("TruncatedFile",
                         path + ": header promised " + std::to_string(vocab_count) +
                             " rows, got " + std::to_string(i));
    }
    if (!parse_text_row(line, token, values)) {
      --i;  // skip blank lines without consuming a slot
      continue;
    }
    if (values.size() != dim) {
      throw format_error("DimMismatch",
                         path + ": row for '" + token + "' has " +
                             std::to_string(values.size()) + " values, header says " +
                             std::to_string(dim));
    }
    builder.accept(std::move(token), values, meta);
  }
}

void load_word2vec_binary(std::ifstream& in, Builder& builder, EmbeddingSourceMeta& meta,
                          const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) {
    throw format_error("MalformedHeader", "empty file: " + path);
  }
  auto [vocab_count, dim] = parse_header(line, path);
  meta.original_vocab = vocab_count;

  std::vector<char> raw(dim * 4);
  std::vector<double> values(dim);
  for (std::size_t i = 0; i < vocab_count && !builder.full(); ++i) {
    std::string token;
    int c;
    while ((c = in.get()) != EOF && c != 0x20) {
      if (c == '\n' && token.empty()) continue;  // writers vary on leading 0x0A
      token.push_back(static_cast<char>(c));
    }
    if (c == EOF) {
      throw format_error("TruncatedFile",
                         path + ": EOF inside entry " + std::to_string(i) + " of " +
                             std::to_string(vocab_count));
    }
    in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
      throw format_error("TruncatedFile",
                         path + ": EOF inside vector of entry " + std::to_string(i));
    }
    for (std::size_t k = 0; k < dim; ++k) {
      std::uint32_t bits = static_cast<std::uint8_t>(raw[4 * k]) |
                           (static_cast<std::uint32_t>(static_cast<std::uint8_t>(raw[4 * k + 1])) << 8) |
                           (static_cast<std::uint32_t>(static_cast<std::uint8_t>(raw[4 * k + 2])) << 16) |
                           (static_cast<std::uint32_t>(static_cast<std::uint8_t>(raw[4 * k + 3])) << 24);
      values[k] = static_cast<double>(std::bit_cast<float>(bits));
    }
    if (in.peek() == 0x0A) in.get();
    builder.accept(std::move(token), values, meta);
  }
}

}  // namespace

EmbeddingStore EmbeddingStoreBuilder::finish(EmbeddingSourceMeta meta) {
  if (tokens_.empty()) {
    throw format_error("EmptyStore", "no usable vectors in " + meta.path);
  }
  EmbeddingStore store;
  store.vocab_ = std::move(vocab_);
  store.tokens_ = std::move(tokens_);
  store.matrix_ = Eigen::Map<const EmbeddingStore::Matrix>(
      data_.data(), static_cast<Eigen::Index>(store.tokens_.size()),
      static_cast<Eigen::Index>(dim_));
  store.meta_ = std::move(meta);
  return store;
}

EmbeddingStore EmbeddingStore::load(const std::string& path, EmbeddingFormat format,
                                    std::size_t vocab_limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("FileUnreadable", "cannot open embeddings: " + path);

  EmbeddingSourceMeta meta;
  meta.format = format;
  meta.path = path;

  Builder builder(vocab_limit);
  switch (format) {
    case EmbeddingFormat::glove_text:
      load_glove_text(in, builder, meta);
      break;
    case EmbeddingFormat::word2vec_text:
      load_word2vec_text(in, builder, meta, path);
      break;
    case EmbeddingFormat::word2vec_binary:
      load_word2vec_binary(in, builder, meta, path);
      break;
  }
  return builder.finish(std::move(meta));
}

std::optional<Eigen::Index> EmbeddingStore::find(std::string_view token) const {
  auto it = vocab_.find(std::string(token));
  if (it == vocab_.end()) return std::nullopt;
  return it->second;
}

std::optional<Eigen::Map<const Eigen::VectorXd>> EmbeddingStore::lookup(
    std::string_view token) const {
  auto idx = find(token);
  if (!idx) return std::nullopt;
  return row(*idx);
}

void EmbeddingStore::export_glove_text(std::ostream& out) const {
  for (Eigen::Index i = 0; i < size(); ++i) {
    out << tokens_[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < dim(); ++j) {
      out << ' ' << format_double(matrix_(i, j));
    }
    out << '\n';
  }
}

}  // namespace vectionary
