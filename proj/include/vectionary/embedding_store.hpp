/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vectionary {

enum class EmbeddingFormat { word2vec_binary, word2vec_text, glove_text };

std::string to_string(EmbeddingFormat format);
EmbeddingFormat embedding_format_from_string(std::string_view name);

struct EmbeddingSourceMeta {
  EmbeddingFormat format = EmbeddingFormat::glove_text;
  std::string path;
  std::size_t original_vocab = 0;      // entries present in the source file
  std::size_t zero_vectors_skipped = 0;
  std::size_t duplicates_skipped = 0;
};

/**
 * Immutable vocabulary -> unit-vector table.
 *
 * Every row is L2-normalized at load, so a projection onto any unit axis is
 * a plain dot product. The store is safe for concurrent reads.
 *
 * Accepted inputs:
 *   glove-text      rows of "<token> v1 v2 ... vD", no header
 *   word2vec-text   "<vocab> <dim>\n" header, then glove-style rows
 *   word2vec-binary "<vocab> <dim>\n" header; per entry a token terminated
 *                   by 0x20, D little-endian IEEE-754 float32 values, and an
 *                   optional trailing 0x0A
 */
class EmbeddingStore {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  /// vocab_limit == 0 keeps every token. Duplicate tokens keep the first
  /// occurrence; vectors with norm < 1e-12 are skipped. Both are tallied in
  /// meta() rather than aborting the load.
  static EmbeddingStore load(const std::string& path, EmbeddingFormat format,
                             std::size_t vocab_limit = 0);

  Eigen::Index dim() const { return matrix_.cols(); }
  Eigen::Index size() const { return matrix_.rows(); }

  std::optional<Eigen::Index> find(std::string_view token) const;

  /// Unit vector for a token; absent when out of vocabulary.
  std::optional<Eigen::Map<const Eigen::VectorXd>> lookup(std::string_view token) const;

  Eigen::Map<const Eigen::VectorXd> row(Eigen::Index i) const {
    return Eigen::Map<const Eigen::VectorXd>(matrix_.row(i).data(), dim());
  }

  const Matrix& matrix() const { return matrix_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const EmbeddingSourceMeta& meta() const { return meta_; }

  /// Canonical glove-text export (shortest round-trip decimals, '\n' rows).
  void export_glove_text(std::ostream& out) const;

 private:
  EmbeddingStore() = default;

  std::unordered_map<std::string, Eigen::Index> vocab_;
  std::vector<std::string> tokens_;  // row order
  Matrix matrix_;
  EmbeddingSourceMeta meta_;

  friend class EmbeddingStoreBuilder;
};

}  // namespace vectionary
