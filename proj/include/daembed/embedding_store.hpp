#pragma once

#include "daembed/linalg.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace daembed {

/// Ordered set of unique tokens with O(1) lookup of a token's row.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Throws ConfigError on duplicate, empty or whitespace-containing tokens.
  explicit Vocabulary(std::vector<std::string> tokens);

  /// Appends a token; returns false (and leaves the vocabulary unchanged)
  /// when it is already present.
  bool add(std::string token);

  std::optional<std::size_t> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  const std::string& operator[](std::size_t i) const { return tokens_[i]; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// A vocabulary and one dense row vector per token.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  /// Validates row count, dim >= 1 and finiteness; throws DimensionError or
  /// NumericError.
  EmbeddingTable(Vocabulary vocab, Matrix vectors);

  const Vocabulary& vocab() const noexcept { return vocab_; }
  const Matrix& vectors() const noexcept { return vectors_; }
  Eigen::Index dim() const noexcept { return vectors_.cols(); }
  std::size_t size() const noexcept { return vocab_.size(); }

  /// Row for a token, or nullopt when the token is absent.
  std::optional<Eigen::RowVectorXd> row(std::string_view token) const;

 private:
  Vocabulary vocab_;
  Matrix vectors_;
};

struct LoadStats {
  std::size_t lines = 0;
  std::size_t duplicates = 0;  ///< repeated tokens skipped (first occurrence kept)
};

/// Reads "token v1 ... vd" lines. Blank lines are skipped. A two-field first
/// line of integers (a word2vec header) is rejected.
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               std::optional<Eigen::Index> expected_dim = std::nullopt,
                               LoadStats* stats = nullptr);

/// Writes the same text format with 17 significant digits per value.
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);

/// Shared vocabulary of a DS and a generic table with row-aligned vectors.
struct AlignedPairSet {
  Vocabulary vocab;
  Matrix ds_vectors;
  Matrix gen_vectors;
  std::size_t ds_only = 0;   ///< |V_DS \ V_shared|
  std::size_t gen_only = 0;  ///< |V_G \ V_shared|

  std::size_t size() const noexcept { return vocab.size(); }
};

/// Lexicographically ordered intersection. Throws AlignmentError when fewer
/// than two tokens are shared.
AlignedPairSet intersect(const EmbeddingTable& ds, const EmbeddingTable& gen);

/// ASCII-lowercases every token, keeping the first row when two tokens fold
/// to the same string. Used for optional case normalization before intersect.
EmbeddingTable lowercase_tokens(const EmbeddingTable& table, std::size_t* merged = nullptr);

}  // namespace daembed
