#pragma once

#include "daembed/embedding_store.hpp"

#include <Eigen/SparseCore>

#include <filesystem>
#include <string>
#include <vector>

namespace daembed {

using Document = std::vector<std::string>;

/// Tokenized documents plus their vocabulary in lexicographic order.
struct Corpus {
  std::vector<Document> documents;
  Vocabulary vocab;
  std::size_t dropped_documents = 0;  ///< inputs that were empty after tokenizing
};

/// Splits one line into lowercase tokens. ASCII letters and digits, plus every
/// byte >= 0x80 (so UTF-8 sequences stay whole), form tokens; all other bytes
/// separate them. Only ASCII is case-folded.
Document tokenize_line(std::string_view line);

/// Tokenizes each line into a document, dropping documents that end up empty.
/// Throws DataError when nothing survives.
Corpus tokenize(const std::vector<std::string>& raw_lines);

/// Reads one document per line; text after the first TAB is discarded.
/// Throws IoError for unreadable files and DataError for files with no lines.
std::vector<std::string> read_corpus_lines(const std::filesystem::path& path);

enum class TermWeighting { raw_count, tf_idf };

TermWeighting parse_term_weighting(std::string_view name);
const char* to_string(TermWeighting weighting) noexcept;

/// |V| x |D| sparse matrix; row order follows corpus.vocab.
struct TermDocMatrix {
  Eigen::SparseMatrix<double> matrix;
  TermWeighting weighting = TermWeighting::tf_idf;
};

/// raw_count: occurrences of t in d. tf_idf: count * ln(|D| / df(t)).
TermDocMatrix build_term_doc(const Corpus& corpus, TermWeighting weighting);

struct LsaResult {
  EmbeddingTable table;
  Vector singular_values;          ///< the kept values, non-increasing
  Eigen::Index requested_k = 0;
  bool rank_limited = false;       ///< fewer than requested_k dimensions were available
};

/// Rank-k truncated SVD of the weighted term-document matrix; word i gets
/// U_k[i,:] * S_k^scaling_power. Sign convention as in truncated_svd().
/// `vocab` labels the rows and must match the matrix row count.
LsaResult lsa_train(const TermDocMatrix& tdm, const Vocabulary& vocab, Eigen::Index k,
                    double scaling_power = 1.0);

}  // namespace daembed
