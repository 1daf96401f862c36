#include "daembed/lsa.hpp"

#include "daembed/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>

namespace daembed {
namespace {

bool is_token_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

}  // namespace

Document tokenize_line(std::string_view line) {
  Document tokens;
  std::string current;
  for (const char ch : line) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_byte(c)) {
      current += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch;
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Corpus tokenize(const std::vector<std::string>& raw_lines) {
  Corpus corpus;
  std::vector<std::string> distinct;
  for (const auto& line : raw_lines) {
    Document doc = tokenize_line(line);
    if (doc.empty()) {
      ++corpus.dropped_documents;
      continue;
    }
    distinct.insert(distinct.end(), doc.begin(), doc.end());
    corpus.documents.push_back(std::move(doc));
  }
  if (corpus.documents.empty()) throw DataError("every document is empty after tokenization");
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  corpus.vocab = Vocabulary(std::move(distinct));
  return corpus;
}

std::vector<std::string> read_corpus_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (const auto tab = line.find('\t'); tab != std::string::npos) line.resize(tab);
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  if (lines.empty()) throw DataError("corpus file " + path.string() + " is empty");
  return lines;
}

TermWeighting parse_term_weighting(std::string_view name) {
  if (name == "raw-count" || name == "raw_count" || name == "count") return TermWeighting::raw_count;
  if (name == "tf-idf" || name == "tfidf" || name == "tf_idf") return TermWeighting::tf_idf;
  throw ConfigError("unknown term weighting '" + std::string(name) + "'");
}

const char* to_string(TermWeighting weighting) noexcept {
  return weighting == TermWeighting::raw_count ? "raw-count" : "tf-idf";
}

TermDocMatrix build_term_doc(const Corpus& corpus, TermWeighting weighting) {
  const auto rows = static_cast<Eigen::Index>(corpus.vocab.size());
  const auto cols = static_cast<Eigen::Index>(corpus.documents.size());

  // Per-document counts in row order, so triplets are emitted deterministically.
  std::vector<std::map<Eigen::Index, double>> counts(corpus.documents.size());
  std::vector<double> df(corpus.vocab.size(), 0.0);
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    for (const auto& token : corpus.documents[d]) {
      const auto row = corpus.vocab.find(token);
      if (!row) throw DataError("token '" + token + "' missing from corpus vocabulary");
      counts[d][static_cast<Eigen::Index>(*row)] += 1.0;
    }
    for (const auto& [row, count] : counts[d]) df[static_cast<std::size_t>(row)] += 1.0;
  }

  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t d = 0; d < counts.size(); ++d) {
    for (const auto& [row, count] : counts[d]) {
      double value = count;
      if (weighting == TermWeighting::tf_idf) {
        value *= std::log(static_cast<double>(cols) / df[static_cast<std::size_t>(row)]);
      }
      triplets.emplace_back(row, static_cast<Eigen::Index>(d), value);
    }
  }

  TermDocMatrix out;
  out.weighting = weighting;
  out.matrix.resize(rows, cols);
  out.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

LsaResult lsa_train(const TermDocMatrix& tdm, const Vocabulary& vocab, Eigen::Index k, double scaling_power) {
  if (k <= 0) throw DimensionError("LSA dimension k must be positive");
  if (!(scaling_power >= 0.0 && scaling_power <= 1.0)) throw ConfigError("scaling power must lie in [0, 1]");
  if (static_cast<std::size_t>(tdm.matrix.rows()) != vocab.size()) {
    throw DimensionError("term-document matrix rows do not match vocabulary size");
  }

  const Matrix dense(tdm.matrix);
  const TruncatedSvd svd = truncated_svd(dense, k);
  const Eigen::Index kept = svd.s.size();
  if (kept == 0) throw NumericError("term-document matrix is zero; no LSA dimensions");

  LsaResult out;
  out.requested_k = k;
  out.rank_limited = kept < k;
  if (out.rank_limited) {
    std::clog << "warning: LSA requested k=" << k << " but the matrix has rank " << svd.numerical_rank
              << "; using " << kept << " dimensions\n";
  }
  out.singular_values = svd.s;
  Vector scale(kept);
  for (Eigen::Index j = 0; j < kept; ++j) scale(j) = std::pow(svd.s(j), scaling_power);
  Matrix vectors = svd.u * scale.asDiagonal();
  out.table = EmbeddingTable(vocab, std::move(vectors));
  return out;
}

}  // namespace daembed
