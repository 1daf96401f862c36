#include "daembed/embedding_store.hpp"

#include "daembed/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <string>

namespace daembed {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; }

bool valid_token(std::string_view token) {
  return !token.empty() && std::none_of(token.begin(), token.end(), is_space);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

bool parse_double(std::string_view text, double& out) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

bool is_integer(std::string_view text) {
  return !text.empty() && std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  tokens_.reserve(tokens.size());
  for (auto& token : tokens) {
    if (!valid_token(token)) throw ConfigError("invalid token '" + token + "'");
    if (!add(std::move(token))) throw ConfigError("duplicate token in vocabulary");
  }
}

bool Vocabulary::add(std::string token) {
  if (!valid_token(token)) throw ConfigError("invalid token '" + token + "'");
  const auto [it, inserted] = index_.try_emplace(token, tokens_.size());
  if (!inserted) return false;
  tokens_.push_back(std::move(token));
  return true;
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingTable::EmbeddingTable(Vocabulary vocab, Matrix vectors)
    : vocab_(std::move(vocab)), vectors_(std::move(vectors)) {
  if (static_cast<std::size_t>(vectors_.rows()) != vocab_.size()) {
    throw DimensionError("embedding table has " + std::to_string(vectors_.rows()) + " rows for " +
                         std::to_string(vocab_.size()) + " tokens");
  }
  if (vectors_.cols() < 1) throw DimensionError("embedding dimension must be >= 1");
  if (!vectors_.allFinite()) throw NumericError("embedding table contains NaN or Inf");
}

std::optional<Eigen::RowVectorXd> EmbeddingTable::row(std::string_view token) const {
  const auto i = vocab_.find(token);
  if (!i) return std::nullopt;
  return Eigen::RowVectorXd(vectors_.row(static_cast<Eigen::Index>(*i)));
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::optional<Eigen::Index> expected_dim,
                               LoadStats* stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding file " + path.string());

  Vocabulary vocab;
  std::vector<double> values;
  Eigen::Index dim = expected_dim.value_or(0);
  if (expected_dim && *expected_dim < 1) throw ConfigError("expected dimension must be positive");

  LoadStats local;
  std::string line;
  std::size_t line_no = 0;
  bool seen_record = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (!seen_record && fields.size() == 2 && is_integer(fields[0]) && is_integer(fields[1])) {
      throw ParseError("looks like a word2vec count header; headerless text format expected", line_no);
    }
    seen_record = true;
    const auto width = static_cast<Eigen::Index>(fields.size()) - 1;
    if (width < 1) throw ParseError("token '" + std::string(fields[0]) + "' has no values", line_no);
    if (dim == 0) dim = width;
    if (width != dim) {
      throw ParseError("expected " + std::to_string(dim) + " values, found " + std::to_string(width), line_no);
    }
    const std::size_t offset = values.size();
    values.resize(offset + static_cast<std::size_t>(dim));
    for (Eigen::Index j = 0; j < dim; ++j) {
      double& v = values[offset + static_cast<std::size_t>(j)];
      if (!parse_double(fields[static_cast<std::size_t>(j) + 1], v) || !std::isfinite(v)) {
        throw ParseError("field " + std::to_string(j + 2) + " '" + std::string(fields[static_cast<std::size_t>(j) + 1]) +
                             "' is not a finite number",
                         line_no);
      }
    }
    if (!vocab.add(std::string(fields[0]))) {
      values.resize(offset);
      ++local.duplicates;
    }
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  if (vocab.empty()) throw ParseError("embedding file " + path.string() + " is empty");
  local.lines = line_no;
  if (local.duplicates > 0) {
    std::clog << "warning: " << path.string() << ": " << local.duplicates
              << " duplicate token(s) skipped, first occurrence kept\n";
  }
  if (stats != nullptr) *stats = local;

  const auto rows = static_cast<Eigen::Index>(vocab.size());
  Matrix vectors = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, dim);
  return EmbeddingTable(std::move(vocab), std::move(vectors));
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write embedding file " + path.string());
  std::string line;
  for (std::size_t i = 0; i < table.size(); ++i) {
    line = table.vocab()[i];
    for (Eigen::Index j = 0; j < table.dim(); ++j) {
      line += ' ';
      line += format_double(table.vectors()(static_cast<Eigen::Index>(i), j));
    }
    line += '\n';
    out << line;
  }
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

AlignedPairSet intersect(const EmbeddingTable& ds, const EmbeddingTable& gen) {
  std::vector<std::string> shared;
  for (const auto& token : ds.vocab().tokens()) {
    if (gen.vocab().contains(token)) shared.push_back(token);
  }
  std::sort(shared.begin(), shared.end());
  if (shared.size() < 2) {
    throw AlignmentError("vocabularies share " + std::to_string(shared.size()) +
                         " token(s); at least 2 are required");
  }

  AlignedPairSet out;
  const auto n = static_cast<Eigen::Index>(shared.size());
  out.ds_vectors.resize(n, ds.dim());
  out.gen_vectors.resize(n, gen.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& token = shared[static_cast<std::size_t>(i)];
    out.ds_vectors.row(i) = ds.vectors().row(static_cast<Eigen::Index>(*ds.vocab().find(token)));
    out.gen_vectors.row(i) = gen.vectors().row(static_cast<Eigen::Index>(*gen.vocab().find(token)));
  }
  out.ds_only = ds.size() - shared.size();
  out.gen_only = gen.size() - shared.size();
  out.vocab = Vocabulary(std::move(shared));
  return out;
}

EmbeddingTable lowercase_tokens(const EmbeddingTable& table, std::size_t* merged) {
  Vocabulary vocab;
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < table.size(); ++i) {
    std::string token = table.vocab()[i];
    std::transform(token.begin(), token.end(), token.begin(), [](char c) {
      return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    });
    if (vocab.add(std::move(token))) keep.push_back(static_cast<Eigen::Index>(i));
  }
  if (merged != nullptr) *merged = table.size() - keep.size();
  Matrix vectors(static_cast<Eigen::Index>(keep.size()), table.dim());
  for (std::size_t r = 0; r < keep.size(); ++r) vectors.row(static_cast<Eigen::Index>(r)) = table.vectors().row(keep[r]);
  return EmbeddingTable(std::move(vocab), std::move(vectors));
}

}  // namespace daembed
