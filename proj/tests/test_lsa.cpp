#include "daembed/error.hpp"
#include "daembed/linalg.hpp"
#include "daembed/lsa.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace daembed;

namespace {

Corpus docs(std::vector<Document> d) {
  Corpus c;
  std::vector<std::string> all;
  for (const auto& doc : d) all.insert(all.end(), doc.begin(), doc.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  c.vocab = Vocabulary(all);
  c.documents = std::move(d);
  return c;
}

Matrix dense(const TermDocMatrix& t) { return Matrix(t.matrix); }

}  // namespace

TEST_CASE("tokenize lowercases and strips punctuation") {
  const Corpus c = tokenize({"Good food!"});
  REQUIRE(c.documents.size() == 1);
  CHECK(c.documents[0] == Document{"good", "food"});
  CHECK(c.vocab.tokens() == std::vector<std::string>{"food", "good"});
  CHECK(tokenize_line("It's 5-star, really.") == Document{"it", "s", "5", "star", "really"});
  CHECK(tokenize_line("caf\xC3\xA9 ok") == Document{"caf\xC3\xA9", "ok"});
}

TEST_CASE("tokenize drops empty documents and fails when nothing is left") {
  CHECK_THROWS_AS(tokenize({"!!!"}), DataError);
  const Corpus c = tokenize({"a b", "...", "c"});
  CHECK(c.documents.size() == 2);
  CHECK(c.dropped_documents == 1);
}

TEST_CASE("raw-count term-document matrix") {
  const TermDocMatrix t = build_term_doc(docs({{"a", "b"}, {"a"}}), TermWeighting::raw_count);
  Matrix expected(2, 2);
  expected << 1, 1, 1, 0;
  CHECK(dense(t) == expected);
}

TEST_CASE("tf-idf term-document matrix") {
  const Matrix t = dense(build_term_doc(docs({{"a", "b"}, {"a"}}), TermWeighting::tf_idf));
  CHECK(t(0, 0) == 0.0);
  CHECK(t(0, 1) == 0.0);
  CHECK(t(1, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(t(1, 1) == 0.0);
  CHECK(dense(build_term_doc(docs({{"a"}}), TermWeighting::tf_idf))(0, 0) == 0.0);
  const Matrix counts = dense(build_term_doc(docs({{"a", "a", "b"}, {"b"}, {"c"}}), TermWeighting::tf_idf));
  CHECK(counts(0, 0) == doctest::Approx(2.0 * std::log(3.0)));
  CHECK(counts(1, 0) == doctest::Approx(std::log(1.5)));
}

TEST_CASE("truncated SVD reproduces an exact low-rank matrix") {
  std::mt19937_64 gen(5);
  const Matrix a = Matrix::Random(9, 2) * Matrix::Random(2, 6);
  const TruncatedSvd svd = truncated_svd(a, 2);
  const Matrix rec = svd.u * svd.s.asDiagonal() * svd.v.transpose();
  CHECK((rec - a).norm() < 1e-10);
  CHECK((svd.u.transpose() * svd.u - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);

  const Matrix b = Matrix::Random(7, 5);
  const TruncatedSvd full = truncated_svd(b, 5);
  CHECK((full.u * full.s.asDiagonal() * full.v.transpose() - b).norm() / b.norm() < 1e-8);
  const Eigen::JacobiSVD<Matrix> oracle(b);
  CHECK((full.s - oracle.singularValues()).cwiseAbs().maxCoeff() < 1e-10);
  for (Eigen::Index i = 1; i < full.s.size(); ++i) CHECK(full.s(i) <= full.s(i - 1));

  const TruncatedSvd rank_limited = truncated_svd(a, 5);
  CHECK(rank_limited.s.size() == 2);
}

TEST_CASE("lsa_train output and sign convention") {
  const Corpus c = tokenize({"good food good", "bad food", "good service", "bad bad service", "food service"});
  const TermDocMatrix tdm = build_term_doc(c, TermWeighting::raw_count);
  const LsaResult r = lsa_train(tdm, c.vocab, 2);
  CHECK(r.table.dim() == 2);
  CHECK(r.table.size() == c.vocab.size());
  CHECK(!r.rank_limited);
  const Matrix m = dense(tdm);
  const TruncatedSvd svd = truncated_svd(m, 2);
  CHECK((r.table.vectors() - svd.u * svd.s.asDiagonal()).cwiseAbs().maxCoeff() < 1e-12);
  for (Eigen::Index j = 0; j < 2; ++j) {
    Eigen::Index arg = 0;
    svd.u.col(j).cwiseAbs().maxCoeff(&arg);
    CHECK(svd.u(arg, j) > 0.0);
  }
  const LsaResult unscaled = lsa_train(tdm, c.vocab, 2, 0.0);
  CHECK((unscaled.table.vectors() - svd.u).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(lsa_train(tdm, c.vocab, 0), DimensionError);
  CHECK_THROWS_AS(lsa_train(tdm, c.vocab, 2, 1.5), ConfigError);
}

TEST_CASE("lsa_train clips k to the rank") {
  const Corpus c = docs({{"a", "b"}, {"a", "b"}, {"a", "b"}});
  const TermDocMatrix tdm = build_term_doc(c, TermWeighting::raw_count);
  const LsaResult r = lsa_train(tdm, c.vocab, 2);
  CHECK(r.rank_limited);
  CHECK(r.table.dim() == 1);
  CHECK(r.requested_k == 2);
  // Every word vector is proportional to the single left singular vector.
  const Matrix v = r.table.vectors();
  CHECK(std::abs(v(0, 0) - v(1, 0)) < 1e-12);
}

TEST_CASE("lsa is invariant to document order up to sign") {
  std::vector<std::string> lines{"the food was great", "terrible service here", "great service and food",
                                 "the place was terrible", "food food food", "service was slow"};
  const Corpus a = tokenize(lines);
  std::reverse(lines.begin(), lines.end());
  const Corpus b = tokenize(lines);
  const LsaResult ra = lsa_train(build_term_doc(a, TermWeighting::tf_idf), a.vocab, 3);
  const LsaResult rb = lsa_train(build_term_doc(b, TermWeighting::tf_idf), b.vocab, 3);
  REQUIRE(ra.table.vocab().tokens() == rb.table.vocab().tokens());
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double same = (ra.table.vectors().col(j) - rb.table.vectors().col(j)).cwiseAbs().maxCoeff();
    const double flip = (ra.table.vectors().col(j) + rb.table.vectors().col(j)).cwiseAbs().maxCoeff();
    CHECK(std::min(same, flip) < 1e-10);
  }
}
