#include "daembed/embedding_store.hpp"
#include "daembed/error.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <random>

using namespace daembed;
using testutil::TempDir;
using testutil::write_file;

TEST_CASE("load identity table") {
  TempDir dir("store");
  write_file(dir / "e.txt", "a 1.0 0.0\nb 0.0 1.0\n");
  const EmbeddingTable t = load_embeddings(dir / "e.txt");
  CHECK(t.size() == 2);
  CHECK(t.dim() == 2);
  CHECK(t.vectors().isApprox(Matrix::Identity(2, 2)));
  CHECK(t.vocab()[0] == "a");
}

TEST_CASE("load reports malformed lines with their number") {
  TempDir dir("store");
  write_file(dir / "bad.txt", "a 1.0 x\n");
  try {
    load_embeddings(dir / "bad.txt");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.category() == ErrorCategory::parse);
  }
  write_file(dir / "ragged.txt", "a 1 2\nb 1 2\nc 1\n");
  try {
    load_embeddings(dir / "ragged.txt");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  write_file(dir / "nan.txt", "a nan 1\n");
  CHECK_THROWS_AS(load_embeddings(dir / "nan.txt"), ParseError);
  write_file(dir / "header.txt", "2 3\na 1 2 3\nb 1 2 3\n");
  CHECK_THROWS_AS(load_embeddings(dir / "header.txt"), ParseError);
}

TEST_CASE("load rejects empty and missing files and checks expected dim") {
  TempDir dir("store");
  write_file(dir / "empty.txt", "");
  CHECK_THROWS_AS(load_embeddings(dir / "empty.txt"), ParseError);
  CHECK_THROWS_AS(load_embeddings(dir / "missing.txt"), IoError);
  write_file(dir / "e.txt", "a 1 2 3\n");
  CHECK(load_embeddings(dir / "e.txt", 3).dim() == 3);
  CHECK_THROWS_AS(load_embeddings(dir / "e.txt", 100), ParseError);
}

TEST_CASE("duplicate tokens keep the first row") {
  TempDir dir("store");
  write_file(dir / "dup.txt", "a 1 1\nb 2 2\na 3 3\n");
  LoadStats stats;
  const EmbeddingTable t = load_embeddings(dir / "dup.txt", std::nullopt, &stats);
  CHECK(t.size() == 2);
  CHECK(stats.duplicates == 1);
  CHECK((*t.row("a"))(0) == 1.0);
}

TEST_CASE("save then load is exact") {
  TempDir dir("store");
  Matrix m(2, 2);
  m << 1.0 / 3.0, -2.0 / 7.0, 1e-300, 123456.789;
  const EmbeddingTable t = testutil::table({"x", "y"}, m);
  save_embeddings(t, dir / "t.txt");
  const EmbeddingTable back = load_embeddings(dir / "t.txt");
  CHECK((back.vectors() - m).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.vocab().tokens() == t.vocab().tokens());

  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const auto rows = 1 + static_cast<Eigen::Index>(gen() % 6);
    const auto cols = 1 + static_cast<Eigen::Index>(gen() % 5);
    Matrix r(rows, cols);
    for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = normal(gen) * std::pow(10.0, normal(gen) * 3);
    save_embeddings(testutil::table(testutil::word_list(static_cast<std::size_t>(rows)), r), dir / "r.txt");
    CHECK(load_embeddings(dir / "r.txt").vectors() == r);
  }
}

TEST_CASE("save to an unwritable path is an I/O error") {
  const EmbeddingTable t = testutil::table({"a"}, Matrix::Ones(1, 2));
  CHECK_THROWS_AS(save_embeddings(t, "/nonexistent-dir/sub/t.txt"), IoError);
}

TEST_CASE("table invariants") {
  CHECK_THROWS_AS(Vocabulary({"a", "a"}), ConfigError);
  CHECK_THROWS_AS(Vocabulary({"a b"}), ConfigError);
  CHECK_THROWS_AS(Vocabulary({""}), ConfigError);
  CHECK_THROWS(EmbeddingTable(Vocabulary({"a"}), Matrix::Ones(2, 2)));
  Matrix bad = Matrix::Ones(1, 2);
  bad(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS(EmbeddingTable(Vocabulary({"a"}), bad));
}

TEST_CASE("intersect aligns rows lexicographically") {
  Matrix ds(3, 2), gen(3, 3);
  ds << 1, 1, 2, 2, 3, 3;
  gen << 10, 10, 10, 20, 20, 20, 30, 30, 30;
  const AlignedPairSet p = intersect(testutil::table({"c", "b", "a"}, ds), testutil::table({"d", "c", "b"}, gen));
  REQUIRE(p.size() == 2);
  CHECK(p.vocab[0] == "b");
  CHECK(p.vocab[1] == "c");
  CHECK(p.ds_vectors(0, 0) == 2);
  CHECK(p.ds_vectors(1, 0) == 1);
  CHECK(p.gen_vectors(0, 0) == 30);
  CHECK(p.gen_vectors(1, 0) == 20);
  CHECK(p.ds_only == 1);
  CHECK(p.gen_only == 1);
}

TEST_CASE("intersect identity, symmetry and failure") {
  std::mt19937_64 gen(11);
  const auto words = testutil::word_list(8);
  const Matrix a = Matrix::Random(8, 3);
  const Matrix b = Matrix::Random(8, 4);
  const AlignedPairSet same = intersect(testutil::table(words, a), testutil::table(words, b));
  CHECK(same.size() == 8);
  CHECK(same.ds_only == 0);

  std::vector<std::string> other(words.begin() + 3, words.end());
  other.push_back("zz");
  const EmbeddingTable ta = testutil::table(words, a);
  const EmbeddingTable tb = testutil::table(other, Matrix::Random(6, 2));
  const AlignedPairSet ab = intersect(ta, tb);
  const AlignedPairSet ba = intersect(tb, ta);
  CHECK(ab.vocab.tokens() == ba.vocab.tokens());
  for (std::size_t i = 0; i < ab.size(); ++i) {
    const auto& tok = ab.vocab[i];
    CHECK(ab.ds_vectors.row(static_cast<Eigen::Index>(i)) == *ta.row(tok));
    CHECK(ab.gen_vectors.row(static_cast<Eigen::Index>(i)) == *tb.row(tok));
  }

  try {
    intersect(testutil::table({"a"}, Matrix::Ones(1, 1)), testutil::table({"b"}, Matrix::Ones(1, 1)));
    FAIL("expected alignment error");
  } catch (const AlignmentError& e) {
    CHECK(std::string(e.what()).find('0') != std::string::npos);
  }
}

TEST_CASE("lowercase merges case variants keeping the first") {
  Matrix m(3, 1);
  m << 1, 2, 3;
  std::size_t merged = 0;
  const EmbeddingTable t = lowercase_tokens(testutil::table({"Good", "good", "Food"}, m), &merged);
  CHECK(t.size() == 2);
  CHECK(merged == 1);
  CHECK((*t.row("good"))(0) == 1);
  CHECK(t.vocab().contains("food"));
}
