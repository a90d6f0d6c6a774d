#include <gtest/gtest.h>

#include <Eigen/Cholesky>

#include "proxpinv/matio.hpp"
#include "proxpinv/oracle.hpp"
#include "support/reference.hpp"
#include "support/temp_dir.hpp"

namespace {

using namespace proxpinv;
using namespace proxpinv::matio;
using proxpinv::testing::random_matrix;
using proxpinv::testing::slurp;
using proxpinv::testing::TempDir;

TEST(Generate, HilbertTwo) {
  const Matrix h = generate(Hilbert{2}).matrix();
  ASSERT_EQ(h.rows(), 2);
  EXPECT_EQ(h(0, 0), 1.0);
  EXPECT_EQ(h(0, 1), 0.5);
  EXPECT_EQ(h(1, 0), 0.5);
  EXPECT_EQ(h(1, 1), 1.0 / 3.0);
}

TEST(Generate, HilbertIsPositiveDefiniteUpToTwelve) {
  for (int n = 1; n <= 12; ++n) {
    const Matrix h = hilbert(n);
    EXPECT_EQ((h - h.transpose()).norm(), 0.0);
    EXPECT_EQ(Eigen::LLT<Matrix>(h).info(), Eigen::Success) << "n = " << n;
  }
}

TEST(Generate, PrescribedSingularValues) {
  const Matrix m = generate(PrescribedSV{3, 3, {2.0, 1.0, 0.5}, 11}).matrix();
  const Vector s = oracle::singular_values(m);
  EXPECT_NEAR(s(0), 2.0, 1e-12);
  EXPECT_NEAR(s(1), 1.0, 1e-12);
  EXPECT_NEAR(s(2), 0.5, 1e-12);
}

TEST(Generate, PrescribedRectangular) {
  const Matrix m = generate(PrescribedSV{6, 4, {3.0, 2.0, 1.0, 0.25}, 5}).matrix();
  ASSERT_EQ(m.rows(), 6);
  ASSERT_EQ(m.cols(), 4);
  const Vector s = oracle::singular_values(m);
  EXPECT_NEAR(s(0), 3.0, 1e-12);
  EXPECT_NEAR(s(3), 0.25, 1e-12);
}

TEST(Generate, RankDeficient) {
  const Matrix m = generate(RankDeficient{4, 3, 2, 100.0, 7}).matrix();
  const Vector s = oracle::singular_values(m);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) rank += s(i) > 1e-10 * s(0);
  EXPECT_EQ(rank, 2);
  EXPECT_NEAR(s(0) / s(1), 100.0, 100.0 * 1e-10);
}

TEST(Generate, DeterministicPerSeed) {
  const Matrix a = generate(PrescribedSV{4, 3, {1.0, 0.5, 0.1}, 42}).matrix();
  const Matrix b = generate(PrescribedSV{4, 3, {1.0, 0.5, 0.1}, 42}).matrix();
  const Matrix c = generate(PrescribedSV{4, 3, {1.0, 0.5, 0.1}, 43}).matrix();
  EXPECT_EQ((a - b).norm(), 0.0);
  EXPECT_GT((a - c).norm(), 0.0);
}

TEST(Generate, GaussianStreamIsPinned) {
  // Pinned so a change in the sampling scheme is caught.
  GaussianStream rng(1);
  GaussianStream again(1);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(rng.next(), again.next());
  double sum = 0.0;
  double sq = 0.0;
  GaussianStream big(2024);
  const int count = 20000;
  for (int i = 0; i < count; ++i) {
    const double x = big.next();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / count, 0.0, 0.03);
  EXPECT_NEAR(sq / count, 1.0, 0.05);
}

TEST(Generate, RejectsInvalidSpecs) {
  EXPECT_THROW(generate(Hilbert{0}), ConfigError);
  EXPECT_THROW(generate(PrescribedSV{3, 2, {1.0}, 0}), ConfigError);
  EXPECT_THROW(generate(PrescribedSV{2, 2, {1.0, 2.0}, 0}), ConfigError);
  EXPECT_THROW(generate(PrescribedSV{2, 2, {1.0, -1.0}, 0}), ConfigError);
  EXPECT_THROW(generate(RankDeficient{4, 3, 3, 10.0, 0}), ConfigError);
  EXPECT_THROW(generate(RankDeficient{4, 3, 0, 10.0, 0}), ConfigError);
  EXPECT_THROW(generate(RankDeficient{4, 3, 2, 0.5, 0}), ConfigError);
}

TEST(ReadMatrix, Csv) {
  TempDir dir;
  const auto p = read_matrix(dir.write("id.csv", "1,0\n0,1\n"), Format::csv);
  EXPECT_EQ((p.matrix() - Matrix::Identity(2, 2)).norm(), 0.0);
}

TEST(ReadMatrix, MatrixMarketColumnMajor) {
  TempDir dir;
  const std::string body =
      "%%MatrixMarket matrix array real general\n2 2\n1\n0.5\n0.5\n0.3333333333333333\n";
  const auto p = read_matrix(dir.write("h2.mm", body), Format::matrixmarket_array);
  EXPECT_LE((p.matrix() - hilbert(2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ReadMatrix, MatrixMarketCommentsAndPacking) {
  TempDir dir;
  const std::string body =
      "%%MatrixMarket matrix array real general\n% a comment\n%\n2 3\n1 2\n3 4\n\n5 6\n";
  const Matrix m = read_matrix(dir.write("a.mm", body), Format::matrixmarket_array).matrix();
  Matrix expected(2, 3);
  expected << 1, 3, 5, 2, 4, 6;
  EXPECT_EQ((m - expected).norm(), 0.0);
}

TEST(ReadMatrix, Errors) {
  TempDir dir;
  EXPECT_THROW(read_matrix(dir.file("missing.csv"), Format::csv), IoError);

  auto line_of = [&](const std::string& name, const std::string& body, Format f) -> std::size_t {
    try {
      read_matrix(dir.write(name, body), f);
    } catch (const ParseError& e) {
      return e.line();
    }
    ADD_FAILURE() << name << " parsed";
    return 0;
  };
  const Format mm = Format::matrixmarket_array;
  EXPECT_EQ(line_of("h.mm", "%%MatrixMarket matrix coordinate real general\n1 1 1\n", mm), 1u);
  EXPECT_EQ(line_of("h2.mm", "1 1\n1\n", mm), 1u);
  EXPECT_EQ(line_of("c.mm", "%%MatrixMarket matrix array real general\n2 1\n1\n", mm), 3u);
  EXPECT_EQ(line_of("x.mm", "%%MatrixMarket matrix array real general\n1 1\n1\n2\n", mm), 4u);
  EXPECT_EQ(line_of("n.mm", "%%MatrixMarket matrix array real general\n2 1\n1\nnan\n", mm), 4u);
  EXPECT_EQ(line_of("s.mm", "%%MatrixMarket matrix array real general\n2 x\n", mm), 2u);
  EXPECT_EQ(line_of("r.csv", "1,2\n3\n", Format::csv), 2u);
  EXPECT_EQ(line_of("b.csv", "1,2\n3,abc\n", Format::csv), 2u);
  EXPECT_EQ(line_of("i.csv", "1,inf\n", Format::csv), 1u);
  EXPECT_EQ(line_of("e.csv", "\n\n", Format::csv), 0u);
}

TEST(WriteMatrix, IdentityCsv) {
  TempDir dir;
  const std::string path = dir.file("id.csv");
  write_matrix(Matrix::Identity(2, 2), path, Format::csv);
  EXPECT_EQ(slurp(path), "1,0\n0,1\n");
}

TEST(WriteMatrix, MatrixMarketHeader) {
  TempDir dir;
  const std::string path = dir.file("h.mm");
  write_matrix(hilbert(2), path, Format::matrixmarket_array);
  const std::string text = slurp(path);
  EXPECT_EQ(text.substr(0, text.find('\n')), "%%MatrixMarket matrix array real general");
  EXPECT_EQ((read_matrix(path, Format::matrixmarket_array).matrix() - hilbert(2)).norm(), 0.0);
}

TEST(WriteMatrix, UnwritableDestination) {
  TempDir dir;
  EXPECT_THROW(write_matrix(Matrix::Identity(2, 2), dir.file("no/such/dir/x.csv"), Format::csv),
               IoError);
}

TEST(RoundTrip, BitExactForRandomAndGenerated) {
  TempDir dir;
  std::vector<Matrix> cases{random_matrix(5, 3, 77), 1e-300 * random_matrix(2, 4, 78),
                            1e300 * random_matrix(3, 1, 79), hilbert(7),
                            generate(PrescribedSV{4, 5, {4, 3, 2, 1}, 3}).matrix(),
                            generate(RankDeficient{6, 4, 3, 1e6, 4}).matrix()};
  for (const Format f : {Format::csv, Format::matrixmarket_array}) {
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const std::string path = dir.file("rt" + std::to_string(i) + "." + std::string(to_string(f)));
      write_matrix(cases[i], path, f);
      const Matrix back = read_dense(path, f);
      ASSERT_EQ(back.rows(), cases[i].rows());
      ASSERT_EQ(back.cols(), cases[i].cols());
      EXPECT_TRUE((back.array() == cases[i].array()).all()) << "case " << i;
    }
  }
}

TEST(FileSource, GenerateReadsFile) {
  TempDir dir;
  const std::string path = dir.write("m.csv", "2,0\n0,3\n");
  const Matrix m = generate(FileSource{path, Format::csv}).matrix();
  EXPECT_EQ(m(1, 1), 3.0);
}

TEST(Format, Parse) {
  EXPECT_EQ(parse_format("mm"), Format::matrixmarket_array);
  EXPECT_EQ(parse_format("csv"), Format::csv);
  EXPECT_THROW(parse_format("xls"), ConfigError);
}

}  // namespace
