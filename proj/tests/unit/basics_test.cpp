#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "latent_split/error.hpp"
#include "latent_split/matrix.hpp"
#include "latent_split/parallel.hpp"
#include "latent_split/random.hpp"
#include "latent_split/text.hpp"

namespace latent_split {
namespace {

TEST(Matrix, InitializerListIsRowMajor) {
  const Matrix m{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m(1, 0), 4.0);
  EXPECT_EQ(m.data()[4], 5.0);
  EXPECT_EQ(m.column(2), (std::vector<double>{3, 6}));
}

TEST(Matrix, ProductsAgreeWithHandValues) {
  const Matrix a{{1, 2}, {3, 4}, {5, 6}};
  const Matrix b{{1, 0, 2}, {0, 1, 3}};
  EXPECT_EQ(matmul(a, b), (Matrix{{1, 2, 8}, {3, 4, 18}, {5, 6, 28}}));
  EXPECT_EQ(matmul_tn(a, a), (Matrix{{35, 44}, {44, 56}}));
  EXPECT_EQ(a.transposed(), (Matrix{{1, 3, 5}, {2, 4, 6}}));
}

TEST(Matrix, SelectRowsAndColumnsKeepRequestedOrder) {
  const Matrix a{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
  const std::vector<std::size_t> rows{2, 0};
  const std::vector<std::size_t> cols{1};
  EXPECT_EQ(a.select_rows(rows), (Matrix{{7, 8, 9}, {1, 2, 3}}));
  EXPECT_EQ(a.select_cols(cols), (Matrix{{2}, {5}, {8}}));
}

TEST(Matrix, NormsAndDiffs) {
  const Matrix a{{3, 0}, {0, 4}};
  EXPECT_DOUBLE_EQ(frobenius_norm(a), 5.0);
  EXPECT_DOUBLE_EQ(max_abs_diff(a, Matrix{{3, 1}, {0, 2}}), 2.0);
}

TEST(Random, SplitMix64MatchesReferenceStream) {
  SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(rng.next(), 0x6E789E6AA1B965F4ULL);
  EXPECT_EQ(rng.next(), 0x06C45D188009454FULL);
}

TEST(Random, BoundedAndDerivedSeedsAreFrozen) {
  SplitMix64 rng(123);
  std::vector<std::uint64_t> got;
  for (int i = 0; i < 5; ++i) got.push_back(rng.bounded(10));
  EXPECT_EQ(got, (std::vector<std::uint64_t>{5, 8, 0, 1, 2}));
  EXPECT_EQ(derive_seed(42, Stream::Synth), 0xC8DDBBBEAB9CBA1BULL);
  EXPECT_EQ(derive_seed(0, Stream::Folds), 0x18330D235A79896CULL);
}

TEST(Random, BoundedIsRoughlyUniform) {
  SplitMix64 rng(9);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.bounded(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(Random, GaussianMomentsAreStandard) {
  SplitMix64 rng(5);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    ASSERT_TRUE(std::isfinite(g));
    sum += g;
    sq += g * g;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Random, SampleWithoutReplacementIsDistinctSubsetOfPool) {
  std::vector<std::size_t> pool(30);
  std::iota(pool.begin(), pool.end(), 100);
  SplitMix64 rng(1);
  const auto drawn = sample_without_replacement(pool, 12, rng);
  ASSERT_EQ(drawn.size(), 12u);
  const std::set<std::size_t> unique(drawn.begin(), drawn.end());
  EXPECT_EQ(unique.size(), 12u);
  for (auto v : drawn) EXPECT_TRUE(v >= 100 && v < 130);
  SplitMix64 again(1);
  EXPECT_EQ(sample_without_replacement(pool, 12, again), drawn);
  EXPECT_THROW(sample_without_replacement(pool, 31, again), Error);
}

TEST(Text, CsvRecordsHonourQuotes) {
  std::vector<std::string> f;
  ASSERT_TRUE(split_csv_record(R"(1,"a,b","say ""hi""",)", f));
  EXPECT_EQ(f, (std::vector<std::string>{"1", "a,b", "say \"hi\"", ""}));
  EXPECT_FALSE(split_csv_record(R"(1,"open)", f));
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,\"b\""), "\"a,\"\"b\"\"\"");
}

TEST(Text, FormatDoubleRoundTrips) {
  for (double v : {0.1, -2.5e-300, 1.0 / 3.0, 123456789.0, 0.0}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Error, MessageCarriesCodeAndLocation) {
  const Error e(ErrorCode::NonFiniteValue, "bad entry", MatrixIndex{2, 1});
  EXPECT_EQ(e.code(), ErrorCode::NonFiniteValue);
  ASSERT_TRUE(e.where().has_value());
  EXPECT_EQ(*e.where(), (MatrixIndex{2, 1}));
  EXPECT_NE(std::string(e.what()).find("NonFiniteValue"), std::string::npos);
}

TEST(Parallel, CoversEveryIndexOnceAndPropagatesErrors) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                 if (i == 7) throw Error(ErrorCode::InvalidArgument, "boom");
               }),
               Error);
  EXPECT_GE(worker_count(), 1u);
}

}  // namespace
}  // namespace latent_split
