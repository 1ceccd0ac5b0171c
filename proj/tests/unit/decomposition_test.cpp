#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "latent_split/decomposition.hpp"
#include "latent_split/error.hpp"
#include "latent_split/metrics.hpp"
#include "latent_split/synth.hpp"
#include "oracles.hpp"

namespace latent_split {
namespace {

using testing::random_matrix;

/// Factorization with V = I and the given spectrum; enough for split().
SvdFactorization axis_factors(std::vector<double> s, std::size_t dim) {
  SvdFactorization f;
  f.s = std::move(s);
  f.v = Matrix(dim, f.s.size());
  for (std::size_t i = 0; i < f.s.size(); ++i) f.v(i, i) = 1.0;
  return f;
}

std::vector<std::size_t> iota_vec(std::size_t b, std::size_t e) {
  std::vector<std::size_t> v(e - b);
  std::iota(v.begin(), v.end(), b);
  return v;
}

void expect_partition(const SubspaceSplit& sp) {
  std::set<std::size_t> all(sp.style_indices.begin(), sp.style_indices.end());
  EXPECT_EQ(all.size(), sp.k);
  for (auto i : sp.content_indices) EXPECT_TRUE(all.insert(i).second) << "overlap at " << i;
  EXPECT_EQ(all.size(), sp.rank);
  EXPECT_EQ(*all.rbegin(), sp.rank - 1);
  EXPECT_TRUE(std::is_sorted(sp.style_indices.begin(), sp.style_indices.end()));
  EXPECT_TRUE(std::is_sorted(sp.content_indices.begin(), sp.content_indices.end()));
}

TEST(Split, TopAndLastOnFiveDirections) {
  const auto f = svd(Matrix{{5, 0, 0, 0, 0}, {0, 4, 0, 0, 0}, {0, 0, 3, 0, 0}, {0, 0, 0, 2, 0}, {0, 0, 0, 0, 1}});
  ASSERT_EQ(f.s, (std::vector<double>{5, 4, 3, 2, 1}));
  const auto top = split(f, 2, {Strategy::TopK, {}});
  EXPECT_EQ(top.style_indices, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(top.content_indices, (std::vector<std::size_t>{2, 3, 4}));
  const auto last = split(f, 2, {Strategy::LastK, {}});
  EXPECT_EQ(last.style_indices, (std::vector<std::size_t>{3, 4}));
  EXPECT_EQ(last.content_indices, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Split, RandomKIsSeededAndFrozen) {
  const auto f = axis_factors(std::vector<double>(64, 1.0), 64);
  const auto a = split(f, 8, {Strategy::RandomK, 7});
  const auto b = split(f, 8, {Strategy::RandomK, 7});
  EXPECT_EQ(a.style_indices, b.style_indices);
  // Oracle: splitmix64(7) driving a partial Fisher-Yates over 0..63.
  EXPECT_EQ(a.style_indices, (std::vector<std::size_t>{1, 3, 14, 23, 25, 32, 38, 55}));
  expect_partition(a);
  EXPECT_NE(split(f, 8, {Strategy::RandomK, 8}).style_indices, a.style_indices);
}

TEST(Split, TopHalfRandomHalfDrawsTheRemainder) {
  const auto f = axis_factors(std::vector<double>(64, 1.0), 64);
  EXPECT_EQ(split(f, 4, {Strategy::TopHalfRandomHalf, 7}).style_indices,
            (std::vector<std::size_t>{0, 1, 61, 62}));
  // Odd k: floor(k/2) top directions, the rest drawn.
  EXPECT_EQ(split(f, 5, {Strategy::TopHalfRandomHalf, 7}).style_indices,
            (std::vector<std::size_t>{0, 1, 10, 61, 62}));
}

TEST(Split, RejectsOutOfRangeKAndMissingSeed) {
  const auto f = axis_factors({3, 2, 1}, 3);
  for (std::size_t k : {0u, 3u, 4u}) {
    try {
      split(f, k, {Strategy::TopK, {}});
      FAIL() << "k=" << k;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::KOutOfRange);
    }
  }
  EXPECT_THROW(split(f, 1, {Strategy::RandomK, {}}), Error);
}

TEST(Split, PartitionHoldsForEveryStrategyAndK) {
  const auto f = axis_factors(std::vector<double>(20, 1.0), 20);
  for (auto st : {Strategy::TopK, Strategy::RandomK, Strategy::LastK, Strategy::TopHalfRandomHalf}) {
    for (std::size_t k = 1; k < 20; ++k) expect_partition(split(f, k, {st, 99}));
  }
}

TEST(Split, TopKStyleSetsAreNested) {
  const auto f = axis_factors(std::vector<double>(30, 1.0), 30);
  for (std::size_t k = 1; k + 1 < 30; ++k) {
    const auto small = split(f, k, {Strategy::TopK, {}}).style_indices;
    const auto big = split(f, k + 1, {Strategy::TopK, {}}).style_indices;
    EXPECT_TRUE(std::includes(big.begin(), big.end(), small.begin(), small.end()));
  }
}

TEST(Split, FewerRowsThanDimensionsDropsNullSpace) {
  const Matrix x = random_matrix(5, 12, 3);
  const auto sp = split(svd(x), 2, {Strategy::TopK, {}});
  EXPECT_EQ(sp.dim, 12u);
  EXPECT_EQ(sp.rank, 5u);
  EXPECT_EQ(sp.content_indices, (std::vector<std::size_t>{2, 3, 4}));
  EXPECT_EQ(embed_content(x, sp).cols(), 3u);
}

TEST(Embed, WideEncoderDimensions) {
  const auto f = axis_factors(std::vector<double>(768, 1.0), 768);
  const auto sp = split(f, 16, {Strategy::TopK, {}});
  const Matrix x = random_matrix(3, 768, 1);
  EXPECT_EQ(embed_style(x, sp).cols(), 16u);
  EXPECT_EQ(embed_content(x, sp).cols(), 752u);
  const auto edge = split(f, 767, {Strategy::TopK, {}});
  EXPECT_EQ(embed_content(x, edge).cols(), 1u);
}

TEST(Embed, EnergySplitsAndReconstructs) {
  const Matrix x = random_matrix(40, 10, 2);
  const auto f = svd(x);
  const auto sp = split(f, 3, {Strategy::RandomK, 5});
  const Matrix s = embed_style(x, sp), c = embed_content(x, sp);
  const double xv = frobenius_norm(project(x, Basis(f.v)));
  const double fs = frobenius_norm(s), fc = frobenius_norm(c);
  EXPECT_NEAR(fs * fs + fc * fc, xv * xv, 1e-9);
  const Matrix back = [&] {
    Matrix r = matmul(s, sp.style_basis.columns().transposed());
    const Matrix rc = matmul(c, sp.content_basis.columns().transposed());
    for (std::size_t i = 0; i < r.data().size(); ++i) r.data()[i] += rc.data()[i];
    return r;
  }();
  EXPECT_LE(max_abs_diff(back, x), 1e-8);
  EXPECT_THROW(embed_style(Matrix(2, 9), sp), Error);
}

TEST(Strategy, Spellings) {
  for (auto st : {Strategy::TopK, Strategy::RandomK, Strategy::LastK, Strategy::TopHalfRandomHalf}) {
    EXPECT_EQ(parse_strategy(to_string(st)), st);
  }
  EXPECT_FALSE(parse_strategy("Top").has_value());
}

class PlantedGenre : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto result = generate(standard_fixture(0));
    genre_ = new EmbeddingDataset(filter_by_genre(result.dataset, "genre0"));
  }
  static void TearDownTestSuite() { delete genre_; }
  static EmbeddingDataset* genre_;
};
EmbeddingDataset* PlantedGenre::genre_ = nullptr;

TEST_F(PlantedGenre, SelectKFindsPlantedDimension) {
  const auto ids = game_ids(genre_->metadata);
  const std::vector<std::size_t> cands{1, 2, 4, 8, 16};
  const auto r = select_k(genre_->features, ids, cands);
  EXPECT_EQ(r.chosen_k, 4u);
  EXPECT_EQ(r.candidates, cands);
  for (double g : r.gap_diff) {
    EXPECT_GE(g, -2.0);
    EXPECT_LE(g, 2.0);
  }
}

TEST_F(PlantedGenre, SelectKIsInvariantToRowPermutation) {
  const auto ids = game_ids(genre_->metadata);
  std::vector<std::size_t> perm(ids.size());
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = 0; i < perm.size(); ++i) std::swap(perm[i], perm[(i * 7919) % perm.size()]);
  std::vector<std::string> pids;
  for (auto p : perm) pids.push_back(ids[p]);
  const std::vector<std::size_t> cands{1, 4, 8};
  const auto a = select_k(genre_->features, ids, cands);
  const auto b = select_k(genre_->features.select_rows(perm), pids, cands);
  EXPECT_EQ(a.chosen_k, b.chosen_k);
  for (std::size_t i = 0; i < cands.size(); ++i) EXPECT_NEAR(a.gap_diff[i], b.gap_diff[i], 1e-9);
}

TEST_F(PlantedGenre, StrategyDominanceOrdering) {
  const auto ids = game_ids(genre_->metadata);
  const auto f = svd(genre_->features);
  auto style_score = [&](Strategy st) {
    return silhouette(embed_style(genre_->features, split(f, 4, {st, 7})),
                      std::span<const std::string>(ids))
        .mean_score;
  };
  const double top = style_score(Strategy::TopK);
  const double half = style_score(Strategy::TopHalfRandomHalf);
  const double rnd = style_score(Strategy::RandomK);
  const double last = style_score(Strategy::LastK);
  EXPECT_GE(top, half);
  EXPECT_GE(half - rnd, 0.1);
  EXPECT_GE(half - last, 0.1);
  EXPECT_GE(top - rnd, 0.1);
  EXPECT_GE(top - last, 0.1);
}

TEST(SelectK, IsotropicDataTiesResolveToSmallestK) {
  const Matrix x = random_matrix(120, 12, 77);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < 120; ++i) ids.push_back("g" + std::to_string(i % 4));
  const std::vector<std::size_t> cands{8, 2, 4};
  const GapFunction flat = [](const Matrix&, std::span<const std::string>) { return 0.25; };
  EXPECT_EQ(select_k(x, ids, cands, flat).chosen_k, 2u);
  const auto r = select_k(x, ids, cands);
  for (double g : r.gap_diff) EXPECT_LT(std::abs(g), 0.1);
}

TEST(SelectK, Preconditions) {
  const Matrix x = random_matrix(10, 6, 1);
  const std::vector<std::string> one(10, "solo");
  const std::vector<std::size_t> cands{1, 2};
  try {
    select_k(x, one, cands);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewGames);
  }
  std::vector<std::string> two(10, "a");
  two[3] = "b";
  const std::vector<std::size_t> too_big{2, 6};
  try {
    select_k(x, two, too_big);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::KOutOfRange);
  }
}

}  // namespace
}  // namespace latent_split
