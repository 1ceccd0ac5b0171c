#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "latent_split/decomposition.hpp"
#include "latent_split/error.hpp"
#include "latent_split/linalg.hpp"
#include "latent_split/probes.hpp"
#include "latent_split/synth.hpp"

namespace latent_split {
namespace {

double largest_angle_degrees(const Matrix& a, const Matrix& b) {
  const auto cosines = principal_angle_cosines(a, b);
  const double smallest = std::clamp(cosines.back(), -1.0, 1.0);
  return std::acos(smallest) * 180.0 / std::numbers::pi;
}

SynthConfig small_config(std::uint64_t seed) {
  SynthConfig c;
  c.n_genres = 2;
  c.games_per_genre = 6;
  c.samples_per_game = 20;
  c.latent_dim = 24;
  c.style_dim = 3;
  c.content_dim = 5;
  c.n_target_vars = 4;
  c.seed = seed;
  return c;
}

TEST(Synth, StandardFixtureShape) {
  const auto c = standard_fixture(9);
  EXPECT_EQ(c.latent_dim, 64u);
  EXPECT_EQ(c.style_dim, 4u);
  EXPECT_EQ(c.content_dim, 16u);
  EXPECT_EQ(c.games_per_genre, 9u);
  EXPECT_EQ(c.samples_per_game, 200u);
  EXPECT_EQ(c.style_scale, 10.0);
  EXPECT_EQ(c.content_scale, 1.0);
  EXPECT_EQ(c.noise_scale, 0.1);
  EXPECT_EQ(c.seed, 9u);
}

TEST(Synth, DeterministicInSeed) {
  const auto a = generate(small_config(4));
  const auto b = generate(small_config(4));
  EXPECT_EQ(a.dataset, b.dataset);
  EXPECT_EQ(a.truth.content_coords, b.truth.content_coords);
  EXPECT_NE(generate(small_config(5)).dataset.features, a.dataset.features);
}

TEST(Synth, RejectsInvalidConfigs) {
  auto expect_invalid = [](SynthConfig c) {
    try {
      validate(c);
      ADD_FAILURE() << "accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
    }
    EXPECT_THROW(generate(c), Error);
  };
  auto c = small_config(0);
  c.style_dim = 20;
  expect_invalid(c);  // 20 + 5 > 24
  c = small_config(0);
  c.style_scale = -1.0;
  expect_invalid(c);
  c = small_config(0);
  c.noise_scale = std::nan("");
  expect_invalid(c);
  c = small_config(0);
  c.samples_per_game = 1;
  expect_invalid(c);
  c = small_config(0);
  c.n_genres = 0;
  expect_invalid(c);
  c = small_config(0);
  c.content_dim = 0;
  expect_invalid(c);
  c = small_config(0);
  c.style_dim = 4;
  c.content_dim = 20;
  EXPECT_NO_THROW(validate(c));  // k* + m == D is allowed
}

TEST(Synth, LayoutAndMetadata) {
  const auto r = generate(small_config(1));
  const auto& ds = r.dataset;
  ASSERT_EQ(ds.n_rows(), 2u * 6u * 20u);
  EXPECT_EQ(ds.n_cols(), 24u);
  EXPECT_NO_THROW(validate(ds));
  EXPECT_EQ(list_genres(ds), (std::vector<std::string>{"genre0", "genre1"}));
  EXPECT_EQ(ds.metadata[0].game_id, "genre0_game0");
  EXPECT_EQ(ds.metadata[20].game_id, "genre0_game1");
  EXPECT_EQ(ds.metadata[120].game_id, "genre1_game0");
  EXPECT_EQ(ds.metadata[0].style_label, StyleLabel::Retro);
  EXPECT_EQ(ds.metadata[20].style_label, StyleLabel::Modern);
  EXPECT_EQ(ds.metadata[40].style_label, StyleLabel::Photoreal);
  EXPECT_EQ(ds.metadata[60].style_label, StyleLabel::Retro);
  EXPECT_EQ(ds.metadata[23].source_frame, "synth/genre0_game1/3");
  ASSERT_TRUE(ds.targets.has_value());
  EXPECT_EQ(ds.targets->variable_names, (std::vector<std::string>{"var0", "var1", "var2", "var3"}));
  EXPECT_EQ(ds.targets->values.rows(), ds.n_rows());
}

TEST(Synth, ValuesAreFloat32Representable) {
  const auto r = generate(small_config(2));
  for (double v : r.dataset.features.data()) EXPECT_EQ(v, static_cast<double>(static_cast<float>(v)));
  for (double v : r.dataset.targets->values.data()) EXPECT_EQ(v, static_cast<double>(static_cast<float>(v)));
}

TEST(Synth, FramesAndOffsetsMatchTheModel) {
  const auto cfg = small_config(3);
  const auto r = generate(cfg);
  for (std::size_t g = 0; g < cfg.n_genres; ++g) {
    const Matrix& s = r.truth.style_frames[g];
    const Matrix& c = r.truth.content_frames[g];
    const Matrix sc = matmul_tn(s, c);
    for (double v : sc.data()) EXPECT_NEAR(v, 0.0, 1e-12);
    const Matrix ss = matmul_tn(s, s);
    for (std::size_t i = 0; i < ss.rows(); ++i)
      for (std::size_t j = 0; j < ss.cols(); ++j) EXPECT_NEAR(ss(i, j), i == j ? 1.0 : 0.0, 1e-12);

    const Matrix& offsets = r.truth.game_offsets[g];
    for (std::size_t game = 0; game < cfg.games_per_genre; ++game) {
      double norm = 0.0;
      for (double v : offsets.row(game)) norm += v * v;
      EXPECT_NEAR(std::sqrt(norm), cfg.style_scale, 1e-9);
      // Offset lies in the style span: removing its projection leaves nothing.
      const Matrix coeff = matmul(offsets.select_rows(std::vector<std::size_t>{game}), s);
      const Matrix back = matmul(coeff, s.transposed());
      for (std::size_t a = 0; a < cfg.latent_dim; ++a) EXPECT_NEAR(back(0, a), offsets(game, a), 1e-9);
    }
  }
}

TEST(Synth, NoiselessRowsReconstructExactly) {
  auto cfg = small_config(6);
  cfg.noise_scale = 0.0;
  const auto r = generate(cfg);
  const Matrix& f = r.truth.content_frames[0];
  for (std::size_t row = 0; row < 120; ++row) {
    const std::size_t game = row / cfg.samples_per_game;
    for (std::size_t a = 0; a < cfg.latent_dim; ++a) {
      double v = r.truth.game_offsets[0](game, a);
      for (std::size_t j = 0; j < cfg.content_dim; ++j) v += f(a, j) * r.truth.content_coords(row, j);
      EXPECT_NEAR(r.dataset.features(row, a), v, 1e-5 * (1.0 + std::abs(v)));
    }
  }
}

TEST(Synth, TopDirectionsRecoverPlantedStyleSpan) {
  const auto r = generate(standard_fixture(0));
  for (std::size_t g = 0; g < r.truth.genre_ids.size(); ++g) {
    const auto genre = filter_by_genre(r.dataset, r.truth.genre_ids[g]);
    const auto sp = split(svd(genre.features), 4, {Strategy::TopK, {}});
    EXPECT_LT(largest_angle_degrees(sp.style_basis.columns(), r.truth.style_frames[g]), 5.0)
        << r.truth.genre_ids[g];
  }
}

TEST(Synth, RecoveryImprovesWithStyleToContentRatio) {
  double previous = 90.0;
  for (double ratio : {2.0, 5.0, 10.0}) {
    auto cfg = standard_fixture(12);
    cfg.n_genres = 1;
    cfg.style_scale = ratio;
    const auto r = generate(cfg);
    const auto sp = split(svd(r.dataset.features), 4, {Strategy::TopK, {}});
    const double angle = largest_angle_degrees(sp.style_basis.columns(), r.truth.style_frames[0]);
    EXPECT_LE(angle, previous) << "ratio " << ratio;
    previous = angle;
  }
  EXPECT_LT(previous, 5.0);
}

TEST(Synth, TargetsAreExactlyRecoverableFromNoiselessContent) {
  auto cfg = standard_fixture(8);
  cfg.n_genres = 1;
  cfg.noise_scale = 0.0;
  const auto r = generate(cfg);
  const auto& ds = r.dataset;
  const auto s = random_row_split(ds.n_rows(), 0.3, 1);

  const Matrix content = project(ds.features, Basis(r.truth.content_frames[0]));
  const auto truth_report = regression_probe(content, *ds.targets, s, "content");
  EXPECT_NEAR(truth_report.mean_r2, 1.0, 1e-6);

  // The estimated content subspace keeps a small style leakage from the
  // finite-sample mixing of the top directions.
  const auto sp = split(svd(ds.features), 4, {Strategy::TopK, {}});
  const auto svd_report = regression_probe(embed_content(ds.features, sp), *ds.targets, s, "content");
  EXPECT_GT(svd_report.mean_r2, 0.99);
}

}  // namespace
}  // namespace latent_split
