#include "latent_split/synth.hpp"

#include <cmath>
#include <string>

#include "latent_split/error.hpp"
#include "latent_split/linalg.hpp"
#include "latent_split/random.hpp"

namespace latent_split {

namespace {

constexpr StyleLabel kCycledStyles[] = {StyleLabel::Retro, StyleLabel::Modern, StyleLabel::Photoreal};

// Sub-stream ids under the configuration seed.
constexpr std::uint64_t kTargetStream = 1;
constexpr std::uint64_t kGenreStreamBase = 100;

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, SplitMix64& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.gaussian();
  return m;
}

/// Values are stored as float32 on disk; quantizing here makes the in-memory
/// dataset identical to what a save/load round trip yields.
double quantize(double v) { return static_cast<double>(static_cast<float>(v)); }

/// Unit offset directions (games x k*) in style-frame coordinates. When there
/// are at least k* games the set is redrawn until every style direction holds
/// at least a quarter of the mean offset energy (smallest eigenvalue of ZᵀZ
/// >= 0.25 · games / k*), so the planted frame is identifiable from the data.
Matrix offset_directions(std::size_t games, std::size_t ks, SplitMix64& rng) {
  constexpr int kMaxDraws = 1000;
  constexpr double kMinEnergyShare = 0.25;
  Matrix z(games, ks);
  for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
    for (std::size_t g = 0; g < games; ++g) {
      auto row = z.row(g);
      double norm = 0.0;
      do {
        norm = 0.0;
        for (double& v : row) {
          v = rng.gaussian();
          norm += v * v;
        }
      } while (norm == 0.0);
      norm = std::sqrt(norm);
      for (double& v : row) v /= norm;
    }
    if (games < ks) break;
    const double smallest = svd(z).s.back();
    if (smallest * smallest >= kMinEnergyShare * static_cast<double>(games) / static_cast<double>(ks)) break;
  }
  return z;
}

}  // namespace

SynthConfig standard_fixture(std::uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  return c;
}

void validate(const SynthConfig& c) {
  auto fail = [](const std::string& why) { return Error(ErrorCode::InvalidConfig, why); };
  if (c.n_genres == 0) throw fail("n_genres must be positive");
  if (c.games_per_genre == 0) throw fail("games_per_genre must be positive");
  if (c.samples_per_game < 2) throw fail("samples_per_game must be at least 2");
  if (c.latent_dim == 0) throw fail("latent_dim must be positive");
  if (c.style_dim == 0 || c.content_dim == 0) throw fail("style_dim and content_dim must be positive");
  if (c.style_dim + c.content_dim > c.latent_dim) {
    throw fail("style_dim + content_dim = " + std::to_string(c.style_dim + c.content_dim) +
               " exceeds latent_dim = " + std::to_string(c.latent_dim));
  }
  for (double s : {c.style_scale, c.content_scale, c.noise_scale}) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw fail("scales must be finite and non-negative");
  }
}

SynthResult generate(const SynthConfig& config) {
  validate(config);
  const std::size_t d = config.latent_dim;
  const std::size_t ks = config.style_dim;
  const std::size_t m = config.content_dim;
  const std::size_t rows_per_genre = config.games_per_genre * config.samples_per_game;
  const std::size_t n = config.n_genres * rows_per_genre;

  SynthResult out;
  GroundTruth& truth = out.truth;
  EmbeddingDataset& ds = out.dataset;
  ds.features = Matrix(n, d);
  ds.metadata.reserve(n);
  truth.content_coords = Matrix(n, m);

  {
    SplitMix64 rng(derive_seed(config.seed, kTargetStream));
    truth.target_map = gaussian_matrix(m, config.n_target_vars, rng);
  }

  std::size_t row = 0;
  for (std::size_t g = 0; g < config.n_genres; ++g) {
    SplitMix64 rng(derive_seed(config.seed, kGenreStreamBase + g));
    const std::string genre = "genre" + std::to_string(g);
    const Matrix frame = orthonormal_columns(gaussian_matrix(d, ks + m, rng));
    std::vector<std::size_t> style_cols(ks);
    std::vector<std::size_t> content_cols(m);
    for (std::size_t j = 0; j < ks; ++j) style_cols[j] = j;
    for (std::size_t j = 0; j < m; ++j) content_cols[j] = ks + j;
    const Matrix style_frame = frame.select_cols(style_cols);
    const Matrix content_frame = frame.select_cols(content_cols);

    const Matrix directions = offset_directions(config.games_per_genre, ks, rng);
    Matrix offsets(config.games_per_genre, d);
    for (std::size_t game = 0; game < config.games_per_genre; ++game) {
      for (std::size_t a = 0; a < d; ++a) {
        double s = 0.0;
        for (std::size_t j = 0; j < ks; ++j) s += style_frame(a, j) * directions(game, j);
        offsets(game, a) = config.style_scale * s;
      }
    }

    for (std::size_t game = 0; game < config.games_per_genre; ++game) {
      const std::string game_id = genre + "_game" + std::to_string(game);
      const StyleLabel style = kCycledStyles[game % 3];
      for (std::size_t s = 0; s < config.samples_per_game; ++s, ++row) {
        auto c = truth.content_coords.row(row);
        for (double& v : c) v = config.content_scale * rng.gaussian();
        auto x = ds.features.row(row);
        for (std::size_t a = 0; a < d; ++a) {
          double v = offsets(game, a);
          for (std::size_t j = 0; j < m; ++j) v += content_frame(a, j) * c[j];
          x[a] = v;
        }
        for (std::size_t a = 0; a < d; ++a) x[a] = quantize(x[a] + config.noise_scale * rng.gaussian());
        ds.metadata.push_back(SampleMetadata{game_id, genre, style,
                                             "synth/" + game_id + "/" + std::to_string(s)});
      }
    }
    truth.genre_ids.push_back(genre);
    truth.style_frames.push_back(style_frame);
    truth.content_frames.push_back(content_frame);
    truth.game_offsets.push_back(std::move(offsets));
  }

  if (config.n_target_vars > 0) {
    TargetTable targets;
    targets.values = matmul(truth.content_coords, truth.target_map);
    for (double& v : targets.values.data()) v = quantize(v);
    for (std::size_t v = 0; v < config.n_target_vars; ++v) {
      targets.variable_names.push_back("var" + std::to_string(v));
    }
    ds.targets = std::move(targets);
  }
  return out;
}

}  // namespace latent_split
