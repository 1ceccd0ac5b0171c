#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "latent_split/dataset.hpp"

namespace latent_split {

/// Planted style/content generative model.
///
/// Per genre a random orthonormal D x (k* + m) frame is drawn; its first k*
/// columns are the style directions, the remaining m the content directions.
/// Each game gets a constant offset of norm `style_scale` inside the style
/// directions, with the set of offset directions spread so that no style
/// direction is nearly empty (see synth.cpp); each sample adds content coordinates c ~ N(0, content_scale²)
/// in the content directions and isotropic noise of std `noise_scale`.
/// Targets are c·W for one target map W shared by all genres.
struct SynthConfig {
  std::size_t n_genres = 3;
  std::size_t games_per_genre = 9;
  std::size_t samples_per_game = 200;
  std::size_t latent_dim = 64;
  std::size_t style_dim = 4;
  std::size_t content_dim = 16;
  double style_scale = 10.0;
  double content_scale = 1.0;
  double noise_scale = 0.1;
  std::size_t n_target_vars = 8;
  std::uint64_t seed = 0;
};

/// D=64, k*=4, m=16, 9 games/genre (3 per style), 200 samples/game,
/// σ_s=10, σ_c=1, σ_n=0.1.
SynthConfig standard_fixture(std::uint64_t seed = 0);

struct GroundTruth {
  std::vector<std::string> genre_ids;
  std::vector<Matrix> style_frames;    // per genre, D x k*
  std::vector<Matrix> content_frames;  // per genre, D x m
  std::vector<Matrix> game_offsets;    // per genre, games x D
  Matrix content_coords;               // N x m, the planted c of every row
  Matrix target_map;                   // m x n_target_vars
};

struct SynthResult {
  EmbeddingDataset dataset;
  GroundTruth truth;
};

/// Throws InvalidConfig unless k* + m <= D, scales are non-negative, and every
/// count is positive (samples_per_game >= 2).
void validate(const SynthConfig& config);

/// Rows are ordered genre-major, then game, then sample. Genre g is "genre<g>",
/// game j of it "genre<g>_game<j>", with style labels retro/modern/photoreal
/// cycled over j. Deterministic in `config.seed`.
SynthResult generate(const SynthConfig& config);

}  // namespace latent_split
