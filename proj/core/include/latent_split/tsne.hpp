#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "latent_split/matrix.hpp"

namespace latent_split {

enum class TsneInit { Pca, Random };

std::string_view to_string(TsneInit init);
std::optional<TsneInit> parse_tsne_init(std::string_view text);

struct TsneConfig {
  double perplexity = 30.0;
  std::size_t n_iter = 1000;
  double early_exaggeration = 12.0;
  std::size_t exaggeration_iters = 250;
  double learning_rate = 200.0;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::size_t momentum_switch_iter = 250;
  double min_gain = 0.01;
  std::size_t checkpoint_every = 50;
  std::uint64_t seed = 0;
  TsneInit init = TsneInit::Pca;
};

struct KlCheckpoint {
  std::size_t iteration = 0;  // 1-based count of completed iterations
  double kl = 0.0;
};

struct TsneEmbedding {
  Matrix coords;  // N x 2
  double final_kl = 0.0;
  std::vector<KlCheckpoint> kl_trace;
};

namespace tsne {

struct JointProbabilities {
  Matrix p;                   // symmetric, zero diagonal, sums to 1
  std::vector<double> betas;  // per-row precision: P(j|i) ∝ exp(−beta·‖xᵢ − xⱼ‖²)
};

/// Calibrates each row's Gaussian bandwidth by bisection on log(beta) so the
/// conditional distribution has perplexity exp(H) within 1e-4 relative, then
/// symmetrizes P = (P(j|i) + P(i|j)) / 2N.
///
/// A row whose neighbours are equidistant (to 1e-12 relative) has a bandwidth-independent
/// uniform conditional and is accepted as such. Throws PerplexityInfeasible
/// when every row is identical, perplexity is not positive, or a row's target
/// cannot be reached (e.g. heavy duplication).
JointProbabilities joint_probabilities(const Matrix& x, double perplexity);

/// KL(P‖Q) with Student-t Q (one degree of freedom) at coordinates `y`.
double kl_divergence(const Matrix& p, const Matrix& y);

/// Gradient of KL(exaggeration·P‖Q) with respect to `y`:
/// 4 Σⱼ (exaggeration·pᵢⱼ − qᵢⱼ)(yᵢ − yⱼ) / (1 + ‖yᵢ − yⱼ‖²).
Matrix kl_gradient(const Matrix& p, const Matrix& y, double exaggeration = 1.0);

/// Exact O(N²) t-SNE into two dimensions: gradient descent with momentum,
/// per-coordinate adaptive gains, and early exaggeration. Deterministic for a
/// given seed.
///
/// Requires N >= 4 and perplexity < (N − 1) / 3 (PerplexityInfeasible
/// otherwise); throws NonFiniteGradient if the iterate diverges.
TsneEmbedding fit(const Matrix& x, const TsneConfig& config);

}  // namespace tsne

}  // namespace latent_split
