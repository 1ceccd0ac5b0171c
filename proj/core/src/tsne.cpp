#include "latent_split/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "latent_split/error.hpp"
#include "latent_split/linalg.hpp"
#include "latent_split/parallel.hpp"
#include "latent_split/random.hpp"

namespace latent_split {

std::string_view to_string(TsneInit init) { return init == TsneInit::Pca ? "pca" : "random"; }

std::optional<TsneInit> parse_tsne_init(std::string_view text) {
  if (text == "pca") return TsneInit::Pca;
  if (text == "random") return TsneInit::Random;
  return std::nullopt;
}

namespace tsne {

namespace {

constexpr double kEntropyTolerance = 1e-7;
constexpr int kBisectionSteps = 64;
constexpr int kBracketSteps = 1100;

/// Entropy (nats) of P(j) ∝ exp(−beta·d_j); writes the normalized P into `p`.
double row_entropy(const std::vector<double>& d, double beta, std::vector<double>& p) {
  double z = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    p[j] = std::exp(-beta * d[j]);
    z += p[j];
  }
  double weighted = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    p[j] /= z;
    weighted += p[j] * d[j];
  }
  return std::log(z) + beta * weighted;
}

/// Bandwidth search for one row. `d` holds distances to the other points,
/// shifted so the smallest is zero (P is unchanged by the shift).
double calibrate_row(const std::vector<double>& d, double target, std::size_t row,
                     std::vector<double>& p) {
  const double perplexity = std::exp(target);
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(d.size());

  auto fail = [&](const std::string& why) {
    return Error(ErrorCode::PerplexityInfeasible,
                 "row " + std::to_string(row) + ": perplexity " + std::to_string(perplexity) +
                     " unreachable (" + why + ")");
  };

  double beta = 1.0 / mean;
  double h = row_entropy(d, beta, p);
  if (std::abs(h - target) > kEntropyTolerance) {
    double lo = 0.0;
    double hi = 0.0;
    if (h > target) {
      lo = beta;
      hi = beta * 2.0;
      int steps = 0;
      while ((h = row_entropy(d, hi, p)) > target) {
        lo = hi;
        hi *= 2.0;
        if (++steps > kBracketSteps || !std::isfinite(hi)) throw fail("too many duplicate points");
      }
    } else {
      hi = beta;
      lo = beta / 2.0;
      int steps = 0;
      while ((h = row_entropy(d, lo, p)) < target) {
        hi = lo;
        lo /= 2.0;
        if (++steps > kBracketSteps || lo == 0.0) throw fail("too few distinct neighbours");
      }
    }
    // H is decreasing in beta: H(lo) >= target >= H(hi).
    for (int step = 0; step < kBisectionSteps; ++step) {
      beta = std::sqrt(lo * hi);
      h = row_entropy(d, beta, p);
      if (std::abs(h - target) <= kEntropyTolerance) break;
      if (h > target) lo = beta;
      else hi = beta;
    }
  }
  if (std::abs(std::exp(h) / perplexity - 1.0) > 1e-4) throw fail("bisection did not converge");
  return beta;
}

Matrix pca_init(const Matrix& x) {
  const auto f = svd(x, SvdOptions{.center = true});
  const std::size_t n = x.rows();
  Matrix y(n, 2);
  const std::size_t dims = std::min<std::size_t>(2, f.s.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < dims; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < x.cols(); ++k) s += (x(i, k) - f.column_means[k]) * f.v(k, c);
      y(i, c) = s;
    }
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += y(i, 0);
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) var += (y(i, 0) - mean) * (y(i, 0) - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  if (sd > 0.0) {
    for (double& v : y.data()) v = v / sd * 1e-4;
  }
  return y;
}

Matrix random_init(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Matrix y(n, 2);
  for (double& v : y.data()) v = 1e-4 * rng.gaussian();
  return y;
}

/// Student-t kernel 1 / (1 + ‖yᵢ − yⱼ‖²) with a zero diagonal; returns the sum.
double student_kernel(const Matrix& y, Matrix& num) {
  const std::size_t n = y.rows();
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = y(i, 0) - y(j, 0);
      const double dy = y(i, 1) - y(j, 1);
      const double v = 1.0 / (1.0 + dx * dx + dy * dy);
      num(i, j) = v;
      num(j, i) = v;
      z += 2.0 * v;
    }
  }
  return z;
}

void gradient_into(const Matrix& p, const Matrix& y, const Matrix& num, double z,
                   double exaggeration, Matrix& grad) {
  const std::size_t n = y.rows();
  const std::size_t dims = y.cols();
  for (std::size_t i = 0; i < n; ++i) {
    auto g = grad.row(i);
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = (exaggeration * p(i, j) - num(i, j) / z) * num(i, j);
      for (std::size_t c = 0; c < dims; ++c) g[c] += w * (y(i, c) - y(j, c));
    }
    for (std::size_t c = 0; c < dims; ++c) g[c] *= 4.0;
  }
}

}  // namespace

JointProbabilities joint_probabilities(const Matrix& x, double perplexity) {
  const std::size_t n = x.rows();
  if (n < 2) throw Error(ErrorCode::PerplexityInfeasible, "need at least two points");
  if (!(perplexity > 0.0) || !std::isfinite(perplexity)) {
    throw Error(ErrorCode::PerplexityInfeasible, "perplexity must be positive and finite");
  }
  const Matrix d = pairwise_sq_dists(x);
  double max_d = 0.0;
  for (double v : d.data()) max_d = std::max(max_d, v);
  if (max_d == 0.0) throw Error(ErrorCode::PerplexityInfeasible, "all rows are identical");

  const double target = std::log(perplexity);
  JointProbabilities out{Matrix(n, n), std::vector<double>(n, 0.0)};
  Matrix cond(n, n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> di;
    di.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) di.push_back(d(i, j));
    const double dmin = *std::min_element(di.begin(), di.end());
    double spread = 0.0;
    for (double& v : di) {
      v -= dmin;
      spread = std::max(spread, v);
    }
    std::vector<double> pi(di.size());
    // Distances equal up to rounding: every bandwidth gives the uniform row.
    if (spread <= 1e-12 * (dmin + spread)) {
      std::fill(pi.begin(), pi.end(), 1.0 / static_cast<double>(di.size()));
      out.betas[i] = 0.0;
    } else {
      out.betas[i] = calibrate_row(di, target, i, pi);
    }
    for (std::size_t j = 0, k = 0; j < n; ++j)
      if (j != i) cond(i, j) = pi[k++];
  });
  const double denom = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.p(i, j) = (cond(i, j) + cond(j, i)) / denom;
  return out;
}

double kl_divergence(const Matrix& p, const Matrix& y) {
  const std::size_t n = y.rows();
  Matrix num(n, n);
  const double z = student_kernel(y, num);
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || p(i, j) <= 0.0) continue;
      kl += p(i, j) * std::log(p(i, j) * z / num(i, j));
    }
  return std::max(0.0, kl);
}

Matrix kl_gradient(const Matrix& p, const Matrix& y, double exaggeration) {
  const std::size_t n = y.rows();
  Matrix num(n, n);
  const double z = student_kernel(y, num);
  Matrix grad(n, y.cols());
  gradient_into(p, y, num, z, exaggeration, grad);
  return grad;
}

TsneEmbedding fit(const Matrix& x, const TsneConfig& config) {
  const std::size_t n = x.rows();
  if (n < 4) throw Error(ErrorCode::PerplexityInfeasible, "t-SNE needs at least 4 points");
  const double bound = static_cast<double>(n - 1) / 3.0;
  if (!(config.perplexity < bound)) {
    throw Error(ErrorCode::PerplexityInfeasible,
                "perplexity " + std::to_string(config.perplexity) + " must be below (N-1)/3 = " +
                    std::to_string(bound));
  }
  if (config.n_iter == 0) throw Error(ErrorCode::InvalidArgument, "n_iter must be positive");

  const Matrix p = joint_probabilities(x, config.perplexity).p;
  Matrix y = config.init == TsneInit::Pca ? pca_init(x) : random_init(n, config.seed);

  Matrix update(n, 2);
  Matrix gains(n, 2, 1.0);
  Matrix grad(n, 2);
  Matrix num(n, n);
  TsneEmbedding result;

  for (std::size_t iter = 0; iter < config.n_iter; ++iter) {
    const double exaggeration = iter < config.exaggeration_iters ? config.early_exaggeration : 1.0;
    const double momentum =
        iter < config.momentum_switch_iter ? config.initial_momentum : config.final_momentum;
    const double z = student_kernel(y, num);
    gradient_into(p, y, num, z, exaggeration, grad);

    auto g = grad.data();
    auto u = update.data();
    auto gn = gains.data();
    for (std::size_t k = 0; k < g.size(); ++k) {
      gn[k] = ((g[k] > 0.0) != (u[k] > 0.0)) ? gn[k] + 0.2 : gn[k] * 0.8;
      gn[k] = std::max(gn[k], config.min_gain);
      u[k] = momentum * u[k] - config.learning_rate * gn[k] * g[k];
    }
    double mean[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < 2; ++c) {
        y(i, c) += update(i, c);
        mean[c] += y(i, c);
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < 2; ++c) y(i, c) -= mean[c] / static_cast<double>(n);
    for (double v : y.data()) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFiniteGradient,
                    "t-SNE diverged at iteration " + std::to_string(iter + 1));
      }
    }
    if (config.checkpoint_every > 0 && (iter + 1) % config.checkpoint_every == 0) {
      result.kl_trace.push_back({iter + 1, kl_divergence(p, y)});
    }
  }
  result.final_kl = kl_divergence(p, y);
  result.coords = std::move(y);
  return result;
}

}  // namespace tsne

}  // namespace latent_split
