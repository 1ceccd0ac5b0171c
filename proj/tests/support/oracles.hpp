#pragma once

// Independent reference implementations used as test oracles. None of these
// call into the library's numerical code; they share only the Matrix type.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "latent_split/dataset.hpp"
#include "latent_split/matrix.hpp"

namespace latent_split::testing {

/// Standard-normal entries from std::mt19937_64, scaled.
Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0);

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // columns, same order as values
};

/// Cyclic two-sided Jacobi on a symmetric matrix.
SymmetricEigen jacobi_eigen(const Matrix& symmetric);

Matrix gram(const Matrix& x);  // XᵀX by explicit triple loop

/// Rousseeuw silhouette by brute force, with s = 0 for singletons and when
/// max(a, b) = 0.
std::vector<double> naive_silhouette(const Matrix& x, const std::vector<std::size_t>& labels);

/// Least squares with an unpenalized intercept through the pseudoinverse of
/// the centred Gram matrix (eigenvalues below rel_cut·λ_max dropped).
struct LeastSquares {
  std::vector<double> weights;
  double intercept = 0.0;
};
LeastSquares pinv_least_squares(const Matrix& x, const std::vector<double>& y,
                                double rel_cut = 1e-12);

/// Entropy (nats) of the conditional row P(·|i) ∝ exp(−beta·d_ij) over j ≠ i.
double conditional_entropy(const Matrix& sq_dists, std::size_t i, double beta);

/// Σ p log(p/q) with Student-t q, written independently of the library.
double naive_kl(const Matrix& p, const Matrix& y);

/// Style classes fully determined by two feature directions: each of the
/// three labels has a class centre, each game adds a small offset, each row
/// small isotropic noise. One genre, `games_per_style` games per label.
EmbeddingDataset separable_style_fixture(std::size_t games_per_style, std::size_t rows_per_game,
                                         std::size_t dim, std::uint64_t seed);

/// Unique empty directory under the system temp path, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag);
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string slurp(const std::filesystem::path& path);

}  // namespace latent_split::testing
