#pragma once

#include <cstddef>
#include <vector>

#include "latent_split/matrix.hpp"

namespace latent_split {

/// Thin SVD X = U·diag(s)·Vᵀ with r = min(N, D) directions.
///
/// Singular values are sorted descending (stable by index on ties). Each
/// column of `v` has its largest-magnitude entry non-negative (first such
/// entry on ties); the matching column of `u` is flipped with it.
struct SvdFactorization {
  Matrix u;               // N x r
  std::vector<double> s;  // r, descending, >= 0
  Matrix v;               // D x r, columns are right singular vectors
  std::vector<double> column_means;  // non-empty only when fit with centering

  std::size_t rank_capacity() const noexcept { return s.size(); }
  std::size_t dim() const noexcept { return v.rows(); }
};

struct SvdOptions {
  /// Subtract column means before factorizing (PCA-style). Off by default:
  /// the decomposition works on the raw feature matrix.
  bool center = false;
  int max_sweeps = 100;
  /// A column pair is rotated while |aₚ·a_q| > tolerance·‖aₚ‖‖a_q‖.
  double tolerance = 1e-12;
};

/// One-sided (Hestenes) Jacobi SVD. Tall inputs are first reduced to a square
/// triangular factor with Householder QR; wide inputs are factorized through
/// their transpose. Single-threaded and bit-deterministic.
///
/// Throws ConvergenceFailure when `max_sweeps` sweeps still rotate.
SvdFactorization svd(const Matrix& x, const SvdOptions& options = {});

/// Orthonormal basis stored as the columns of a D x m matrix.
class Basis {
 public:
  Basis() = default;
  /// Checks ‖BᵀB − I‖_max ≤ 1e-8; throws InvalidArgument otherwise.
  explicit Basis(Matrix columns);

  /// Columns `indices` of `v`, in the given order.
  static Basis from_columns(const Matrix& v, const std::vector<std::size_t>& indices);

  std::size_t dim_in() const noexcept { return columns_.rows(); }
  std::size_t dim_out() const noexcept { return columns_.cols(); }
  const Matrix& columns() const noexcept { return columns_; }

 private:
  Matrix columns_;
};

/// X·B. Throws DimensionMismatch when X has a different width than B's input.
Matrix project(const Matrix& x, const Basis& basis);

/// Squared Euclidean distance between two equal-length rows, accumulated in
/// ascending coordinate order so d(i, j) and d(j, i) are bit-identical.
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

/// N x N matrix of ‖xᵢ − xⱼ‖², symmetric with a zero diagonal.
Matrix pairwise_sq_dists(const Matrix& x);

/// Thin Q of a Householder QR of `a` (rows >= cols): an orthonormal basis for
/// its column space when `a` has full column rank.
Matrix orthonormal_columns(const Matrix& a);

/// Cosines of the principal angles between span(A) and span(B), where both
/// have orthonormal columns; descending.
std::vector<double> principal_angle_cosines(const Matrix& a, const Matrix& b);

}  // namespace latent_split
