#include "latent_split/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "latent_split/error.hpp"
#include "latent_split/parallel.hpp"

namespace latent_split {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Column-major scratch matrix; Jacobi and Householder sweeps walk columns.
struct ColMajor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  ColMajor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* col(std::size_t j) noexcept { return data.data() + j * rows; }
  const double* col(std::size_t j) const noexcept { return data.data() + j * rows; }
  double& at(std::size_t i, std::size_t j) noexcept { return data[j * rows + i]; }
};

double dot(const double* a, const double* b, std::size_t n) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

ColMajor to_col_major(const Matrix& m, bool transpose) {
  const std::size_t rows = transpose ? m.cols() : m.rows();
  const std::size_t cols = transpose ? m.rows() : m.cols();
  ColMajor out(rows, cols);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (transpose) out.at(j, i) = m(i, j);
      else out.at(i, j) = m(i, j);
    }
  return out;
}

Matrix to_row_major(const ColMajor& c) {
  Matrix m(c.rows, c.cols);
  for (std::size_t j = 0; j < c.cols; ++j)
    for (std::size_t i = 0; i < c.rows; ++i) m(i, j) = c.data[j * c.rows + i];
  return m;
}

/// Householder reflectors of a QR factorization; reflector j acts on rows j..m-1.
struct Reflectors {
  std::size_t rows = 0;
  std::vector<std::vector<double>> v;  // unit vectors, empty when the column was already zero
};

/// Overwrites `a` (m x p, m >= p) with R in its top p x p block (zeros below)
/// and returns the reflectors.
Reflectors householder_qr(ColMajor& a) {
  const std::size_t m = a.rows;
  const std::size_t p = a.cols;
  Reflectors h;
  h.rows = m;
  h.v.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    double* x = a.col(j) + j;
    const std::size_t len = m - j;
    const double alpha = std::sqrt(dot(x, x, len));
    if (alpha == 0.0) continue;
    std::vector<double> v(x, x + len);
    const double sign = x[0] >= 0.0 ? 1.0 : -1.0;
    v[0] += sign * alpha;
    const double vnorm = std::sqrt(dot(v.data(), v.data(), len));
    for (double& e : v) e /= vnorm;
    for (std::size_t c = j; c < p; ++c) {
      double* y = a.col(c) + j;
      const double t = 2.0 * dot(v.data(), y, len);
      for (std::size_t i = 0; i < len; ++i) y[i] -= t * v[i];
    }
    x[0] = -sign * alpha;
    for (std::size_t i = 1; i < len; ++i) x[i] = 0.0;
    h.v[j] = std::move(v);
  }
  return h;
}

/// Replaces `m` (rows x cols, rows == h.rows) with Q·m.
void apply_q(const Reflectors& h, ColMajor& m) {
  for (std::size_t jj = h.v.size(); jj-- > 0;) {
    const auto& v = h.v[jj];
    if (v.empty()) continue;
    const std::size_t len = v.size();
    for (std::size_t c = 0; c < m.cols; ++c) {
      double* y = m.col(c) + jj;
      const double t = 2.0 * dot(v.data(), y, len);
      for (std::size_t i = 0; i < len; ++i) y[i] -= t * v[i];
    }
  }
}

/// Hestenes one-sided Jacobi on the columns of `w`, accumulating the
/// rotations into `v` (p x p, starts as identity). Columns whose norm is at or
/// below `negligible` are treated as zero.
void one_sided_jacobi(ColMajor& w, ColMajor& v, const SvdOptions& options, double negligible) {
  const std::size_t rows = w.rows;
  const std::size_t p = w.cols;
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t a = 0; a + 1 < p; ++a) {
      for (std::size_t b = a + 1; b < p; ++b) {
        double* wa = w.col(a);
        double* wb = w.col(b);
        const double gamma = dot(wa, wb, rows);
        if (gamma == 0.0) continue;
        const double alpha = dot(wa, wa, rows);
        const double beta = dot(wb, wb, rows);
        const double na = std::sqrt(alpha);
        const double nb = std::sqrt(beta);
        if (na <= negligible || nb <= negligible) continue;
        if (std::abs(gamma) <= options.tolerance * na * nb) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::abs(zeta) > 1e150
                             ? 1.0 / (2.0 * zeta)
                             : (zeta >= 0.0 ? 1.0 : -1.0) /
                                   (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double x = wa[i];
          const double y = wb[i];
          wa[i] = c * x - s * y;
          wb[i] = s * x + c * y;
        }
        double* va = v.col(a);
        double* vb = v.col(b);
        for (std::size_t i = 0; i < p; ++i) {
          const double x = va[i];
          const double y = vb[i];
          va[i] = c * x - s * y;
          vb[i] = s * x + c * y;
        }
      }
    }
    if (!rotated) return;
  }
  throw Error(ErrorCode::ConvergenceFailure,
              "Jacobi SVD did not converge within " + std::to_string(options.max_sweeps) +
                  " sweeps (tolerance " + std::to_string(options.tolerance) + ")");
}

/// Fills the columns flagged in `missing` with unit vectors orthogonal to every
/// other column, drawn from the standard basis in index order.
void complete_orthonormal(ColMajor& u, const std::vector<bool>& missing) {
  const std::size_t m = u.rows;
  std::vector<std::size_t> accepted;
  for (std::size_t j = 0; j < u.cols; ++j)
    if (!missing[j]) accepted.push_back(j);
  std::size_t next_axis = 0;
  std::vector<double> cand(m);
  for (std::size_t j = 0; j < u.cols; ++j) {
    if (!missing[j]) continue;
    while (true) {
      if (next_axis >= m) {
        throw Error(ErrorCode::ConvergenceFailure, "cannot complete left singular basis");
      }
      std::fill(cand.begin(), cand.end(), 0.0);
      cand[next_axis++] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k : accepted) {
          const double* q = u.col(k);
          const double proj = dot(q, cand.data(), m);
          for (std::size_t i = 0; i < m; ++i) cand[i] -= proj * q[i];
        }
      }
      const double norm = std::sqrt(dot(cand.data(), cand.data(), m));
      if (norm > 0.5) {
        double* dst = u.col(j);
        for (std::size_t i = 0; i < m; ++i) dst[i] = cand[i] / norm;
        accepted.push_back(j);
        break;
      }
    }
  }
}

}  // namespace

SvdFactorization svd(const Matrix& x, const SvdOptions& options) {
  if (x.rows() == 0 || x.cols() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "svd of an empty matrix");
  }
  for (double e : x.data()) {
    if (!std::isfinite(e)) throw Error(ErrorCode::NonFiniteValue, "svd input is not finite");
  }

  SvdFactorization result;
  Matrix centered;
  const Matrix* input = &x;
  if (options.center) {
    result.column_means.assign(x.cols(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) result.column_means[j] += x(i, j);
    for (double& mu : result.column_means) mu /= static_cast<double>(x.rows());
    centered = x;
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) centered(i, j) -= result.column_means[j];
    input = &centered;
  }

  // Factorize A = X (tall or square) or A = Xᵀ (wide), so A is m x p with m >= p.
  const bool transpose = input->rows() < input->cols();
  ColMajor a = to_col_major(*input, transpose);
  const std::size_t m = a.rows;
  const std::size_t p = a.cols;
  const double frob = frobenius_norm(*input);
  const double negligible = frob * static_cast<double>(m) * kEps;

  Reflectors reflectors;
  const bool use_qr = m > p;
  ColMajor w(0, 0);
  if (use_qr) {
    reflectors = householder_qr(a);
    w = ColMajor(p, p);
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t i = 0; i <= j; ++i) w.at(i, j) = a.at(i, j);
  } else {
    w = std::move(a);
  }

  ColMajor v(p, p);
  for (std::size_t j = 0; j < p; ++j) v.at(j, j) = 1.0;
  one_sided_jacobi(w, v, options, negligible);

  std::vector<double> sigma(p);
  for (std::size_t j = 0; j < p; ++j) sigma[j] = std::sqrt(dot(w.col(j), w.col(j), w.rows));
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return sigma[l] > sigma[r]; });

  // Left vectors of the Jacobi problem, in sorted order.
  ColMajor uw(w.rows, p);
  ColMajor vs(p, p);
  std::vector<double> s_sorted(p);
  std::vector<bool> missing(p, false);
  for (std::size_t k = 0; k < p; ++k) {
    const std::size_t j = order[k];
    s_sorted[k] = sigma[j];
    std::copy(v.col(j), v.col(j) + p, vs.col(k));
    if (sigma[j] <= negligible || sigma[j] == 0.0) {
      missing[k] = true;
      continue;
    }
    const double* src = w.col(j);
    double* dst = uw.col(k);
    for (std::size_t i = 0; i < w.rows; ++i) dst[i] = src[i] / sigma[j];
  }
  complete_orthonormal(uw, missing);

  ColMajor ua(m, p);
  if (use_qr) {
    for (std::size_t j = 0; j < p; ++j) std::copy(uw.col(j), uw.col(j) + p, ua.col(j));
    apply_q(reflectors, ua);
  } else {
    ua = std::move(uw);
  }

  // A = ua·S·vsᵀ. For the wide case X = Aᵀ = vs·S·uaᵀ.
  Matrix u_out = transpose ? to_row_major(vs) : to_row_major(ua);
  Matrix v_out = transpose ? to_row_major(ua) : to_row_major(vs);

  for (std::size_t k = 0; k < p; ++k) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < v_out.rows(); ++i) {
      const double mag = std::abs(v_out(i, k));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (v_out(arg, k) < 0.0) {
      for (std::size_t i = 0; i < v_out.rows(); ++i) v_out(i, k) = -v_out(i, k);
      for (std::size_t i = 0; i < u_out.rows(); ++i) u_out(i, k) = -u_out(i, k);
    }
  }

  result.u = std::move(u_out);
  result.s = std::move(s_sorted);
  result.v = std::move(v_out);
  return result;
}

Basis::Basis(Matrix columns) : columns_(std::move(columns)) {
  if (columns_.cols() > columns_.rows()) {
    throw Error(ErrorCode::InvalidArgument, "basis has more columns than its input dimension");
  }
  const Matrix gram = matmul_tn(columns_, columns_);
  for (std::size_t i = 0; i < gram.rows(); ++i)
    for (std::size_t j = 0; j < gram.cols(); ++j) {
      const double target = i == j ? 1.0 : 0.0;
      if (std::abs(gram(i, j) - target) > 1e-8) {
        throw Error(ErrorCode::InvalidArgument, "basis columns are not orthonormal");
      }
    }
}

Basis Basis::from_columns(const Matrix& v, const std::vector<std::size_t>& indices) {
  for (std::size_t idx : indices) {
    if (idx >= v.cols()) throw Error(ErrorCode::InvalidArgument, "basis column out of range");
  }
  return Basis(v.select_cols(indices));
}

Matrix project(const Matrix& x, const Basis& basis) {
  if (x.cols() != basis.dim_in()) {
    throw Error(ErrorCode::DimensionMismatch,
                "cannot project " + std::to_string(x.cols()) + "-wide rows onto a basis of " +
                    std::to_string(basis.dim_in()) + "-dim vectors");
  }
  return matmul(x, basis.columns());
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

Matrix pairwise_sq_dists(const Matrix& x) {
  const std::size_t n = x.rows();
  Matrix d(n, n);
  parallel_for(n, [&](std::size_t i) {
    auto xi = x.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::max(0.0, squared_distance(xi, x.row(j)));
      d(i, j) = v;
      d(j, i) = v;
    }
  });
  return d;
}

Matrix orthonormal_columns(const Matrix& a) {
  if (a.rows() < a.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "orthonormal_columns needs rows >= cols");
  }
  ColMajor work = to_col_major(a, false);
  const Reflectors h = householder_qr(work);
  ColMajor q(a.rows(), a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) q.at(j, j) = 1.0;
  apply_q(h, q);
  return to_row_major(q);
}

std::vector<double> principal_angle_cosines(const Matrix& a, const Matrix& b) {
  const auto f = svd(matmul_tn(a, b));
  std::vector<double> out = f.s;
  for (double& c : out) c = std::clamp(c, 0.0, 1.0);
  return out;
}

}  // namespace latent_split
