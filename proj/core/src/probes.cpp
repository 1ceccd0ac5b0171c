#include "latent_split/probes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "latent_split/error.hpp"
#include "latent_split/random.hpp"

namespace latent_split {

double LinearModel::predict(std::span<const double> row) const noexcept {
  double s = intercept;
  for (std::size_t k = 0; k < weights.size(); ++k) s += weights[k] * row[k];
  return s;
}

namespace {

/// Centred, ridge-regularized normal equations of one design matrix,
/// factorized once and reused for every target column.
class RidgeSystem {
 public:
  RidgeSystem(const Matrix& x, const RidgeOptions& options) : x_(x), p_(x.cols()) {
    const std::size_t n = x.rows();
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "regression needs at least one row");
    for (double v : x.data()) {
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "regression design is not finite");
    }
    mean_.assign(p_, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < p_; ++k) mean_[k] += x(i, k);
    for (double& m : mean_) m /= static_cast<double>(n);

    chol_ = Matrix(p_, p_);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = x.row(i);
      for (std::size_t a = 0; a < p_; ++a) {
        const double ca = row[a] - mean_[a];
        for (std::size_t b = 0; b <= a; ++b) chol_(a, b) += ca * (row[b] - mean_[b]);
      }
    }
    double trace = 0.0;
    double max_diag = 0.0;
    for (std::size_t a = 0; a < p_; ++a) {
      trace += chol_(a, a);
      max_diag = std::max(max_diag, chol_(a, a));
    }
    if (trace == 0.0) {
      constant_design_ = true;
      return;
    }
    const double lambda = options.ridge_scale * trace / static_cast<double>(p_);
    for (std::size_t a = 0; a < p_; ++a) chol_(a, a) += lambda;

    // In-place lower Cholesky.
    const double floor = 1e-14 * (max_diag + lambda);
    for (std::size_t j = 0; j < p_; ++j) {
      double d = chol_(j, j);
      for (std::size_t k = 0; k < j; ++k) d -= chol_(j, k) * chol_(j, k);
      if (!(d > floor)) {
        throw Error(ErrorCode::DegenerateDesign,
                    "normal equations are not positive definite at column " + std::to_string(j));
      }
      const double ljj = std::sqrt(d);
      chol_(j, j) = ljj;
      for (std::size_t i = j + 1; i < p_; ++i) {
        double s = chol_(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= chol_(i, k) * chol_(j, k);
        chol_(i, j) = s / ljj;
      }
    }
  }

  LinearModel solve(std::span<const double> y) const {
    const std::size_t n = x_.rows();
    if (y.size() != n) throw Error(ErrorCode::LengthMismatch, "target length differs from design rows");
    double y_mean = 0.0;
    for (double v : y) y_mean += v;
    y_mean /= static_cast<double>(n);

    LinearModel model;
    model.weights.assign(p_, 0.0);
    if (!constant_design_) {
      std::vector<double> rhs(p_, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        auto row = x_.row(i);
        const double r = y[i] - y_mean;
        for (std::size_t k = 0; k < p_; ++k) rhs[k] += (row[k] - mean_[k]) * r;
      }
      auto& w = model.weights;
      for (std::size_t i = 0; i < p_; ++i) {
        double s = rhs[i];
        for (std::size_t k = 0; k < i; ++k) s -= chol_(i, k) * w[k];
        w[i] = s / chol_(i, i);
      }
      for (std::size_t i = p_; i-- > 0;) {
        double s = w[i];
        for (std::size_t k = i + 1; k < p_; ++k) s -= chol_(k, i) * w[k];
        w[i] = s / chol_(i, i);
      }
    }
    model.intercept = y_mean;
    for (std::size_t k = 0; k < p_; ++k) model.intercept -= mean_[k] * model.weights[k];
    return model;
  }

 private:
  const Matrix& x_;
  std::size_t p_;
  std::vector<double> mean_;
  Matrix chol_;
  bool constant_design_ = false;
};

void check_rows(std::span<const std::size_t> rows, std::size_t n, const char* what) {
  for (std::size_t r : rows) {
    if (r >= n) {
      throw Error(ErrorCode::DimensionMismatch,
                  std::string(what) + " row " + std::to_string(r) + " out of range");
    }
  }
}

}  // namespace

LinearModel fit_linear_regression(const Matrix& x, std::span<const double> y,
                                  const RidgeOptions& options) {
  return RidgeSystem(x, options).solve(y);
}

std::optional<double> r2_score(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw Error(ErrorCode::LengthMismatch, "r2_score: " + std::to_string(y_true.size()) +
                                               " targets vs " + std::to_string(y_pred.size()) +
                                               " predictions");
  }
  if (y_true.size() < 2) throw Error(ErrorCode::LengthMismatch, "r2_score needs at least two values");
  const double n = static_cast<double>(y_true.size());
  double mean = 0.0;
  for (double v : y_true) mean += v;
  mean /= n;
  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
    ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
  }
  if (ss_tot / n < 1e-12) return std::nullopt;
  return 1.0 - ss_res / ss_tot;
}

RowSplit random_row_split(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "test fraction must lie in (0, 1)");
  }
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_fraction));
  if (n_test == 0 || n_test >= n) {
    throw Error(ErrorCode::InvalidArgument, "split leaves an empty train or test set");
  }
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  SplitMix64 rng(seed);
  RowSplit out;
  out.test = sample_without_replacement(all, n_test, rng);
  std::sort(out.test.begin(), out.test.end());
  std::vector<bool> is_test(n, false);
  for (std::size_t r : out.test) is_test[r] = true;
  for (std::size_t i = 0; i < n; ++i)
    if (!is_test[i]) out.train.push_back(i);
  return out;
}

RowSplit split_by_games(const std::vector<SampleMetadata>& metadata,
                        const std::vector<std::string>& test_games) {
  const std::set<std::string, std::less<>> held(test_games.begin(), test_games.end());
  std::set<std::string, std::less<>> seen;
  RowSplit out;
  for (std::size_t i = 0; i < metadata.size(); ++i) {
    if (held.contains(metadata[i].game_id)) {
      out.test.push_back(i);
      seen.insert(metadata[i].game_id);
    } else {
      out.train.push_back(i);
    }
  }
  for (const auto& g : held) {
    if (!seen.contains(g)) throw Error(ErrorCode::InvalidArgument, "test game '" + g + "' not present");
  }
  if (out.train.empty() || out.test.empty()) {
    throw Error(ErrorCode::InvalidArgument, "split leaves an empty train or test set");
  }
  return out;
}

RegressionProbeReport regression_probe(const Matrix& embedding, const TargetTable& targets,
                                       const RowSplit& split, std::string embedding_name,
                                       const RidgeOptions& options) {
  const std::size_t n = embedding.rows();
  if (targets.values.rows() != n) {
    throw Error(ErrorCode::DimensionMismatch, "targets have " + std::to_string(targets.values.rows()) +
                                                  " rows, embedding has " + std::to_string(n));
  }
  if (targets.values.cols() != targets.variable_names.size()) {
    throw Error(ErrorCode::DimensionMismatch, "target names do not match target columns");
  }
  check_rows(split.train, n, "train");
  check_rows(split.test, n, "test");
  if (split.train.empty() || split.test.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "regression probe needs train rows and >= 2 test rows");
  }
  const std::set<std::size_t> train_set(split.train.begin(), split.train.end());
  for (std::size_t r : split.test) {
    if (train_set.contains(r)) {
      throw Error(ErrorCode::InvalidArgument, "row " + std::to_string(r) + " is in both train and test");
    }
  }

  const Matrix x_train = embedding.select_rows(split.train);
  const Matrix x_test = embedding.select_rows(split.test);
  const Matrix y_train = targets.values.select_rows(split.train);
  const Matrix y_test = targets.values.select_rows(split.test);
  const RidgeSystem system(x_train, options);

  RegressionProbeReport report;
  report.embedding_name = std::move(embedding_name);
  report.n_train = split.train.size();
  report.n_test = split.test.size();
  double total = 0.0;
  for (std::size_t v = 0; v < targets.variable_names.size(); ++v) {
    const LinearModel model = system.solve(y_train.column(v));
    const std::vector<double> truth = y_test.column(v);
    std::vector<double> pred(x_test.rows());
    for (std::size_t i = 0; i < x_test.rows(); ++i) pred[i] = model.predict(x_test.row(i));
    if (auto r2 = r2_score(truth, pred)) {
      report.per_variable_r2.emplace_back(targets.variable_names[v], *r2);
      total += *r2;
    } else {
      report.skipped.push_back(targets.variable_names[v]);
    }
  }
  if (!report.per_variable_r2.empty()) {
    report.mean_r2 = total / static_cast<double>(report.per_variable_r2.size());
  }
  return report;
}

std::vector<StyleLabel> style_labels(const std::vector<SampleMetadata>& metadata) {
  std::vector<StyleLabel> out;
  out.reserve(metadata.size());
  for (const auto& m : metadata) out.push_back(m.style_label);
  return out;
}

std::vector<FoldSpec> make_folds(const std::vector<SampleMetadata>& metadata, std::size_t n_folds,
                                 std::uint64_t seed) {
  if (n_folds == 0) throw Error(ErrorCode::InvalidArgument, "n_folds must be positive");
  std::map<StyleLabel, std::set<std::string>> games_by_label;
  for (const auto& m : metadata) games_by_label[m.style_label].insert(m.game_id);
  if (games_by_label.empty()) throw Error(ErrorCode::InsufficientGames, "no games");
  for (const auto& [label, games] : games_by_label) {
    if (games.size() < 2) {
      throw Error(ErrorCode::InsufficientGames,
                  "style '" + std::string(to_string(label)) + "' has " +
                      std::to_string(games.size()) + " game(s); at least 2 are needed");
    }
  }

  SplitMix64 rng(seed);
  std::vector<FoldSpec> folds;
  folds.reserve(n_folds);
  for (std::size_t f = 0; f < n_folds; ++f) {
    FoldSpec fold;
    fold.fold_id = f;
    for (const auto& [label, games] : games_by_label) {
      auto it = games.begin();
      std::advance(it, static_cast<std::ptrdiff_t>(rng.bounded(games.size())));
      fold.test_games.push_back(*it);
    }
    const std::set<std::string_view> held(fold.test_games.begin(), fold.test_games.end());
    for (std::size_t i = 0; i < metadata.size(); ++i) {
      (held.contains(metadata[i].game_id) ? fold.test_rows : fold.train_rows).push_back(i);
    }
    folds.push_back(std::move(fold));
  }
  return folds;
}

namespace {

struct Softmax {
  std::size_t classes;
  Matrix weights;  // p x C
  std::vector<double> bias;

  std::size_t predict(std::span<const double> row) const {
    std::size_t best = 0;
    double best_logit = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      double z = bias[c];
      for (std::size_t k = 0; k < row.size(); ++k) z += row[k] * weights(k, c);
      if (c == 0 || z > best_logit) {
        best_logit = z;
        best = c;
      }
    }
    return best;
  }
};

Softmax train_softmax(const Matrix& x, const std::vector<std::size_t>& y, std::size_t classes,
                      const LogisticOptions& options) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  Softmax model{classes, Matrix(p, classes), std::vector<double>(classes, 0.0)};
  Matrix residual(n, classes);
  Matrix grad(p, classes);
  std::vector<double> grad_b(classes);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t it = 0; it < options.iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      auto row = x.row(i);
      auto r = residual.row(i);
      double max_z = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < classes; ++c) {
        double z = model.bias[c];
        for (std::size_t k = 0; k < p; ++k) z += row[k] * model.weights(k, c);
        r[c] = z;
        max_z = std::max(max_z, z);
      }
      double total = 0.0;
      for (std::size_t c = 0; c < classes; ++c) {
        r[c] = std::exp(r[c] - max_z);
        total += r[c];
      }
      for (std::size_t c = 0; c < classes; ++c) r[c] = r[c] / total - (y[i] == c ? 1.0 : 0.0);
    }
    grad = matmul_tn(x, residual);
    std::fill(grad_b.begin(), grad_b.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < classes; ++c) grad_b[c] += residual(i, c);
    for (std::size_t k = 0; k < p; ++k)
      for (std::size_t c = 0; c < classes; ++c) {
        const double g = grad(k, c) * inv_n + options.l2 * model.weights(k, c);
        model.weights(k, c) -= options.learning_rate * g;
      }
    for (std::size_t c = 0; c < classes; ++c) model.bias[c] -= options.learning_rate * grad_b[c] * inv_n;
  }
  return model;
}

}  // namespace

ClassificationProbeReport classification_probe(const Matrix& embedding,
                                               std::span<const StyleLabel> labels,
                                               std::span<const FoldSpec> folds,
                                               std::string embedding_name,
                                               const LogisticOptions& options) {
  const std::size_t n = embedding.rows();
  if (labels.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "one style label per embedding row required");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == StyleLabel::Unknown) {
      throw Error(ErrorCode::UnknownStyleLabel,
                  "row " + std::to_string(i) + " has an unknown style label; the style probe needs labelled games");
    }
  }
  if (folds.empty()) throw Error(ErrorCode::InvalidArgument, "no folds");

  // Class ids follow the label enumeration order.
  const std::set<StyleLabel> present(labels.begin(), labels.end());
  const std::vector<StyleLabel> classes(present.begin(), present.end());
  std::vector<std::size_t> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<std::size_t>(
        std::find(classes.begin(), classes.end(), labels[i]) - classes.begin());
  }

  ClassificationProbeReport report;
  report.embedding_name = std::move(embedding_name);
  report.n_folds = folds.size();
  for (const auto& fold : folds) {
    check_rows(fold.train_rows, n, "train");
    check_rows(fold.test_rows, n, "test");
    if (fold.train_rows.empty() || fold.test_rows.empty()) {
      throw Error(ErrorCode::InvalidArgument, "fold " + std::to_string(fold.fold_id) + " is empty");
    }
    Matrix x_train = embedding.select_rows(fold.train_rows);
    Matrix x_test = embedding.select_rows(fold.test_rows);
    const std::size_t p = embedding.cols();
    for (std::size_t k = 0; k < p; ++k) {
      double mean = 0.0;
      for (std::size_t i = 0; i < x_train.rows(); ++i) mean += x_train(i, k);
      mean /= static_cast<double>(x_train.rows());
      double var = 0.0;
      for (std::size_t i = 0; i < x_train.rows(); ++i) var += (x_train(i, k) - mean) * (x_train(i, k) - mean);
      double sd = std::sqrt(var / static_cast<double>(x_train.rows()));
      if (!(sd > 0.0)) sd = 1.0;
      for (std::size_t i = 0; i < x_train.rows(); ++i) x_train(i, k) = (x_train(i, k) - mean) / sd;
      for (std::size_t i = 0; i < x_test.rows(); ++i) x_test(i, k) = (x_test(i, k) - mean) / sd;
    }
    std::vector<std::size_t> y_train;
    y_train.reserve(fold.train_rows.size());
    std::vector<std::size_t> counts(classes.size(), 0);
    for (std::size_t r : fold.train_rows) {
      y_train.push_back(y[r]);
      ++counts[y[r]];
    }
    const auto majority = static_cast<std::size_t>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());

    const Softmax model = train_softmax(x_train, y_train, classes.size(), options);
    std::size_t correct = 0;
    std::size_t baseline_correct = 0;
    for (std::size_t i = 0; i < fold.test_rows.size(); ++i) {
      const std::size_t truth = y[fold.test_rows[i]];
      if (model.predict(x_test.row(i)) == truth) ++correct;
      if (majority == truth) ++baseline_correct;
    }
    const auto n_test = static_cast<double>(fold.test_rows.size());
    report.per_fold_accuracy.push_back(static_cast<double>(correct) / n_test);
    report.per_fold_baseline.push_back(static_cast<double>(baseline_correct) / n_test);
  }
  double acc = 0.0;
  double base = 0.0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    acc += report.per_fold_accuracy[f];
    base += report.per_fold_baseline[f];
  }
  report.mean_accuracy = acc / static_cast<double>(folds.size());
  report.baseline_accuracy = base / static_cast<double>(folds.size());
  return report;
}

}  // namespace latent_split
