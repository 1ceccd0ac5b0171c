#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "latent_split/dataset.hpp"

namespace latent_split {

// --- Regression probe -----------------------------------------------------

struct RidgeOptions {
  /// λ = ridge_scale · trace(XcᵀXc) / D on the column-centred design. Zero
  /// gives ordinary least squares.
  double ridge_scale = 1e-6;
};

struct LinearModel {
  std::vector<double> weights;
  double intercept = 0.0;

  double predict(std::span<const double> row) const noexcept;
};

/// Minimizes ‖Xw + b·1 − y‖² + λ‖w‖² (intercept unpenalized) through a
/// Cholesky factorization of the centred normal equations.
/// Throws DegenerateDesign when the system is not positive definite.
LinearModel fit_linear_regression(const Matrix& x, std::span<const double> y,
                                  const RidgeOptions& options = {});

/// Coefficient of determination 1 − SS_res / SS_tot. Returns nullopt when
/// var(y_true) < 1e-12 (the variable is skipped rather than scored).
/// Throws LengthMismatch on unequal or too-short inputs.
std::optional<double> r2_score(std::span<const double> y_true, std::span<const double> y_pred);

struct RowSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Random train/test split of rows 0..n−1: floor(n·test_fraction) rows drawn
/// for test, both sets ascending.
RowSplit random_row_split(std::size_t n, double test_fraction, std::uint64_t seed);

/// All rows of `test_games` go to test, the rest to train.
RowSplit split_by_games(const std::vector<SampleMetadata>& metadata,
                        const std::vector<std::string>& test_games);

struct RegressionProbeReport {
  std::string embedding_name;
  std::vector<std::pair<std::string, double>> per_variable_r2;  // scored variables, table order
  std::vector<std::string> skipped;                             // zero-variance on test rows
  double mean_r2 = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

/// One regression per target variable fit on `split.train`, scored by R² on
/// `split.test`; mean over the scored variables.
RegressionProbeReport regression_probe(const Matrix& embedding, const TargetTable& targets,
                                       const RowSplit& split, std::string embedding_name,
                                       const RidgeOptions& options = {});

// --- Style classification probe ------------------------------------------

struct FoldSpec {
  std::size_t fold_id = 0;
  std::vector<std::string> test_games;  // one per style label, label order
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

/// Each fold holds out one game per style label present, drawn uniformly
/// (games of a label sorted by id, index drawn with SplitMix64::bounded).
/// Folds are drawn independently, so a game may be held out more than once.
/// Throws InsufficientGames when some label has fewer than two games.
std::vector<FoldSpec> make_folds(const std::vector<SampleMetadata>& metadata, std::size_t n_folds,
                                 std::uint64_t seed);

struct LogisticOptions {
  double learning_rate = 0.1;
  std::size_t iterations = 500;
  double l2 = 1e-3;
};

struct ClassificationProbeReport {
  std::string embedding_name;
  std::vector<double> per_fold_accuracy;
  std::vector<double> per_fold_baseline;
  double mean_accuracy = 0.0;
  double baseline_accuracy = 0.0;
  std::size_t n_folds = 0;
};

/// Multinomial logistic regression on z-scored features (training-row
/// statistics), full-batch gradient descent from zero weights. The baseline
/// predicts the majority training label (lowest label on ties) for every
/// test row. Throws UnknownStyleLabel if any label is Unknown.
ClassificationProbeReport classification_probe(const Matrix& embedding,
                                               std::span<const StyleLabel> labels,
                                               std::span<const FoldSpec> folds,
                                               std::string embedding_name,
                                               const LogisticOptions& options = {});

std::vector<StyleLabel> style_labels(const std::vector<SampleMetadata>& metadata);

}  // namespace latent_split
