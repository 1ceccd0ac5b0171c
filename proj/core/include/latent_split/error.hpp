#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace latent_split {

enum class ErrorCode {
  InvalidArgument,
  IoFailure,
  MagicMismatch,
  UnsupportedVersion,
  TruncatedFile,
  DimensionMismatch,
  NonFiniteValue,
  InvalidMetadata,
  InconsistentGameMapping,
  UnknownGenre,
  ConvergenceFailure,
  KOutOfRange,
  TooFewGames,
  SingleCluster,
  PerplexityInfeasible,
  NonFiniteGradient,
  DegenerateDesign,
  LengthMismatch,
  InsufficientGames,
  UnknownStyleLabel,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code);

/// Location of an offending matrix entry, reported by NonFiniteValue.
struct MatrixIndex {
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const MatrixIndex&) const = default;
};

/// Single exception type for every failure raised by the library; `code()`
/// identifies the failure class, `what()` carries a human-readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  Error(ErrorCode code, const std::string& message, MatrixIndex where);

  ErrorCode code() const noexcept { return code_; }
  const std::optional<MatrixIndex>& where() const noexcept { return where_; }

 private:
  ErrorCode code_;
  std::optional<MatrixIndex> where_;
};

}  // namespace latent_split
