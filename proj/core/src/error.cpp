#include "latent_split/error.hpp"

namespace latent_split {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::MagicMismatch: return "MagicMismatch";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::InvalidMetadata: return "InvalidMetadata";
    case ErrorCode::InconsistentGameMapping: return "InconsistentGameMapping";
    case ErrorCode::UnknownGenre: return "UnknownGenre";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::TooFewGames: return "TooFewGames";
    case ErrorCode::SingleCluster: return "SingleCluster";
    case ErrorCode::PerplexityInfeasible: return "PerplexityInfeasible";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::DegenerateDesign: return "DegenerateDesign";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InsufficientGames: return "InsufficientGames";
    case ErrorCode::UnknownStyleLabel: return "UnknownStyleLabel";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

namespace {
std::string format_message(ErrorCode code, const std::string& message) {
  std::string out(to_string(code));
  out += ": ";
  out += message;
  return out;
}
}  // namespace

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(format_message(code, message)), code_(code) {}

Error::Error(ErrorCode code, const std::string& message, MatrixIndex where)
    : std::runtime_error(format_message(code, message)), code_(code), where_(where) {}

}  // namespace latent_split
