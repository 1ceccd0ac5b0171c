#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "latent_split/error.hpp"

namespace latent_split::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitNumerical = 70;

int exit_code_for(ErrorCode code) noexcept;

/// Runs one `latent-split` invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace latent_split::cli
