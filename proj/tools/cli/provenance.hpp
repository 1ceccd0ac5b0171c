#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace latent_split::cli {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

using Json = nlohmann::ordered_json;

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t value);

struct InputDigest {
  std::string name;  // basename only
  std::uint64_t fnv1a64 = 0;
};

InputDigest digest(const std::filesystem::path& path);

/// Inputs are recorded by basename and content hash only, so artifacts do not
/// depend on where the inputs or the output directory live.
struct Provenance {
  std::string command;
  std::uint64_t seed = 0;
  std::vector<InputDigest> inputs;
  std::optional<std::string> genre;
  std::optional<std::size_t> k;
  std::optional<std::string> strategy;
  std::optional<std::string> space;

  Json to_json() const;
};

std::string read_file(const std::filesystem::path& path);

/// Writes `bytes` verbatim; throws IoFailure.
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// `<name>.meta.json` next to an already written artifact.
void write_sidecar(const std::filesystem::path& path, const Provenance& provenance);

/// Non-JSON artifact plus its sidecar.
void write_with_sidecar(const std::filesystem::path& path, std::string_view bytes,
                        const Provenance& provenance);

/// JSON artifact with the provenance embedded under "provenance".
void write_json(const std::filesystem::path& path, Json document, const Provenance& provenance);

}  // namespace latent_split::cli
