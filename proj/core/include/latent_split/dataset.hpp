#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "latent_split/matrix.hpp"

namespace latent_split {

enum class StyleLabel { Retro, Modern, Photoreal, Unknown };

/// Lower-case CSV spelling: retro, modern, photoreal, unknown.
std::string_view to_string(StyleLabel label);
std::optional<StyleLabel> parse_style_label(std::string_view text);

struct SampleMetadata {
  std::string game_id;
  std::string genre_id;
  StyleLabel style_label = StyleLabel::Unknown;
  std::string source_frame;  // empty when absent

  bool operator==(const SampleMetadata&) const = default;
};

struct TargetTable {
  std::vector<std::string> variable_names;
  Matrix values;  // N x V, row-aligned with the features

  bool operator==(const TargetTable&) const = default;
};

/// Features, per-row metadata and optional game-state targets. Row i of every
/// member describes the same frame.
struct EmbeddingDataset {
  Matrix features;
  std::vector<SampleMetadata> metadata;
  std::optional<TargetTable> targets;

  std::size_t n_rows() const noexcept { return features.rows(); }
  std::size_t n_cols() const noexcept { return features.cols(); }

  bool operator==(const EmbeddingDataset&) const = default;
};

// --- GEMB binary matrices -------------------------------------------------
//
// Little-endian: "GEMB", u32 version (1), u32 n_rows, u32 n_cols, then
// n_rows*n_cols IEEE-754 float32 values in row-major order.

inline constexpr std::uint32_t kGembVersion = 1;
inline constexpr std::size_t kGembHeaderBytes = 16;

/// Reads a GEMB file and promotes it to double. Validates the magic, the
/// version, the payload length and finiteness of every entry.
Matrix read_matrix(const std::filesystem::path& path);

/// Writes a GEMB file. Rejects empty shapes and values that are non-finite or
/// overflow float32.
void write_matrix(const std::filesystem::path& path, const Matrix& m);

/// Serializes to the exact GEMB byte stream `write_matrix` produces.
std::string encode_matrix(const Matrix& m);
Matrix decode_matrix(std::string_view bytes, const std::string& source_name);

// --- Metadata / target name CSVs -----------------------------------------

std::vector<SampleMetadata> read_metadata(const std::filesystem::path& path);
void write_metadata(const std::filesystem::path& path, const std::vector<SampleMetadata>& rows);

/// Variable-name sidecar of a target matrix: `targets.gemb` -> `targets.vars.csv`.
std::filesystem::path target_names_path(const std::filesystem::path& targets_path);
std::vector<std::string> read_target_names(const std::filesystem::path& path);
void write_target_names(const std::filesystem::path& path, const std::vector<std::string>& names);

// --- Dataset operations ---------------------------------------------------

/// Throws on the first violated invariant: empty shapes, non-finite entries,
/// row-count mismatches, empty ids, or a game seen under two genres or two
/// style labels.
void validate(const EmbeddingDataset& dataset);

EmbeddingDataset load_dataset(const std::filesystem::path& features_path,
                              const std::filesystem::path& metadata_path,
                              const std::optional<std::filesystem::path>& targets_path = {});

/// Validates before writing anything. Values are stored as float32, so a
/// dataset loaded from disk round-trips bit-exactly.
void save_dataset(const EmbeddingDataset& dataset, const std::filesystem::path& features_path,
                  const std::filesystem::path& metadata_path,
                  const std::optional<std::filesystem::path>& targets_path = {});

/// Rows of one genre, in their original order, with aligned metadata and targets.
EmbeddingDataset filter_by_genre(const EmbeddingDataset& dataset, std::string_view genre_id);

/// Row indices belonging to `genre_id`, ascending.
std::vector<std::size_t> rows_of_genre(const EmbeddingDataset& dataset, std::string_view genre_id);

/// Distinct genre ids in order of first appearance.
std::vector<std::string> list_genres(const EmbeddingDataset& dataset);

std::vector<std::string> game_ids(const std::vector<SampleMetadata>& metadata);

}  // namespace latent_split
