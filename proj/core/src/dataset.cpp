#include "latent_split/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "latent_split/error.hpp"
#include "latent_split/text.hpp"

namespace latent_split {

namespace fs = std::filesystem;

std::string_view to_string(StyleLabel label) {
  switch (label) {
    case StyleLabel::Retro: return "retro";
    case StyleLabel::Modern: return "modern";
    case StyleLabel::Photoreal: return "photoreal";
    case StyleLabel::Unknown: return "unknown";
  }
  return "unknown";
}

std::optional<StyleLabel> parse_style_label(std::string_view text) {
  if (text == "retro") return StyleLabel::Retro;
  if (text == "modern") return StyleLabel::Modern;
  if (text == "photoreal") return StyleLabel::Photoreal;
  if (text == "unknown") return StyleLabel::Unknown;
  return std::nullopt;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return v;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoFailure, "read failed for " + path.string());
  return std::move(ss).str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

std::vector<std::string> read_lines(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  // UTF-8 byte order mark on the header line is tolerated.
  if (!lines.empty() && lines[0].rfind("\xEF\xBB\xBF", 0) == 0) lines[0].erase(0, 3);
  return lines;
}

void check_finite(const Matrix& m, const std::string& what) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (!std::isfinite(m(r, c))) {
        throw Error(ErrorCode::NonFiniteValue,
                    what + " has a non-finite value at row " + std::to_string(r) + ", col " +
                        std::to_string(c),
                    MatrixIndex{r, c});
      }
    }
  }
}

}  // namespace

std::string encode_matrix(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "GEMB matrices need at least one row and column, got " +
                                                  std::to_string(m.rows()) + "x" +
                                                  std::to_string(m.cols()));
  }
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (m.rows() > kMax || m.cols() > kMax) {
    throw Error(ErrorCode::DimensionMismatch, "matrix too large for GEMB");
  }
  std::string out;
  out.reserve(kGembHeaderBytes + 4 * m.rows() * m.cols());
  out += "GEMB";
  put_u32(out, kGembVersion);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      const auto f = static_cast<float>(v);
      if (!std::isfinite(v) || !std::isfinite(f)) {
        throw Error(ErrorCode::NonFiniteValue,
                    "value at row " + std::to_string(r) + ", col " + std::to_string(c) +
                        " is not representable as a finite float32",
                    MatrixIndex{r, c});
      }
      put_u32(out, std::bit_cast<std::uint32_t>(f));
    }
  }
  return out;
}

Matrix decode_matrix(std::string_view bytes, const std::string& source_name) {
  if (bytes.size() < kGembHeaderBytes) {
    if (bytes.size() >= 4 && bytes.substr(0, 4) != "GEMB") {
      throw Error(ErrorCode::MagicMismatch, source_name + ": bad magic (expected GEMB)");
    }
    throw Error(ErrorCode::TruncatedFile, source_name + ": truncated header at byte offset " +
                                              std::to_string(bytes.size()) + " (need " +
                                              std::to_string(kGembHeaderBytes) + ")");
  }
  if (bytes.substr(0, 4) != "GEMB") {
    throw Error(ErrorCode::MagicMismatch, source_name + ": bad magic (expected GEMB)");
  }
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kGembVersion) {
    throw Error(ErrorCode::UnsupportedVersion,
                source_name + ": unsupported format version " + std::to_string(version));
  }
  const std::size_t rows = get_u32(bytes, 8);
  const std::size_t cols = get_u32(bytes, 12);
  if (rows == 0 || cols == 0) {
    throw Error(ErrorCode::DimensionMismatch, source_name + ": empty shape " +
                                                  std::to_string(rows) + "x" + std::to_string(cols));
  }
  const std::size_t expected = kGembHeaderBytes + 4 * rows * cols;
  if (bytes.size() < expected) {
    const std::size_t whole_values = (bytes.size() - kGembHeaderBytes) / 4;
    throw Error(ErrorCode::TruncatedFile,
                source_name + ": truncated payload at byte offset " +
                    std::to_string(kGembHeaderBytes + 4 * whole_values) + " (file has " +
                    std::to_string(bytes.size()) + " bytes, expected " + std::to_string(expected) +
                    ")");
  }
  if (bytes.size() > expected) {
    throw Error(ErrorCode::DimensionMismatch,
                source_name + ": " + std::to_string(bytes.size() - expected) +
                    " trailing bytes after offset " + std::to_string(expected));
  }
  Matrix m(rows, cols);
  auto data = m.data();
  for (std::size_t i = 0; i < rows * cols; ++i) {
    data[i] = static_cast<double>(std::bit_cast<float>(get_u32(bytes, kGembHeaderBytes + 4 * i)));
  }
  check_finite(m, source_name);
  return m;
}

Matrix read_matrix(const fs::path& path) {
  return decode_matrix(read_file(path), path.string());
}

void write_matrix(const fs::path& path, const Matrix& m) { write_file(path, encode_matrix(m)); }

std::vector<SampleMetadata> read_metadata(const fs::path& path) {
  static constexpr std::string_view kHeader = "row,game_id,genre_id,style_label,source_frame";
  const auto lines = read_lines(path);
  const std::string name = path.string();
  if (lines.empty() || lines[0] != kHeader) {
    throw Error(ErrorCode::InvalidMetadata, name + ": header must be '" + std::string(kHeader) + "'");
  }
  std::vector<SampleMetadata> rows;
  std::vector<std::string> fields;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    if (line.empty() && ln + 1 == lines.size()) break;
    const std::string where = name + ":" + std::to_string(ln + 1);
    if (!split_csv_record(line, fields)) {
      throw Error(ErrorCode::InvalidMetadata, where + ": unterminated quote");
    }
    if (fields.size() != 5) {
      throw Error(ErrorCode::InvalidMetadata,
                  where + ": expected 5 fields, got " + std::to_string(fields.size()));
    }
    if (fields[0] != std::to_string(rows.size())) {
      throw Error(ErrorCode::InvalidMetadata, where + ": row index '" + fields[0] +
                                                  "' out of order, expected " +
                                                  std::to_string(rows.size()));
    }
    auto label = parse_style_label(fields[3]);
    if (!label) {
      throw Error(ErrorCode::InvalidMetadata, where + ": unknown style label '" + fields[3] + "'");
    }
    rows.push_back(SampleMetadata{fields[1], fields[2], *label, fields[4]});
  }
  return rows;
}

void write_metadata(const fs::path& path, const std::vector<SampleMetadata>& rows) {
  std::string out = "row,game_id,genre_id,style_label,source_frame\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& m = rows[i];
    out += std::to_string(i);
    out += ',' + csv_field(m.game_id);
    out += ',' + csv_field(m.genre_id);
    out += ',';
    out += to_string(m.style_label);
    out += ',' + csv_field(m.source_frame);
    out += '\n';
  }
  write_file(path, out);
}

fs::path target_names_path(const fs::path& targets_path) {
  fs::path p = targets_path;
  p.replace_extension(".vars.csv");
  return p;
}

std::vector<std::string> read_target_names(const fs::path& path) {
  const auto lines = read_lines(path);
  const std::string name = path.string();
  if (lines.empty() || lines[0] != "index,variable_name") {
    throw Error(ErrorCode::InvalidMetadata, name + ": header must be 'index,variable_name'");
  }
  std::vector<std::string> names;
  std::vector<std::string> fields;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty() && ln + 1 == lines.size()) break;
    const std::string where = name + ":" + std::to_string(ln + 1);
    if (!split_csv_record(lines[ln], fields) || fields.size() != 2) {
      throw Error(ErrorCode::InvalidMetadata, where + ": expected 'index,variable_name'");
    }
    if (fields[0] != std::to_string(names.size())) {
      throw Error(ErrorCode::InvalidMetadata, where + ": index out of order");
    }
    if (fields[1].empty()) throw Error(ErrorCode::InvalidMetadata, where + ": empty variable name");
    names.push_back(fields[1]);
  }
  return names;
}

void write_target_names(const fs::path& path, const std::vector<std::string>& names) {
  std::string out = "index,variable_name\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    out += std::to_string(i) + ',' + csv_field(names[i]) + '\n';
  }
  write_file(path, out);
}

void validate(const EmbeddingDataset& dataset) {
  const Matrix& x = dataset.features;
  if (x.rows() == 0 || x.cols() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "feature matrix has empty shape " +
                                                  std::to_string(x.rows()) + "x" +
                                                  std::to_string(x.cols()));
  }
  check_finite(x, "feature matrix");
  if (dataset.metadata.size() != x.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "metadata has " + std::to_string(dataset.metadata.size()) +
                    " rows but the feature matrix has " + std::to_string(x.rows()));
  }
  if (dataset.targets) {
    const TargetTable& t = *dataset.targets;
    if (t.values.rows() != x.rows()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "target table has " + std::to_string(t.values.rows()) +
                      " rows but the feature matrix has " + std::to_string(x.rows()));
    }
    if (t.values.cols() != t.variable_names.size() || t.values.cols() == 0) {
      throw Error(ErrorCode::DimensionMismatch,
                  "target table has " + std::to_string(t.values.cols()) + " columns but " +
                      std::to_string(t.variable_names.size()) + " variable names");
    }
    check_finite(t.values, "target table");
  }
  std::map<std::string, std::pair<std::string, StyleLabel>, std::less<>> games;
  for (std::size_t i = 0; i < dataset.metadata.size(); ++i) {
    const auto& m = dataset.metadata[i];
    if (m.game_id.empty() || m.genre_id.empty()) {
      throw Error(ErrorCode::InvalidMetadata, "row " + std::to_string(i) + " has an empty game or genre id");
    }
    auto [it, inserted] = games.try_emplace(m.game_id, m.genre_id, m.style_label);
    if (inserted) continue;
    if (it->second.first != m.genre_id) {
      throw Error(ErrorCode::InconsistentGameMapping,
                  "game '" + m.game_id + "' appears under genres '" + it->second.first + "' and '" +
                      m.genre_id + "' (row " + std::to_string(i) + ")");
    }
    if (it->second.second != m.style_label) {
      throw Error(ErrorCode::InconsistentGameMapping,
                  "game '" + m.game_id + "' appears with style labels '" +
                      std::string(to_string(it->second.second)) + "' and '" +
                      std::string(to_string(m.style_label)) + "' (row " + std::to_string(i) + ")");
    }
  }
}

EmbeddingDataset load_dataset(const fs::path& features_path, const fs::path& metadata_path,
                              const std::optional<fs::path>& targets_path) {
  EmbeddingDataset ds;
  ds.features = read_matrix(features_path);
  ds.metadata = read_metadata(metadata_path);
  if (targets_path) {
    TargetTable t;
    t.values = read_matrix(*targets_path);
    t.variable_names = read_target_names(target_names_path(*targets_path));
    ds.targets = std::move(t);
  }
  validate(ds);
  return ds;
}

void save_dataset(const EmbeddingDataset& dataset, const fs::path& features_path,
                  const fs::path& metadata_path, const std::optional<fs::path>& targets_path) {
  validate(dataset);
  if (dataset.targets && !targets_path) {
    throw Error(ErrorCode::InvalidArgument, "dataset has targets but no targets path was given");
  }
  // Encode everything first so a float32 overflow aborts before any file is touched.
  const std::string features = encode_matrix(dataset.features);
  std::string targets;
  if (dataset.targets) targets = encode_matrix(dataset.targets->values);
  write_file(features_path, features);
  write_metadata(metadata_path, dataset.metadata);
  if (dataset.targets) {
    write_file(*targets_path, targets);
    write_target_names(target_names_path(*targets_path), dataset.targets->variable_names);
  }
}

std::vector<std::size_t> rows_of_genre(const EmbeddingDataset& dataset, std::string_view genre_id) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < dataset.metadata.size(); ++i) {
    if (dataset.metadata[i].genre_id == genre_id) rows.push_back(i);
  }
  return rows;
}

EmbeddingDataset filter_by_genre(const EmbeddingDataset& dataset, std::string_view genre_id) {
  const auto rows = rows_of_genre(dataset, genre_id);
  if (rows.empty()) {
    throw Error(ErrorCode::UnknownGenre, "genre '" + std::string(genre_id) + "' not in dataset");
  }
  EmbeddingDataset out;
  out.features = dataset.features.select_rows(rows);
  out.metadata.reserve(rows.size());
  for (std::size_t r : rows) out.metadata.push_back(dataset.metadata[r]);
  if (dataset.targets) {
    out.targets = TargetTable{dataset.targets->variable_names,
                              dataset.targets->values.select_rows(rows)};
  }
  return out;
}

std::vector<std::string> list_genres(const EmbeddingDataset& dataset) {
  std::vector<std::string> out;
  for (const auto& m : dataset.metadata) {
    if (std::find(out.begin(), out.end(), m.genre_id) == out.end()) out.push_back(m.genre_id);
  }
  return out;
}

std::vector<std::string> game_ids(const std::vector<SampleMetadata>& metadata) {
  std::vector<std::string> out;
  out.reserve(metadata.size());
  for (const auto& m : metadata) out.push_back(m.game_id);
  return out;
}

}  // namespace latent_split
