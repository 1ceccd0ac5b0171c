#include "provenance.hpp"

#include <fstream>
#include <sstream>

#include "latent_split/error.hpp"

namespace latent_split::cli {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, value >>= 4) out[static_cast<std::size_t>(i)] = kDigits[value & 0xF];
  return out;
}

InputDigest digest(const std::filesystem::path& path) {
  return {path.filename().string(), fnv1a64(read_file(path))};
}

Json Provenance::to_json() const {
  Json j;
  j["tool"] = "latent-split";
  j["version"] = kToolkitVersion;
  j["command"] = command;
  j["seed"] = seed;
  Json in = Json::array();
  for (const auto& d : inputs) in.push_back({{"name", d.name}, {"fnv1a64", hex64(d.fnv1a64)}});
  j["inputs"] = std::move(in);
  if (genre) j["genre"] = *genre;
  if (k) j["k"] = *k;
  if (strategy) j["strategy"] = *strategy;
  if (space) j["space"] = *space;
  return j;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

void write_sidecar(const std::filesystem::path& path, const Provenance& provenance) {
  Json meta;
  meta["artifact"] = path.filename().string();
  meta["fnv1a64"] = hex64(fnv1a64(read_file(path)));
  meta["provenance"] = provenance.to_json();
  auto sidecar = path;
  sidecar += ".meta.json";
  write_file(sidecar, meta.dump(2) + "\n");
}

void write_with_sidecar(const std::filesystem::path& path, std::string_view bytes,
                        const Provenance& provenance) {
  write_file(path, bytes);
  write_sidecar(path, provenance);
}

void write_json(const std::filesystem::path& path, Json document, const Provenance& provenance) {
  document["provenance"] = provenance.to_json();
  write_file(path, document.dump(2) + "\n");
}

}  // namespace latent_split::cli
