#include "latent_split/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "latent_split/error.hpp"
#include "latent_split/linalg.hpp"
#include "latent_split/parallel.hpp"

namespace latent_split {

std::string_view to_string(Space space) { return space == Space::Raw ? "raw" : "tsne"; }

std::optional<Space> parse_space(std::string_view text) {
  if (text == "raw") return Space::Raw;
  if (text == "tsne") return Space::Tsne2d;
  return std::nullopt;
}

std::vector<std::size_t> encode_labels(std::span<const std::string> labels) {
  std::map<std::string_view, std::size_t> ids;
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    auto [it, inserted] = ids.try_emplace(l, ids.size());
    out.push_back(it->second);
  }
  return out;
}

SilhouetteResult silhouette(const Matrix& x, std::span<const std::size_t> labels) {
  const std::size_t n = x.rows();
  if (labels.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "silhouette: " + std::to_string(labels.size()) +
                                               " labels for " + std::to_string(n) + " rows");
  }
  std::map<std::size_t, std::size_t> dense;
  for (std::size_t l : labels) dense.try_emplace(l, dense.size());
  const std::size_t n_clusters = dense.size();
  if (n_clusters < 2) {
    throw Error(ErrorCode::SingleCluster, "silhouette needs at least two distinct labels, got " +
                                              std::to_string(n_clusters));
  }
  std::vector<std::size_t> cluster(n);
  std::vector<std::size_t> sizes(n_clusters, 0);
  for (std::size_t i = 0; i < n; ++i) {
    cluster[i] = dense.at(labels[i]);
    ++sizes[cluster[i]];
  }

  SilhouetteResult result;
  result.per_sample.assign(n, 0.0);
  result.n_clusters = n_clusters;
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> sums(n_clusters, 0.0);
    auto xi = x.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[cluster[j]] += std::sqrt(squared_distance(xi, x.row(j)));
    }
    const std::size_t own = cluster[i];
    if (sizes[own] <= 1) return;  // singleton: s = 0
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n_clusters; ++c) {
      if (c == own) continue;
      b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    result.per_sample[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  });
  double total = 0.0;
  for (double s : result.per_sample) total += s;
  result.mean_score = total / static_cast<double>(n);
  return result;
}

SilhouetteResult silhouette(const Matrix& x, std::span<const std::string> labels) {
  const auto ids = encode_labels(labels);
  return silhouette(x, std::span<const std::size_t>(ids));
}

const SilhouetteResult& DomainGapReport::at(std::string_view variant) const {
  for (const auto& [name, result] : rows) {
    if (name == variant) return result;
  }
  throw Error(ErrorCode::InvalidArgument, "no variant '" + std::string(variant) + "' in report");
}

DomainGapReport domain_gap_report(const EmbeddingDataset& genre, const SubspaceSplit& split,
                                  std::span<const NamedMatrix> extras, Space space,
                                  const TsneConfig& tsne_config) {
  const auto labels = game_ids(genre.metadata);
  const auto ids = encode_labels(labels);

  std::vector<NamedMatrix> variants;
  variants.push_back({"latent", genre.features});
  variants.push_back({"style", embed_style(genre.features, split)});
  variants.push_back({"content", embed_content(genre.features, split)});
  for (const auto& extra : extras) {
    if (extra.values.rows() != genre.n_rows()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "variant '" + extra.name + "' has " + std::to_string(extra.values.rows()) +
                      " rows, genre has " + std::to_string(genre.n_rows()));
    }
    variants.push_back(extra);
  }

  DomainGapReport report;
  report.genre_id = split.genre_id.empty() && !genre.metadata.empty() ? genre.metadata[0].genre_id
                                                                       : split.genre_id;
  report.k_used = split.k;
  report.space = space;
  for (const auto& v : variants) {
    SilhouetteResult r;
    if (space == Space::Tsne2d) {
      const auto embedded = tsne::fit(v.values, tsne_config);
      r = silhouette(embedded.coords, std::span<const std::size_t>(ids));
    } else {
      r = silhouette(v.values, std::span<const std::size_t>(ids));
    }
    r.space = space;
    report.rows.emplace_back(v.name, std::move(r));
  }
  return report;
}

}  // namespace latent_split
