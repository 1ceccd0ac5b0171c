#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "latent_split/dataset.hpp"
#include "latent_split/decomposition.hpp"
#include "latent_split/tsne.hpp"

namespace latent_split {

enum class Space { Raw, Tsne2d };

std::string_view to_string(Space space);
/// "raw" or "tsne".
std::optional<Space> parse_space(std::string_view text);

struct SilhouetteResult {
  double mean_score = 0.0;
  std::vector<double> per_sample;
  std::size_t n_clusters = 0;
  Space space = Space::Raw;
};

/// Dense cluster ids in order of first appearance.
std::vector<std::size_t> encode_labels(std::span<const std::string> labels);

/// Euclidean silhouette. For sample i, a(i) is the mean distance to the other
/// members of its cluster and b(i) the smallest mean distance to another
/// cluster; s(i) = (b − a) / max(a, b), with s(i) = 0 for singleton clusters
/// and whenever max(a, b) = 0.
///
/// Throws SingleCluster with fewer than two distinct labels and
/// LengthMismatch when the label count differs from the row count.
SilhouetteResult silhouette(const Matrix& x, std::span<const std::size_t> labels);
SilhouetteResult silhouette(const Matrix& x, std::span<const std::string> labels);

struct NamedMatrix {
  std::string name;
  Matrix values;
};

/// Silhouette scores of several embeddings of one genre under game-id labels.
struct DomainGapReport {
  std::string genre_id;
  std::vector<std::pair<std::string, SilhouetteResult>> rows;  // in report order
  std::size_t k_used = 0;
  Space space = Space::Raw;

  const SilhouetteResult& at(std::string_view variant) const;
};

/// Scores "latent", "style", "content" and then each extra variant in order.
/// Extra variants must be row-aligned with `genre`. In Tsne2d space every
/// variant is first embedded with tsne::fit using `tsne_config`.
DomainGapReport domain_gap_report(const EmbeddingDataset& genre, const SubspaceSplit& split,
                                  std::span<const NamedMatrix> extras = {},
                                  Space space = Space::Raw,
                                  const TsneConfig& tsne_config = {});

}  // namespace latent_split
