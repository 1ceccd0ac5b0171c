#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "latent_split/linalg.hpp"

namespace latent_split {

/// Style dimensionality used when no sweep is requested.
inline constexpr std::size_t kDefaultStyleDim = 16;

/// k values swept by default when choosing the style dimensionality.
inline constexpr std::size_t kDefaultSweepCandidates[] = {1, 2, 4, 8, 16, 32, 64, 128, 256};

enum class Strategy { TopK, RandomK, LastK, TopHalfRandomHalf };

std::string_view to_string(Strategy strategy);
/// Accepts the CLI spellings: top, random, last, top-half-random.
std::optional<Strategy> parse_strategy(std::string_view text);

struct SelectionStrategy {
  Strategy variant = Strategy::TopK;
  /// Required by RandomK and TopHalfRandomHalf.
  std::optional<std::uint64_t> seed;

  bool randomized() const noexcept {
    return variant == Strategy::RandomK || variant == Strategy::TopHalfRandomHalf;
  }
};

/// Partition of the computed singular directions into a style set of size k
/// and the complementary content set.
///
/// Indices refer to columns of V, i.e. to positions in the descending
/// singular-value order. When N < D only r = N directions exist; the content
/// set then covers the r − k remaining computed directions and the null space
/// is dropped.
struct SubspaceSplit {
  std::size_t k = 0;
  std::size_t dim = 0;   // D
  std::size_t rank = 0;  // r, number of computed directions
  std::vector<std::size_t> style_indices;    // ascending
  std::vector<std::size_t> content_indices;  // ascending
  Basis style_basis;
  Basis content_basis;
  std::string genre_id;
  SelectionStrategy strategy;
};

/// Builds the split for one genre's SVD. Throws KOutOfRange unless 1 <= k < r,
/// and InvalidArgument when a randomized strategy has no seed.
///
/// TopK takes {0..k−1}; LastK {r−k..r−1}; RandomK draws k indices from
/// {0..r−1}; TopHalfRandomHalf takes {0..⌊k/2⌋−1} plus k − ⌊k/2⌋ draws from
/// the rest. Draws use sample_without_replacement over the eligible indices
/// in ascending order with SplitMix64(seed).
SubspaceSplit split(const SvdFactorization& factors, std::size_t k, const SelectionStrategy& strategy,
                    std::string genre_id = {});

Matrix embed_style(const Matrix& x, const SubspaceSplit& split);
Matrix embed_content(const Matrix& x, const SubspaceSplit& split);

/// Domain-gap functional: a clustering score of `embedding` under per-row labels.
using GapFunction =
    std::function<double(const Matrix& embedding, std::span<const std::string> labels)>;

/// Mean raw-space silhouette.
GapFunction silhouette_gap();

struct KSweepResult {
  std::vector<std::size_t> candidates;
  std::vector<double> style_score;
  std::vector<double> content_score;
  std::vector<double> gap_diff;  // style_score − content_score
  std::size_t chosen_k = 0;
  std::vector<double> singular_values;
};

/// Fits one SVD, then for each candidate k scores the TopK style and content
/// embeddings with `gap_fn` using the game ids as labels. The chosen k
/// maximizes style − content; exact ties go to the smallest k.
///
/// Throws TooFewGames with fewer than two distinct games and KOutOfRange when
/// a candidate is not in [1, r).
KSweepResult select_k(const Matrix& genre_data, std::span<const std::string> game_labels,
                      std::span<const std::size_t> candidates,
                      const GapFunction& gap_fn = silhouette_gap());

/// Same as above on an already computed factorization of `genre_data`.
KSweepResult select_k(const Matrix& genre_data, const SvdFactorization& factors,
                      std::span<const std::string> game_labels,
                      std::span<const std::size_t> candidates, const GapFunction& gap_fn);

}  // namespace latent_split
