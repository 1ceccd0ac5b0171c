#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace latent_split {

/// splitmix64 stream. Every random draw in the toolkit goes through this
/// generator so results are reproducible from a seed across platforms and
/// languages (no std::*_distribution, whose output is implementation-defined).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t bounded(std::uint64_t bound) noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; one `next()` pair per draw, the sine
  /// branch is discarded.
  double gaussian() noexcept;

 private:
  std::uint64_t state_;
};

/// Stream ids used to derive per-purpose seeds from the global --seed.
enum class Stream : std::uint64_t {
  Synth = 1,
  Selection = 2,
  Folds = 3,
  Tsne = 4,
  RowSplit = 5,
};

/// Seed for an independent stream: one splitmix64 output of
/// `seed ^ (stream * 0xD1B54A32D192ED03)`.
std::uint64_t derive_seed(std::uint64_t seed, Stream stream) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// `count` distinct items from `pool`, drawn by a partial Fisher-Yates
/// shuffle: for i in [0, count) swap pool[i] with pool[i + bounded(n - i)].
/// Returned in draw order.
std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> pool,
                                                    std::size_t count, SplitMix64& rng);

}  // namespace latent_split
