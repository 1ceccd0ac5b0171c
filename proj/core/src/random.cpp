#include "latent_split/random.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "latent_split/error.hpp"

namespace latent_split {

std::uint64_t SplitMix64::bounded(std::uint64_t bound) noexcept {
  // Reject the top (2^64 mod bound) values so every residue is equally likely.
  const std::uint64_t rem = (UINT64_MAX % bound + 1) % bound;
  const std::uint64_t limit = UINT64_MAX - rem;
  std::uint64_t x = next();
  while (x > limit) x = next();
  return x % bound;
}

double SplitMix64::gaussian() noexcept {
  const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  SplitMix64 mixer(seed ^ (stream * 0xD1B54A32D192ED03ULL));
  return mixer.next();
}

std::uint64_t derive_seed(std::uint64_t seed, Stream stream) noexcept {
  return derive_seed(seed, static_cast<std::uint64_t>(stream));
}

std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> pool,
                                                    std::size_t count, SplitMix64& rng) {
  if (count > pool.size()) {
    throw Error(ErrorCode::InvalidArgument, "cannot draw " + std::to_string(count) +
                                                " items from a pool of " +
                                                std::to_string(pool.size()));
  }
  const std::size_t n = pool.size();
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.bounded(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace latent_split
