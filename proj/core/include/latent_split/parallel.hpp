#pragma once

#include <cstddef>
#include <functional>

namespace latent_split {

/// Worker count for internal parallel loops: hardware concurrency, capped by
/// the LATENT_SPLIT_THREADS environment variable when set to a positive integer.
std::size_t worker_count();

/// Runs body(i) for every i in [0, n), split into contiguous blocks across
/// worker threads. Callers must make each index's work independent so the
/// result does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace latent_split
