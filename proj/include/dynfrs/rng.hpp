#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace dynfrs {

// Every random draw in the library comes from one of these. The engine is
// fixed; the helpers below avoid the implementation-defined std::
// distributions so that seeded runs replay bit-identically across toolchains.
using Rng = std::mt19937_64;

// splitmix64 finalizer over (seed, stream); used to derive per-tree and
// per-forest substreams from one user seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

// Uniform integer in [0, bound). bound must be > 0.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

// k distinct integers drawn uniformly from [0, n), returned ascending
// (Floyd's algorithm). Requires k <= n.
std::vector<std::uint32_t> sample_without_replacement(Rng& rng, std::uint32_t n,
                                                      std::uint32_t k);

// Text form of the engine state, for snapshots.
std::string rng_state(const Rng& rng);
void restore_rng_state(Rng& rng, const std::string& state);

}  // namespace dynfrs
