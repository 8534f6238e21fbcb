#pragma once

// Seed plumbing. One experiment seed fans out into independent streams so
// that, for example, changing the shuffle order never perturbs the
// contamination that was injected.

#include <cstdint>
#include <random>

namespace roca {

enum class Stream : std::uint64_t { Augmentation = 1, Contamination = 2, Init = 3, Shuffle = 4 };

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for (seed, stream, sub). `sub` separates uses within one stream.
std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t sub = 0);

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t sub = 0) {
    return Rng(derive_seed(seed, stream, sub));
}

}  // namespace roca
