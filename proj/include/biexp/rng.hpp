#pragma once

#include <cstdint>
#include <random>

namespace biexp::rng {

using Engine = std::mt19937_64;

// Mixes (seed, stream) into a well-distributed 64-bit value (SplitMix64
// finaliser). Distinct streams of the same seed give unrelated values.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

// Engine for stream `stream` of `seed`. Same arguments, same sequence.
[[nodiscard]] Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace biexp::rng
