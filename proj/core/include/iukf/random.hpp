#pragma once

#include <cstdint>
#include <random>

#include "iukf/linalg.hpp"

namespace iukf {

using Rng = std::mt19937_64;

// Substreams of one Monte Carlo run. Each channel draws from its own engine so
// that adding or removing a consumer never shifts another channel's draws.
enum class Stream : std::uint64_t {
  kInitial = 1,
  kProcess = 2,
  kMeasurement = 3,
  kDefender = 4,
};

// Deterministic seed for (base seed, run, stream) via splitmix64 mixing.
std::uint64_t substream_seed(std::uint64_t base, std::uint64_t run, Stream stream);

Rng make_stream(std::uint64_t base, std::uint64_t run, Stream stream);

Vector standard_normal(Rng& rng, Eigen::Index n);

// Draw from N(0, factor * factorᵀ).
Vector gaussian(Rng& rng, const Matrix& factor);

}  // namespace iukf
