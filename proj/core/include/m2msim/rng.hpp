#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace m2msim {

using Rng = std::mt19937_64;

// Independent generator for a (seed, stream, ...) coordinate. Simulation code
// derives one per stream and slot so that schemes sharing a seed see the same
// channel realizations.
Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> coords = {});

inline double uniform01(Rng& rng) { return std::generate_canonical<double, 53>(rng); }

}  // namespace m2msim
