#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace confsa {

using Rng = std::mt19937_64;

// Engine seeded from a base seed plus an optional stream path, so that
// e.g. (trial seed, unit index) gives an independent reproducible stream.
Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {});

}  // namespace confsa
