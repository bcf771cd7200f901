#pragma once

#include <cstdint>
#include <random>

namespace renorm::detail {

/// Uniform on [0, 1) from the top 53 bits; identical on every platform,
/// unlike std::uniform_real_distribution.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace renorm::detail
