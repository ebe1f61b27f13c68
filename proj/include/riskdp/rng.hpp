#pragma once

#include <cstdint>
#include <random>

namespace riskdp {

/// All seeded randomness uses std::mt19937_64, whose output sequence is fixed by
/// the C++ standard. Uniform variates are built from the top 53 bits so the
/// draws do not depend on the standard library's distribution implementations.
using Rng = std::mt19937_64;

/// Uniform on [0, 1).
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace riskdp
