#pragma once

#include "hmcf/sphere_domain.hpp"

#include <cstdint>

namespace hmcf {

/// Seeded band-limited field: independent coefficients on degrees
/// [l_min, l_max] with a 1/(1+l)^2 falloff, synthesized on the grid and
/// normalized to unit sup-norm. Deterministic across platforms.
ScalarField band_limited_noise(const DomainPtr& domain, int l_min, int l_max,
                               std::uint64_t seed);

}  // namespace hmcf
