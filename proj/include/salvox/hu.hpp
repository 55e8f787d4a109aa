#pragma once

#include <array>

#include "salvox/volume.hpp"

namespace salvox {

/// The seven classical moment invariants of a 2D image (translation,
/// rotation and scale invariant).
using HuVector = std::array<double, 7>;

/// Computes the invariants from normalized central moments of the intensity
/// mass. Throws when total mass is not positive.
HuVector hu_moments(const Volume& slice);

double hu_distance(const HuVector& a, const HuVector& b);

}  // namespace salvox
