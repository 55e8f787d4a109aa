#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace salvox {

/// Radial kernel profile K(d) evaluated on squared Mahalanobis distance
/// d in [0, 1].
enum class Kernel {
  Identity,      // K(d) = d, K'(d) = 1
  Epanechnikov,  // K(d) = 1 - d, K'(d) = -1
  Gaussian,      // K(d) = exp(-d/2), K'(d) = -exp(-d/2)/2
};

inline double kernel_value(Kernel k, double d) {
  switch (k) {
    case Kernel::Identity: return d;
    case Kernel::Epanechnikov: return 1.0 - d;
    case Kernel::Gaussian: return std::exp(-0.5 * d);
  }
  return 0.0;
}

/// Weight -K'(d) used in the position update. The sign is fixed so that the
/// identity profile yields the plain importance-weighted centroid (the signs
/// in numerator and denominator cancel for a constant profile derivative).
inline double kernel_step_weight(Kernel k, double d) {
  switch (k) {
    case Kernel::Identity: return 1.0;
    case Kernel::Epanechnikov: return 1.0;
    case Kernel::Gaussian: return 0.5 * std::exp(-0.5 * d);
  }
  return 0.0;
}

inline Kernel kernel_from_name(const std::string& name) {
  if (name == "identity") return Kernel::Identity;
  if (name == "epanechnikov") return Kernel::Epanechnikov;
  if (name == "gaussian") return Kernel::Gaussian;
  throw std::invalid_argument("unknown kernel '" + name + "'");
}

inline const char* kernel_name(Kernel k) {
  switch (k) {
    case Kernel::Identity: return "identity";
    case Kernel::Epanechnikov: return "epanechnikov";
    case Kernel::Gaussian: return "gaussian";
  }
  return "?";
}

}  // namespace salvox
