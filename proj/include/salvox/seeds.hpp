#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "salvox/volume.hpp"

namespace salvox {

/// Where seek trajectories start: a centered lattice at fixed spacing, or
/// uniformly random positions from a seeded generator. Every position is
/// paired with every initial scale.
struct SeedPlan {
  enum class Mode { Lattice, Random } mode = Mode::Lattice;
  double spacing = 16.0;  // lattice
  int count = 0;          // random
  std::vector<double> scales = {8.0};
  uint64_t rng_seed = 0;

  void validate() const {
    if (mode == Mode::Lattice && spacing <= 0.0)
      throw std::invalid_argument("seed plan: spacing must be > 0");
    if (mode == Mode::Random && count < 1)
      throw std::invalid_argument("seed plan: count must be >= 1");
    if (scales.empty()) throw std::invalid_argument("seed plan: no initial scales");
    for (double s : scales)
      if (s <= 0.0) throw std::invalid_argument("seed plan: scales must be > 0");
  }
};

struct Seed {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double scale = 0.0;
  int index = 0;
};

/// Deterministic seed list. Lattice mode tiles floor(dim/spacing) positions
/// per axis, centered; spacing larger than every dim degenerates to a single
/// centered seed.
std::vector<Seed> plan_seeds(const Volume& v, const SeedPlan& plan);

}  // namespace salvox
