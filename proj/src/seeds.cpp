#include "salvox/seeds.hpp"

#include "salvox/rng.hpp"

namespace salvox {

std::vector<Seed> plan_seeds(const Volume& v, const SeedPlan& plan) {
  plan.validate();

  std::vector<Eigen::Vector3d> positions;
  if (plan.mode == SeedPlan::Mode::Lattice) {
    const int dims[3] = {v.nx(), v.ny(), v.nz()};
    int counts[3];
    double start[3];
    for (int i = 0; i < 3; ++i) {
      counts[i] = std::max(1, int(std::floor(dims[i] / plan.spacing)));
      start[i] = (dims[i] - (counts[i] - 1) * plan.spacing) / 2.0;
      if (dims[i] == 1) {  // single-slice axis
        counts[i] = 1;
        start[i] = 0.0;
      }
    }
    for (int z = 0; z < counts[2]; ++z)
      for (int y = 0; y < counts[1]; ++y)
        for (int x = 0; x < counts[0]; ++x)
          positions.push_back(v.clamp_point({start[0] + x * plan.spacing,
                                             start[1] + y * plan.spacing,
                                             start[2] + z * plan.spacing}));
  } else {
    Rng rng(plan.rng_seed);
    positions.reserve(plan.count);
    for (int i = 0; i < plan.count; ++i) {
      positions.push_back({rng.next_range(0.0, v.nx() - 1),
                           rng.next_range(0.0, v.ny() - 1),
                           v.nz() == 1 ? 0.0 : rng.next_range(0.0, v.nz() - 1)});
    }
  }

  std::vector<Seed> seeds;
  seeds.reserve(positions.size() * plan.scales.size());
  int index = 0;
  for (const auto& p : positions)
    for (double s : plan.scales) seeds.push_back({p, s, index++});
  return seeds;
}

}  // namespace salvox
