#pragma once

#include <Eigen/Core>

#include <array>
#include <vector>

#include "salvox/volume.hpp"
#include "salvox/window.hpp"

namespace salvox {

/// Parameters for the four-quadrant entropy ascent (2D images only).
struct QuadrantParams {
  std::vector<int> scale_range;   // window half-sizes in pixels, strictly increasing
  double eta = 0.5;               // stop once the effective displacement falls below this
  int max_iters = 50;
  unsigned grid_spacing = 16;     // seed lattice spacing (used by callers planning seeds)

  void validate() const {
    if (scale_range.empty()) throw std::invalid_argument("quadrant: empty scale range");
    for (size_t i = 1; i < scale_range.size(); ++i)
      if (scale_range[i] <= scale_range[i - 1])
        throw std::invalid_argument("quadrant: scale range must be strictly increasing");
    if (eta <= 0.0) throw std::invalid_argument("quadrant: eta must be > 0");
    if (max_iters < 1) throw std::invalid_argument("quadrant: max_iters must be >= 1");
  }
};

/// Per-step state: entropies, optimal scales and the resulting displacement.
/// Quadrants are ordered NE, NW, SW, SE.
struct QuadrantState {
  std::array<double, 4> entropy{};         // max entropy per quadrant (bits)
  std::array<int, 4> best_scale{};         // argmax scale, smallest wins ties
  std::array<double, 4> norm_entropy{};    // entropies normalized to sum 1
  Eigen::Vector2d displacement = Eigen::Vector2d::Zero();
  bool degenerate = false;                 // all quadrants carried zero entropy
};

struct QuadrantResult {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  int best_scale = 0;        // optimal scale of the highest-entropy quadrant
  double entropy_bits = 0.0; // entropy of that quadrant window
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;
};

/// Entropy (bits) of the plain counting histogram over an axis-aligned pixel
/// rectangle clipped to the image; rectangles holding fewer than `min_pixels`
/// in-bounds pixels report zero.
double box_entropy_bits(const Volume& v, double x0, double x1, double y0, double y1,
                        const IntensityWindow& iw, int min_pixels = 4,
                        EvalCounter* counter = nullptr);

/// One ascent step: scans all scales in each of the four quadrant squares
/// anchored at p, weights the per-quadrant diagonal displacements by
/// normalized entropy and returns the moved position.
std::pair<Eigen::Vector2d, QuadrantState> quadrant_step(const Volume& v,
                                                        const Eigen::Vector2d& p,
                                                        const QuadrantParams& params,
                                                        const IntensityWindow& iw,
                                                        EvalCounter* counter = nullptr);

/// Runs quadrant_step from one seed until the displacement magnitude drops
/// below eta or max_iters is reached.
QuadrantResult quadrant_seek_one(const Volume& v, const Eigen::Vector2d& seed,
                                 const QuadrantParams& params, const IntensityWindow& iw,
                                 EvalCounter* counter = nullptr);

/// Independent trajectories for a list of seeds; result order follows seed
/// order regardless of scheduling.
std::vector<QuadrantResult> quadrant_seek(const Volume& v,
                                          const std::vector<Eigen::Vector2d>& seeds,
                                          const QuadrantParams& params, const IntensityWindow& iw,
                                          unsigned workers = 1, EvalCounter* counter = nullptr);

}  // namespace salvox
