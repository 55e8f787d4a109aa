#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "salvox/pipeline.hpp"

namespace salvox {

/// Fully resolved run configuration. Validated before any compute; unknown
/// keys in config files are rejected. All randomness flows from rng_seed.
struct RunConfig {
  std::string method = "shift";
  std::string volume_path;
  std::optional<double> window_low, window_high;  // observed range when unset
  int bins = 64;
  std::string seed_mode = "lattice";
  double seed_spacing = 16.0;
  int seed_count = 400;
  std::vector<double> scales = {8.0};
  int top_k = 20;
  double dedupe_radius = 5.0;
  double entropy_quantile = 0.9;
  double pdf_quantile = 0.0;
  unsigned workers = 1;
  uint64_t rng_seed = 0;
  std::string out_path;

  // method parameters
  double quadrant_eta = 0.5;
  int quadrant_max_iters = 50;
  double shift_min_step = 0.1;
  int shift_max_iters = 50;
  std::string shift_step_kernel = "identity";
  std::string shift_hist_kernel = "identity";
  double abmsod_threshold = 1e-4;
  int abmsod_max_iters = 15;
  std::string abmsod_kernel = "gaussian";
  double lambda_min = 4.0;
  double lambda_max = 0.0;  // 0 -> derived from the volume

  void validate() const;

  /// Parses a JSON config document, rejecting unknown keys.
  static RunConfig from_json_text(const std::string& text);
  std::string to_json_text() const;

  IntensityWindow intensity_window(const Volume& v) const;
  DetectParams detect_params() const;
};

}  // namespace salvox
