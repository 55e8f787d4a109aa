#include "salvox/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace salvox {

using nlohmann::json;

void RunConfig::validate() const {
  method_from_name(method);
  if (bins < 2) throw std::invalid_argument("config: bins must be >= 2");
  if (window_low && window_high && !(*window_low < *window_high))
    throw std::invalid_argument("config: window low must be < high");
  if ((window_low.has_value()) != (window_high.has_value()))
    throw std::invalid_argument("config: window needs both low and high");
  if (seed_mode != "lattice" && seed_mode != "random")
    throw std::invalid_argument("config: seed mode must be lattice or random");
  if (seed_mode == "lattice" && seed_spacing <= 0.0)
    throw std::invalid_argument("config: seed spacing must be > 0");
  if (seed_mode == "random" && seed_count < 1)
    throw std::invalid_argument("config: seed count must be >= 1");
  if (scales.empty()) throw std::invalid_argument("config: scales must be non-empty");
  for (double s : scales)
    if (s <= 0.0) throw std::invalid_argument("config: scales must be > 0");
  if (top_k < 1) throw std::invalid_argument("config: k must be >= 1");
  if (dedupe_radius < 0.0) throw std::invalid_argument("config: dedupe radius must be >= 0");
  if (entropy_quantile < 0.0 || entropy_quantile > 1.0 || pdf_quantile < 0.0 ||
      pdf_quantile > 1.0)
    throw std::invalid_argument("config: quantiles must be in [0,1]");
  kernel_from_name(shift_step_kernel);
  kernel_from_name(shift_hist_kernel);
  kernel_from_name(abmsod_kernel);
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j = json::parse(text);
  RunConfig c;

  static const std::vector<std::string> known = {
      "method",        "volume",           "window",           "bins",
      "seeds",         "scales",           "k",                "dedupe_radius",
      "entropy_quantile", "pdf_quantile",  "workers",          "rng_seed",
      "out",           "params"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw std::invalid_argument("config: unknown key '" + it.key() + "'");
  }

  c.method = j.value("method", c.method);
  c.volume_path = j.value("volume", c.volume_path);
  if (j.contains("window")) {
    const auto& w = j["window"];
    for (auto it = w.begin(); it != w.end(); ++it)
      if (it.key() != "low" && it.key() != "high")
        throw std::invalid_argument("config: unknown key 'window." + it.key() + "'");
    c.window_low = w.at("low").get<double>();
    c.window_high = w.at("high").get<double>();
  }
  c.bins = j.value("bins", c.bins);
  if (j.contains("seeds")) {
    const auto& s = j["seeds"];
    for (auto it = s.begin(); it != s.end(); ++it)
      if (it.key() != "mode" && it.key() != "spacing" && it.key() != "count")
        throw std::invalid_argument("config: unknown key 'seeds." + it.key() + "'");
    c.seed_mode = s.value("mode", c.seed_mode);
    c.seed_spacing = s.value("spacing", c.seed_spacing);
    c.seed_count = s.value("count", c.seed_count);
  }
  if (j.contains("scales")) c.scales = j["scales"].get<std::vector<double>>();
  c.top_k = j.value("k", c.top_k);
  c.dedupe_radius = j.value("dedupe_radius", c.dedupe_radius);
  c.entropy_quantile = j.value("entropy_quantile", c.entropy_quantile);
  c.pdf_quantile = j.value("pdf_quantile", c.pdf_quantile);
  c.workers = j.value("workers", c.workers);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
  c.out_path = j.value("out", c.out_path);

  if (j.contains("params")) {
    const auto& p = j["params"];
    static const std::vector<std::string> pk = {
        "quadrant_eta",     "quadrant_max_iters", "shift_min_step", "shift_max_iters",
        "shift_step_kernel", "shift_hist_kernel", "abmsod_threshold", "abmsod_max_iters",
        "abmsod_kernel",    "lambda_min",         "lambda_max"};
    for (auto it = p.begin(); it != p.end(); ++it)
      if (std::find(pk.begin(), pk.end(), it.key()) == pk.end())
        throw std::invalid_argument("config: unknown key 'params." + it.key() + "'");
    c.quadrant_eta = p.value("quadrant_eta", c.quadrant_eta);
    c.quadrant_max_iters = p.value("quadrant_max_iters", c.quadrant_max_iters);
    c.shift_min_step = p.value("shift_min_step", c.shift_min_step);
    c.shift_max_iters = p.value("shift_max_iters", c.shift_max_iters);
    c.shift_step_kernel = p.value("shift_step_kernel", c.shift_step_kernel);
    c.shift_hist_kernel = p.value("shift_hist_kernel", c.shift_hist_kernel);
    c.abmsod_threshold = p.value("abmsod_threshold", c.abmsod_threshold);
    c.abmsod_max_iters = p.value("abmsod_max_iters", c.abmsod_max_iters);
    c.abmsod_kernel = p.value("abmsod_kernel", c.abmsod_kernel);
    c.lambda_min = p.value("lambda_min", c.lambda_min);
    c.lambda_max = p.value("lambda_max", c.lambda_max);
  }

  c.validate();
  return c;
}

std::string RunConfig::to_json_text() const {
  json j;
  j["method"] = method;
  j["volume"] = volume_path;
  if (window_low && window_high) j["window"] = {{"low", *window_low}, {"high", *window_high}};
  j["bins"] = bins;
  if (seed_mode == "lattice")
    j["seeds"] = {{"mode", "lattice"}, {"spacing", seed_spacing}};
  else
    j["seeds"] = {{"mode", "random"}, {"count", seed_count}};
  j["scales"] = scales;
  j["k"] = top_k;
  j["dedupe_radius"] = dedupe_radius;
  j["entropy_quantile"] = entropy_quantile;
  j["pdf_quantile"] = pdf_quantile;
  j["workers"] = workers;
  j["rng_seed"] = rng_seed;
  j["params"] = {{"quadrant_eta", quadrant_eta},
                 {"quadrant_max_iters", quadrant_max_iters},
                 {"shift_min_step", shift_min_step},
                 {"shift_max_iters", shift_max_iters},
                 {"shift_step_kernel", shift_step_kernel},
                 {"shift_hist_kernel", shift_hist_kernel},
                 {"abmsod_threshold", abmsod_threshold},
                 {"abmsod_max_iters", abmsod_max_iters},
                 {"abmsod_kernel", abmsod_kernel},
                 {"lambda_min", lambda_min},
                 {"lambda_max", lambda_max}};
  return j.dump();
}

IntensityWindow RunConfig::intensity_window(const Volume& v) const {
  if (window_low && window_high) return IntensityWindow(*window_low, *window_high, bins);
  return IntensityWindow::full_range(v, bins);
}

DetectParams RunConfig::detect_params() const {
  DetectParams p;
  p.method = method_from_name(method);
  p.seeds.mode = seed_mode == "lattice" ? SeedPlan::Mode::Lattice : SeedPlan::Mode::Random;
  p.seeds.spacing = seed_spacing;
  p.seeds.count = seed_count;
  p.seeds.scales = scales;
  p.seeds.rng_seed = rng_seed;
  p.top_k = top_k;
  p.dedupe_radius = dedupe_radius;
  p.entropy_quantile = entropy_quantile;
  p.pdf_quantile = pdf_quantile;
  p.workers = workers;

  p.quadrant.eta = quadrant_eta;
  p.quadrant.max_iters = quadrant_max_iters;
  for (double s : scales) p.quadrant.scale_range.push_back(int(std::lround(s)));
  std::sort(p.quadrant.scale_range.begin(), p.quadrant.scale_range.end());
  p.quadrant.scale_range.erase(
      std::unique(p.quadrant.scale_range.begin(), p.quadrant.scale_range.end()),
      p.quadrant.scale_range.end());

  p.shift.min_step = shift_min_step;
  p.shift.max_iters = shift_max_iters;
  p.shift.step_kernel = kernel_from_name(shift_step_kernel);
  p.shift.hist_kernel = kernel_from_name(shift_hist_kernel);

  p.abmsod.threshold = abmsod_threshold;
  p.abmsod.max_iterations = abmsod_max_iters;
  p.abmsod.kernel = kernel_from_name(abmsod_kernel);
  p.abmsod.lambda_min = lambda_min;
  p.abmsod.lambda_max = lambda_max;
  return p;
}

}  // namespace salvox
