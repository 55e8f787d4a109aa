// salvox: salient-region detection in volumes via iterative entropy ascent.
//
// Subcommands:
//   detect   run a seek method over a volume, write a JSON report
//   phantom  generate a synthetic volume + ground-truth sidecar from a spec
//   eval     score detections against a ground-truth sidecar
//   bench    time detection across worker counts
//
// Exit codes: 0 success (detect: at least one detection), 1 config/IO error,
// 2 detect ran but found nothing.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <iostream>

#include "salvox/config.hpp"
#include "salvox/meta_io.hpp"
#include "salvox/parallel.hpp"
#include "salvox/pipeline.hpp"
#include "salvox/report.hpp"

namespace {

using namespace salvox;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct CliOverrides {
  std::string config_path;
  std::string method, volume, window, seeds, scales, out, tmpl;
  int bins = -1, k = -1;
  double dedupe_radius = -1.0;
  int workers = -1;
  long long rng_seed = -1;
  double entropy_quantile = -1.0, pdf_quantile = -1.0;
};

void add_common_flags(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file (flags override it)");
  cmd->add_option("--method", o.method, "quadrant | shift | abmsod");
  cmd->add_option("--volume", o.volume, "input volume (.mhd)");
  cmd->add_option("--window", o.window, "intensity window LOW:HIGH");
  cmd->add_option("--bins", o.bins, "histogram bin count");
  cmd->add_option("--seeds", o.seeds, "lattice:SPACING | random:COUNT");
  cmd->add_option("--scales", o.scales, "initial scales, comma separated");
  cmd->add_option("--k", o.k, "detections kept after dedupe");
  cmd->add_option("--dedupe-radius", o.dedupe_radius, "suppression radius (voxels)");
  cmd->add_option("--workers", o.workers, "worker threads (0 = all cores)");
  cmd->add_option("--rng-seed", o.rng_seed, "seed for all randomness");
  cmd->add_option("--out", o.out, "output JSON path");
  cmd->add_option("--entropy-quantile", o.entropy_quantile,
                  "keep detections at/above this entropy quantile");
  cmd->add_option("--pdf-quantile", o.pdf_quantile,
                  "keep detections at/above this pdf-difference quantile");
}

RunConfig resolve_config(const CliOverrides& o) {
  RunConfig cfg;
  if (!o.config_path.empty()) cfg = RunConfig::from_json_text(read_file(o.config_path));
  if (!o.method.empty()) cfg.method = o.method;
  if (!o.volume.empty()) cfg.volume_path = o.volume;
  if (!o.window.empty()) {
    const auto colon = o.window.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("--window expects LOW:HIGH");
    cfg.window_low = std::stod(o.window.substr(0, colon));
    cfg.window_high = std::stod(o.window.substr(colon + 1));
  }
  if (o.bins >= 0) cfg.bins = o.bins;
  if (!o.seeds.empty()) {
    const auto colon = o.seeds.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("--seeds expects lattice:SPACING or random:COUNT");
    const std::string mode = o.seeds.substr(0, colon);
    const std::string arg = o.seeds.substr(colon + 1);
    if (mode == "lattice") {
      cfg.seed_mode = "lattice";
      cfg.seed_spacing = std::stod(arg);
    } else if (mode == "random") {
      cfg.seed_mode = "random";
      cfg.seed_count = std::stoi(arg);
    } else {
      throw std::invalid_argument("--seeds mode must be lattice or random");
    }
  }
  if (!o.scales.empty()) {
    cfg.scales.clear();
    std::string rest = o.scales;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      cfg.scales.push_back(std::stod(rest.substr(0, comma)));
      if (comma == std::string::npos) break;
      rest = rest.substr(comma + 1);
    }
  }
  if (o.k >= 0) cfg.top_k = o.k;
  if (o.dedupe_radius >= 0.0) cfg.dedupe_radius = o.dedupe_radius;
  if (o.workers >= 0) cfg.workers = unsigned(o.workers);
  if (o.rng_seed >= 0) cfg.rng_seed = uint64_t(o.rng_seed);
  if (!o.out.empty()) cfg.out_path = o.out;
  if (o.entropy_quantile >= 0.0) cfg.entropy_quantile = o.entropy_quantile;
  if (o.pdf_quantile >= 0.0) cfg.pdf_quantile = o.pdf_quantile;
  cfg.validate();
  return cfg;
}

std::vector<Detection> run_detect(const RunConfig& cfg, const Volume& v) {
  const IntensityWindow iw = cfg.intensity_window(v);
  DetectParams params = cfg.detect_params();
  if (params.workers == 0) params.workers = hardware_workers();
  return detect(v, iw, params);
}

int cmd_detect(const CliOverrides& o) {
  const RunConfig cfg = resolve_config(o);
  if (cfg.volume_path.empty()) throw std::invalid_argument("detect: --volume is required");
  if (cfg.out_path.empty()) throw std::invalid_argument("detect: --out is required");

  const Volume v = load_volume(cfg.volume_path);
  const auto start = Clock::now();
  auto dets = run_detect(cfg, v);
  const double wall_ms = ms_since(start);

  if (!o.tmpl.empty() && !dets.empty()) {
    const Volume tmpl = load_volume(o.tmpl);
    const size_t best = hu_filter(dets, v, tmpl);
    // annotate rather than discard: the report keeps the full top-k
    auto report = json::parse(detection_report_json(cfg, v, dets, wall_ms));
    for (size_t i = 0; i < dets.size(); ++i)
      report["detections"][i]["hu_distance"] = hu_template_distance(dets[i], v, tmpl);
    report["header"]["hu_best_index"] = best;
    write_file_atomic(cfg.out_path, report.dump(2) + "\n");
  } else {
    write_file_atomic(cfg.out_path, detection_report_json(cfg, v, dets, wall_ms));
  }

  size_t usable = 0;
  for (const auto& d : dets)
    if (!d.has(kFlagDegenerate)) ++usable;
  std::cerr << "detect: " << usable << " detection(s) written to " << cfg.out_path << "\n";
  return usable > 0 ? 0 : 2;
}

int cmd_phantom(const std::string& spec_path, const std::string& out_path) {
  const PhantomSpec spec = PhantomSpec::from_json_text(read_file(spec_path));
  auto [volume, gt] = make_phantom(spec);
  save_volume(volume, out_path);
  std::filesystem::path gt_path(out_path);
  gt_path.replace_extension(".gt.json");
  write_file_atomic(gt_path, gt.to_json_text());
  std::cerr << "phantom: wrote " << out_path << " and " << gt_path.string() << "\n";
  return 0;
}

int cmd_eval(const std::string& dets_path, const std::string& gt_path,
             const std::string& out_path) {
  const json report = json::parse(read_file(dets_path));
  const GroundTruth gt = GroundTruth::from_json_text(read_file(gt_path));

  const auto& dims = report.at("header").at("volume_dims");
  if (dims.at(0).get<int>() != gt.dims[0] || dims.at(1).get<int>() != gt.dims[1] ||
      dims.at(2).get<int>() != gt.dims[2])
    throw std::invalid_argument("eval: detection report and ground truth dims differ");

  Volume frame(gt.dims[0], gt.dims[1], gt.dims[2]);

  struct Row {
    size_t det;
    int region;
    double jaccard;
  };
  std::vector<Row> rows;
  std::vector<double> best_region_jaccard(gt.regions.size(), 0.0);

  const auto& dets = report.at("detections");
  for (size_t i = 0; i < dets.size(); ++i) {
    EllipsoidWindow win;
    const auto& c = dets[i].at("center");
    win.center = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
    const auto& h = dets[i].at("H");
    for (int r = 0; r < 3; ++r)
      for (int cc = 0; cc < 3; ++cc) win.H(r, cc) = h.at(r * 3 + cc).get<double>();

    const auto det_mask = rasterize_window(frame, win);
    Row row{i, -1, 0.0};
    for (size_t g = 0; g < gt.regions.size(); ++g) {
      if (det_mask.empty() && gt.regions[g].mask.empty()) continue;
      const double jac = jaccard(det_mask, gt.regions[g].mask);
      if (jac > row.jaccard) {
        row.jaccard = jac;
        row.region = int(g);
      }
      best_region_jaccard[g] = std::max(best_region_jaccard[g], jac);
    }
    rows.push_back(row);
  }

  int matched = 0;
  double jac_sum = 0.0;
  for (double j : best_region_jaccard)
    if (j > 0.0) {
      ++matched;
      jac_sum += j;
    }

  json out;
  out["regions"] = gt.regions.size();
  out["detections"] = dets.size();
  out["recall"] = gt.regions.empty() ? 0.0 : double(matched) / double(gt.regions.size());
  out["mean_jaccard_matched"] = matched == 0 ? 0.0 : jac_sum / matched;
  out["per_region_best_jaccard"] = best_region_jaccard;
  json table = json::array();
  for (const auto& r : rows)
    table.push_back({{"detection", r.det}, {"region", r.region}, {"jaccard", r.jaccard}});
  out["per_detection"] = std::move(table);

  const std::string text = out.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_file_atomic(out_path, text);
  return 0;
}

int cmd_bench(const CliOverrides& o, int repeat) {
  RunConfig cfg = resolve_config(o);
  if (cfg.volume_path.empty()) throw std::invalid_argument("bench: --volume is required");
  if (repeat < 1) throw std::invalid_argument("bench: --repeat must be >= 1");
  const Volume v = load_volume(cfg.volume_path);

  std::vector<unsigned> worker_counts = {1, 2, 4};
  const unsigned max_workers = hardware_workers();
  if (std::find(worker_counts.begin(), worker_counts.end(), max_workers) == worker_counts.end())
    worker_counts.push_back(max_workers);

  json results = json::array();
  for (unsigned w : worker_counts) {
    RunConfig run_cfg = cfg;
    run_cfg.workers = w;
    std::vector<double> times;
    std::string checksum;
    for (int rep = 0; rep < repeat; ++rep) {
      const auto start = Clock::now();
      const auto dets = run_detect(run_cfg, v);
      times.push_back(ms_since(start));
      // checksum only the detection array so worker counts can be compared
      const auto report = json::parse(detection_report_json(run_cfg, v, dets, 0.0));
      const std::string body = report.at("detections").dump();
      checksum = fnv1a64_hex(body.data(), body.size());
    }
    std::sort(times.begin(), times.end());
    const double median = times[times.size() / 2];
    results.push_back({{"workers", w},
                       {"runs_ms", times},
                       {"median_ms", median},
                       {"detections_checksum", checksum}});
  }

  json out;
  out["method"] = cfg.method;
  out["volume"] = cfg.volume_path;
  out["repeat"] = repeat;
  out["low_confidence"] = repeat < 2;
  out["results"] = std::move(results);
  out["config"] = json::parse(cfg.to_json_text());

  const std::string text = out.dump(2) + "\n";
  if (cfg.out_path.empty())
    std::cout << text;
  else
    write_file_atomic(cfg.out_path, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"salient-region detection in volumes via iterative entropy ascent"};
  app.require_subcommand(1);

  CliOverrides detect_opts;
  auto* detect_cmd = app.add_subcommand("detect", "run a seek method and write detections");
  add_common_flags(detect_cmd, detect_opts);
  detect_cmd->add_option("--template", detect_opts.tmpl,
                         "2D template image for Hu-moment ranking");

  std::string phantom_spec, phantom_out;
  auto* phantom_cmd = app.add_subcommand("phantom", "generate a synthetic volume + ground truth");
  phantom_cmd->add_option("spec", phantom_spec, "phantom spec JSON")->required();
  phantom_cmd->add_option("out", phantom_out, "output volume (.mhd)")->required();

  std::string eval_dets, eval_gt, eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "score detections against ground truth");
  eval_cmd->add_option("detections", eval_dets, "detection report JSON")->required();
  eval_cmd->add_option("groundtruth", eval_gt, "ground-truth sidecar JSON")->required();
  eval_cmd->add_option("--out", eval_out, "metrics JSON path (stdout when omitted)");

  CliOverrides bench_opts;
  int bench_repeat = 3;
  auto* bench_cmd = app.add_subcommand("bench", "time detection across worker counts");
  add_common_flags(bench_cmd, bench_opts);
  bench_cmd->add_option("--repeat", bench_repeat, "repeats per worker count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (detect_cmd->parsed()) return cmd_detect(detect_opts);
    if (phantom_cmd->parsed()) return cmd_phantom(phantom_spec, phantom_out);
    if (eval_cmd->parsed()) return cmd_eval(eval_dets, eval_gt, eval_out);
    if (bench_cmd->parsed()) return cmd_bench(bench_opts, bench_repeat);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
