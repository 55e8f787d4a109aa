#include "salvox/report.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace salvox {

using nlohmann::json;

uint64_t fnv1a64(const void* data, size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a64_hex(const void* data, size_t len) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)fnv1a64(data, len));
  return buf;
}

std::string detection_report_json(const RunConfig& config, const Volume& volume,
                                  const std::vector<Detection>& dets, double wall_time_ms) {
  json j;
  json header;
  header["version"] = "0.1.0";
  header["volume"] = config.volume_path;
  header["volume_checksum"] =
      fnv1a64_hex(volume.data().data(), volume.size() * sizeof(float));
  header["volume_dims"] = {volume.nx(), volume.ny(), volume.nz()};
  header["config"] = json::parse(config.to_json_text());
  header["wall_time_ms"] = wall_time_ms;
  header["worker_count"] = config.workers;
  j["header"] = std::move(header);

  json arr = json::array();
  for (const auto& d : dets) {
    json dj;
    dj["center"] = {d.center.x(), d.center.y(), d.center.z()};
    json h = json::array();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) h.push_back(d.H(r, c));
    dj["H"] = std::move(h);
    dj["entropy_bits"] = d.entropy_bits;
    dj["pdf_diff"] = d.pdf_diff;
    dj["bhattacharyya"] = d.bhattacharyya;
    dj["iterations"] = d.iterations;
    dj["flags"] = d.flag_names();
    dj["seed_index"] = d.seed_index;
    arr.push_back(std::move(dj));
  }
  j["detections"] = std::move(arr);
  return j.dump(2) + "\n";
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed on " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace salvox
