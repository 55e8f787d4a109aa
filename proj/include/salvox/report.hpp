#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "salvox/config.hpp"
#include "salvox/detection.hpp"

namespace salvox {

/// FNV-1a 64-bit hash, used to checksum volume payloads and reports.
uint64_t fnv1a64(const void* data, size_t len);
std::string fnv1a64_hex(const void* data, size_t len);

/// Detection report: a header echoing the resolved config (so runs can be
/// reproduced bit-exactly) plus the detection array. Every field except
/// wall_time_ms is deterministic for fixed inputs.
std::string detection_report_json(const RunConfig& config, const Volume& volume,
                                  const std::vector<Detection>& dets, double wall_time_ms);

/// Writes text via a temp file and atomic rename so failures leave no
/// partial output.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

std::string read_file(const std::filesystem::path& path);

}  // namespace salvox
