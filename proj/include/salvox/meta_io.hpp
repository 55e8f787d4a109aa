#pragma once

#include <filesystem>
#include <string>

#include "salvox/volume.hpp"

namespace salvox {

/// Reads a MetaImage header (.mhd) plus its raw data file.
/// Honored keys: NDims, DimSize, ElementType, ElementSpacing, ElementDataFile,
/// BinaryDataByteOrderMSB (must be absent or False). Supported element types:
/// MET_UCHAR, MET_SHORT, MET_USHORT, MET_FLOAT; payloads are widened to float.
/// Throws std::runtime_error on missing files, header/raw size mismatch, or
/// unsupported element types.
Volume load_volume(const std::filesystem::path& mhd_path);

/// Writes `v` as a little-endian MET_FLOAT .mhd/.raw pair. load_volume
/// round-trips bit-exactly.
void save_volume(const Volume& v, const std::filesystem::path& mhd_path);

}  // namespace salvox
