#include "salvox/meta_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace salvox {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool iequals(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (std::tolower((unsigned char)a[i]) != std::tolower((unsigned char)b[i])) return false;
  return true;
}

template <typename T>
void widen_payload(const std::vector<char>& bytes, std::span<float> out) {
  const T* src = reinterpret_cast<const T*>(bytes.data());
  for (size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(src[i]);
}

}  // namespace

Volume load_volume(const std::filesystem::path& mhd_path) {
  std::ifstream hdr(mhd_path);
  if (!hdr) throw std::runtime_error("load_volume: cannot open " + mhd_path.string());

  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(hdr, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  int ndims = 3;
  if (auto it = kv.find("NDims"); it != kv.end()) ndims = std::stoi(it->second);
  if (ndims != 2 && ndims != 3)
    throw std::runtime_error("load_volume: unsupported NDims " + std::to_string(ndims));

  auto dim_it = kv.find("DimSize");
  if (dim_it == kv.end()) throw std::runtime_error("load_volume: missing DimSize");
  int dims[3] = {1, 1, 1};
  {
    std::istringstream ss(dim_it->second);
    for (int i = 0; i < ndims; ++i)
      if (!(ss >> dims[i])) throw std::runtime_error("load_volume: bad DimSize");
  }

  Eigen::Vector3d spacing(1.0, 1.0, 1.0);
  if (auto it = kv.find("ElementSpacing"); it != kv.end()) {
    std::istringstream ss(it->second);
    for (int i = 0; i < ndims; ++i)
      if (!(ss >> spacing[i])) throw std::runtime_error("load_volume: bad ElementSpacing");
  }

  if (auto it = kv.find("BinaryDataByteOrderMSB"); it != kv.end()) {
    if (!iequals(it->second, "false"))
      throw std::runtime_error("load_volume: big-endian payloads are not supported");
  }
  if (auto it = kv.find("CompressedData"); it != kv.end()) {
    if (!iequals(it->second, "false"))
      throw std::runtime_error("load_volume: compressed payloads are not supported");
  }

  auto type_it = kv.find("ElementType");
  if (type_it == kv.end()) throw std::runtime_error("load_volume: missing ElementType");
  const std::string& etype = type_it->second;
  size_t elem_size;
  if (etype == "MET_UCHAR") elem_size = 1;
  else if (etype == "MET_SHORT" || etype == "MET_USHORT") elem_size = 2;
  else if (etype == "MET_FLOAT") elem_size = 4;
  else throw std::runtime_error("load_volume: unsupported ElementType " + etype);

  auto data_it = kv.find("ElementDataFile");
  if (data_it == kv.end()) throw std::runtime_error("load_volume: missing ElementDataFile");
  if (iequals(data_it->second, "LOCAL"))
    throw std::runtime_error("load_volume: inline (LOCAL) payloads are not supported");
  const auto raw_path = mhd_path.parent_path() / data_it->second;

  std::ifstream raw(raw_path, std::ios::binary | std::ios::ate);
  if (!raw) throw std::runtime_error("load_volume: cannot open raw file " + raw_path.string());
  const auto file_size = static_cast<size_t>(raw.tellg());
  raw.seekg(0);

  const size_t n = size_t(dims[0]) * dims[1] * dims[2];
  if (file_size != n * elem_size) {
    std::ostringstream msg;
    msg << "load_volume: raw size mismatch, header implies " << n * elem_size << " bytes but "
        << raw_path.filename().string() << " has " << file_size;
    throw std::runtime_error(msg.str());
  }

  std::vector<char> bytes(file_size);
  raw.read(bytes.data(), std::streamsize(file_size));
  if (!raw) throw std::runtime_error("load_volume: short read on " + raw_path.string());

  Volume v(dims[0], dims[1], dims[2], spacing);
  if (etype == "MET_UCHAR") widen_payload<uint8_t>(bytes, v.data());
  else if (etype == "MET_SHORT") widen_payload<int16_t>(bytes, v.data());
  else if (etype == "MET_USHORT") widen_payload<uint16_t>(bytes, v.data());
  else std::memcpy(v.data().data(), bytes.data(), file_size);
  return v;
}

void save_volume(const Volume& v, const std::filesystem::path& mhd_path) {
  auto raw_path = mhd_path;
  raw_path.replace_extension(".raw");

  std::ofstream raw(raw_path, std::ios::binary);
  if (!raw) throw std::runtime_error("save_volume: cannot write " + raw_path.string());
  raw.write(reinterpret_cast<const char*>(v.data().data()),
            std::streamsize(v.size() * sizeof(float)));
  if (!raw) throw std::runtime_error("save_volume: write failed on " + raw_path.string());
  raw.close();

  std::ofstream hdr(mhd_path);
  if (!hdr) throw std::runtime_error("save_volume: cannot write " + mhd_path.string());
  hdr << "ObjectType = Image\n";
  hdr << "NDims = 3\n";
  hdr << "BinaryData = True\n";
  hdr << "BinaryDataByteOrderMSB = False\n";
  hdr << "CompressedData = False\n";
  hdr << "DimSize = " << v.nx() << ' ' << v.ny() << ' ' << v.nz() << '\n';
  hdr << "ElementSpacing = " << v.spacing().x() << ' ' << v.spacing().y() << ' '
      << v.spacing().z() << '\n';
  hdr << "ElementType = MET_FLOAT\n";
  hdr << "ElementDataFile = " << raw_path.filename().string() << '\n';
  if (!hdr) throw std::runtime_error("save_volume: write failed on " + mhd_path.string());
}

}  // namespace salvox
