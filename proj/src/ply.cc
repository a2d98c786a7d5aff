#include "dels/ply.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "dels/common.h"

namespace dels {
namespace {

constexpr std::size_t kVertexBytes = 3 * 4 + 3 + 4;

const char* const kHeaderProperties =
    "property float x\n"
    "property float y\n"
    "property float z\n"
    "property uchar red\n"
    "property uchar green\n"
    "property uchar blue\n"
    "property float confidence\n";

void PutFloat(char* dst, float value) {
  std::uint32_t word = std::bit_cast<std::uint32_t>(value);
  if constexpr (std::endian::native == std::endian::big) {
    word = __builtin_bswap32(word);
  }
  std::memcpy(dst, &word, 4);
}

float GetFloat(const char* src) {
  std::uint32_t word;
  std::memcpy(&word, src, 4);
  if constexpr (std::endian::native == std::endian::big) {
    word = __builtin_bswap32(word);
  }
  return std::bit_cast<float>(word);
}

}  // namespace

void WritePly(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string());
  out << "ply\n"
      << "format binary_little_endian 1.0\n"
      << "element vertex " << cloud.points.size() << '\n'
      << kHeaderProperties << "end_header\n";
  std::string payload(cloud.points.size() * kVertexBytes, '\0');
  char* dst = payload.data();
  for (const CloudPoint& p : cloud.points) {
    PutFloat(dst, p.xyz.x());
    PutFloat(dst + 4, p.xyz.y());
    PutFloat(dst + 8, p.xyz.z());
    std::memcpy(dst + 12, p.rgb.data(), 3);
    PutFloat(dst + 15, p.confidence);
    dst += kVertexBytes;
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

PointCloud ReadPly(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "ply") throw IoError("not a PLY file: " + path.string());
  std::size_t count = 0;
  std::string properties;
  bool binary_le = false;
  while (std::getline(in, line) && line != "end_header") {
    std::istringstream fields(line);
    std::string keyword;
    fields >> keyword;
    if (keyword == "format") {
      std::string kind;
      fields >> kind;
      binary_le = kind == "binary_little_endian";
    } else if (keyword == "element") {
      std::string name;
      fields >> name >> count;
      if (name != "vertex") throw IoError("unexpected PLY element " + name);
    } else if (keyword == "property") {
      properties += line + "\n";
    }
  }
  if (line != "end_header" || !binary_le || properties != kHeaderProperties) {
    throw IoError("unsupported PLY layout: " + path.string());
  }
  std::string payload(count * kVertexBytes, '\0');
  in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!in && count > 0) throw IoError("truncated PLY: " + path.string());
  PointCloud cloud;
  cloud.points.resize(count);
  const char* src = payload.data();
  for (CloudPoint& p : cloud.points) {
    p.xyz = {GetFloat(src), GetFloat(src + 4), GetFloat(src + 8)};
    std::memcpy(p.rgb.data(), src + 12, 3);
    p.confidence = GetFloat(src + 15);
    src += kVertexBytes;
  }
  return cloud;
}

}  // namespace dels
