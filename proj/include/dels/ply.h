#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace dels {

struct CloudPoint {
  Eigen::Vector3f xyz = Eigen::Vector3f::Zero();
  std::array<std::uint8_t, 3> rgb = {0, 0, 0};
  float confidence = 0.0f;
};

struct PointCloud {
  std::vector<CloudPoint> points;
};

// Binary little-endian PLY with vertex properties
// x y z (float), red green blue (uchar), confidence (float).
void WritePly(const std::filesystem::path& path, const PointCloud& cloud);

// Reads files in the layout written by WritePly.
PointCloud ReadPly(const std::filesystem::path& path);

}  // namespace dels
