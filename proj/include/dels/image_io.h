#pragma once

#include <filesystem>
#include <utility>

#include "dels/geometry.h"
#include "dels/raster.h"

namespace dels {

// PNG, 8 or 16 bit, gray or RGB(A). Values are scaled to [0, 1]; color
// input is reduced to luma 0.299 R + 0.587 G + 0.114 B.
Raster ReadPngGray(const std::filesystem::path& path);

// Same as above but keeps three color channels (gray input is replicated).
Raster ReadPngColor(const std::filesystem::path& path);

// Writes a single-channel raster in [0, 1] as a grayscale PNG.
void WritePngGray(const std::filesystem::path& path, const Raster& raster,
                  int bit_depth = 16);

// Portable float map. One or three channels, rows stored bottom to top.
// Values pass through float32; NaN and Inf mark invalid pixels.
Raster ReadPfm(const std::filesystem::path& path);
void WritePfm(const std::filesystem::path& path, const Raster& raster);

struct CameraFile {
  Intrinsics intrinsics;
  CameraPose pose;  // world to camera
};

// Line 1: fx fy cx cy. Lines 2-4: row-major rotation. Line 5: translation.
CameraFile ReadCameraFile(const std::filesystem::path& path);
void WriteCameraFile(const std::filesystem::path& path,
                     const CameraFile& camera);

// "min max" depth range.
std::pair<double, double> ReadDepthRange(const std::filesystem::path& path);
void WriteDepthRange(const std::filesystem::path& path, double min_depth,
                     double max_depth);

}  // namespace dels
