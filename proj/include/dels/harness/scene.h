#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dels/raster.h"
#include "dels/search.h"

namespace dels {

enum class SceneKind { kPlane, kSphere, kBoxes };
enum class TextureKind { kChecker, kValueNoise };

const char* ToString(SceneKind kind);
const char* ToString(TextureKind kind);
// Throw InvalidConfig on unknown names.
SceneKind ParseSceneKind(const std::string& name);
TextureKind ParseTextureKind(const std::string& name);

// Cameras sit on a circle of radius `ring_radius` in the plane at distance
// `distance` in front of `look_at` (along -z) and all look at `look_at`.
// With arc_degrees < 360 they are spread evenly over that arc, end points
// included, so view 0 has neighbors at increasing baselines.
struct SceneSpec {
  SceneKind kind = SceneKind::kPlane;
  TextureKind texture = TextureKind::kValueNoise;
  double texture_scale = 0.08;  // checker tile / coarsest noise cell, scene units
  int width = 128;
  int height = 128;
  int views = 4;
  double ring_radius = 0.4;
  double distance = 1.0;
  double arc_degrees = 360.0;
  Eigen::Vector3d look_at = Eigen::Vector3d::Zero();
  double focal_factor = 1.5;  // focal length in units of the image width
  // Written to range.txt; a nonpositive pair means "derive from the rendered
  // depth with a 10% margin".
  double min_depth = 0.0;
  double max_depth = 0.0;
  std::uint64_t seed = 1;
  int supersample = 2;  // per-axis intensity samples per pixel

  // Throws InvalidConfig.
  void Check() const;
};

struct Dataset {
  std::vector<View> views;
  std::vector<Raster> colors;    // 1 or 3 channels in [0, 1]
  std::vector<Raster> gt_depth;  // empty when the dataset has none
  double min_depth = 0.0;
  double max_depth = 0.0;

  bool has_ground_truth() const { return !gt_depth.empty(); }
};

// Ray-cast rendering. Intensity is the scene texture with no shading, so
// unoccluded points look the same from every view.
Dataset RenderScene(const SceneSpec& spec, int threads = 1);

// Layout: images/NNN.png (16-bit gray), depth/NNN.pfm, cams/NNN.txt,
// range.txt.
void WriteDataset(const std::filesystem::path& root, const Dataset& dataset);
// Throws IoError when the layout is incomplete or unreadable.
Dataset LoadDataset(const std::filesystem::path& root);

void GenerateScene(const SceneSpec& spec, const std::filesystem::path& root,
                   int threads = 1);

// 1 where the reference pixel's true surface point lands inside the source
// image and matches the source depth at the nearest pixel within rel_tol.
Grid<std::uint8_t> VisibilityMask(const Raster& ref_depth,
                                  const Intrinsics& ref_intrinsics,
                                  const CameraPose& ref_pose,
                                  const Raster& src_depth,
                                  const Intrinsics& src_intrinsics,
                                  const CameraPose& src_pose,
                                  double rel_tol = 0.01);

// Scene geometry queries used by tests.
struct PlaneEquation {
  Eigen::Vector3d normal;  // unit
  double offset = 0.0;     // normal . x + offset = 0
};
PlaneEquation ScenePlane(const SceneSpec& spec);

}  // namespace dels
