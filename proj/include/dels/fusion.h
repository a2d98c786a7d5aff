#pragma once

#include <optional>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dels/geometry.h"
#include "dels/ply.h"
#include "dels/raster.h"

namespace dels {

struct FusionParams {
  double omega = 0.2;  // confidence needed to compete on depth precision
  double eta = 0.01;   // relative depth agreement with the selected candidate
  double beta = 0.2;   // point-cloud confidence filter
  int min_consistent = 2;
  double consist_rel = 0.01;
  // Pixels this close to the image border are left out of the point cloud.
  // The default covers a radius-3 patch at the coarsest pyramid level.
  int cloud_margin = 12;

  // Throws InvalidConfig.
  void Check() const;
};

// How candidates from the N sources are combined per pixel.
enum class FusionMode {
  kAverage,            // mean of every finite candidate, occluded included
  kOuterMasked,        // mean of the non-occluded candidates
  kHighestConfidence,  // most confident candidate plus agreeing ones
  kGeometryAware,      // narrowest depth range among confident ones, plus
                       // agreeing ones
};

const char* ToString(FusionMode mode);
// Throws InvalidConfig on unknown names.
FusionMode ParseFusionMode(const std::string& name);

struct FusionCandidate {
  double depth = 0.0;
  double confidence = 0.0;
  double delta_depth = 0.0;
  bool valid = true;
};

struct FusedValue {
  double depth = 0.0;
  double confidence = 0.0;
};

// argmin delta over valid candidates with confidence > omega; argmax
// confidence when none qualifies. Lowest index wins ties. nullopt when every
// candidate is invalid.
std::optional<int> SelectReferenceCandidate(
    std::span<const FusionCandidate> candidates, double omega);

// Same fallback rule but always by confidence.
std::optional<int> SelectMostConfident(
    std::span<const FusionCandidate> candidates);

// Mean depth and confidence over the valid candidates within relative
// distance eta of the selected one. nullopt when every candidate is invalid.
std::optional<FusedValue> FusePixel(std::span<const FusionCandidate> candidates,
                                    const FusionParams& params,
                                    FusionMode mode = FusionMode::kGeometryAware);

// Per-source maps; depth NaN marks invalid pixels.
struct SourceMaps {
  Raster depth;
  Raster confidence;
  Raster delta_depth;
  Grid<std::uint8_t> occluded;
};

struct FusedMaps {
  Raster depth;       // NaN where no candidate survived
  Raster confidence;  // 0 where no candidate survived
};

FusedMaps FuseMaps(const std::vector<SourceMaps>& sources,
                   const FusionParams& params,
                   FusionMode mode = FusionMode::kGeometryAware,
                   int threads = 1);

struct FusedView {
  Raster depth;
  Raster confidence;
  Raster color;  // 1 or 3 channels in [0, 1]
  Intrinsics intrinsics;
  CameraPose pose;
};

// Views are visited in order, pixels in row-major order. A pixel with
// confidence >= beta, at least cloud_margin pixels from the border and not yet
// merged becomes a point when at least min_consistent other views see a depth
// within consist_rel (relative) at the nearest pixel of its reprojection. The
// point averages the agreeing back-projections, which are then marked merged.
// A point lying in front of a surface that another view observes (beyond
// consist_rel) is dropped. Throws InvalidConfig with fewer than two views.
PointCloud BuildPointCloud(const std::vector<FusedView>& views,
                           const FusionParams& params);

}  // namespace dels
