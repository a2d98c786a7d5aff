#pragma once

#include <array>

#include "dels/raster.h"

namespace dels {

// Search parameters. Per-level arrays are indexed by pyramid level j
// (0 = full resolution, 2 = quarter resolution).
struct PartitionConfig {
  int k = 12;
  double delta_init = 4.0;
  std::array<double, kPyramidLevels> eps = {0.5, 1.0, 2.0};
  std::array<int, kPyramidLevels> iters = {2, 2, 4};
  // When false the width is held at delta_init for every iteration of every
  // level (the width only changes meaning through the level rescaling).
  bool dynamic_width = true;

  // Throws InvalidConfig.
  void Check() const;
};

struct PartitionBorders {
  double left = 0.0;
  double right = 0.0;
};

// Inner set spans [-(k-2)/2 * width, +(k-2)/2 * width] around the estimate.
PartitionBorders ComputePartitionBorders(double width, int k);

inline bool IsOuterPartition(int partition, int k) {
  return partition == 0 || partition == k - 1;
}

// Offset of the representative point of `partition` from the current
// estimate: midpoints for inner partitions, half a width beyond the border
// for the two outer ones.
double RelativeResidual(int partition, double width, int k);

// Inner selections halve the width (floored at eps); outer ones keep it.
double UpdateWidth(double width, int partition, double eps, int k);

// Number of partition borders strictly exceeded by the relative residual.
int GroundTruthPartitionLabel(double relative_gt, double width, int k);

}  // namespace dels
