#include "dels/partition.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "dels/common.h"

namespace dels {

void PartitionConfig::Check() const {
  DELS_CHECK(k >= 4 && k % 2 == 0, InvalidConfig,
             "partition count k must be even and >= 4");
  DELS_CHECK(delta_init > 0.0 && std::isfinite(delta_init), InvalidConfig,
             "delta_init must be positive");
  for (int j = 0; j < kPyramidLevels; ++j) {
    DELS_CHECK(eps[j] > 0.0 && std::isfinite(eps[j]), InvalidConfig,
               "eps_" + std::to_string(j) + " must be positive");
    DELS_CHECK(delta_init >= eps[j], InvalidConfig,
               "delta_init must be >= eps_" + std::to_string(j));
    DELS_CHECK(iters[j] >= 1, InvalidConfig,
               "iters_" + std::to_string(j) + " must be >= 1");
  }
}

PartitionBorders ComputePartitionBorders(double width, int k) {
  const double half_span = 0.5 * (k - 2) * width;
  return {-half_span, half_span};
}

double RelativeResidual(int partition, double width, int k) {
  return ComputePartitionBorders(width, k).left + (partition - 1) * width +
         0.5 * width;
}

double UpdateWidth(double width, int partition, double eps, int k) {
  if (IsOuterPartition(partition, k)) {
    return width;
  }
  return std::max(0.5 * width, eps);
}

int GroundTruthPartitionLabel(double relative_gt, double width, int k) {
  const double left = ComputePartitionBorders(width, k).left;
  int label = 0;
  for (int g = 0; g <= k - 2; ++g) {
    if (relative_gt > left + g * width) {
      ++label;
    }
  }
  return label;
}

}  // namespace dels
