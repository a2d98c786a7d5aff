#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "dels/config.h"
#include "dels/fusion.h"
#include "dels/harness/scene.h"
#include "dels/matcher.h"
#include "dels/search.h"
#include "dels/weights.h"

namespace dels {

// The `count` views whose camera centers are closest to the reference's, or
// `source_list` verbatim when it is not empty. Ties go to the lower index.
// Throws InvalidConfig on out-of-range indices or a reference in the list.
std::vector<int> SelectSources(const Dataset& dataset, int reference,
                               int count, const std::vector<int>& source_list);

struct ClassifierBundle {
  std::unique_ptr<PartitionClassifier> classifier;
  std::optional<ConfidenceCalibration> calibration;
};

// The oracle classifier reads the reference's ground truth; the learned one
// loads the weights file and, if present, its JSON manifest.
ClassifierBundle MakeClassifier(const RunConfig& config, const Dataset& dataset,
                                int reference);

std::vector<PreparedView> PrepareViews(const Dataset& dataset);

struct ReferenceResult {
  int reference = 0;
  std::vector<int> sources;
  std::vector<DepthEstimate> estimates;
  std::vector<Raster> confidences;
  FusedMaps fused;
};

ReferenceResult EstimateReference(const Dataset& dataset,
                                  const std::vector<PreparedView>& prepared,
                                  int reference, const RunConfig& config);

SourceMaps ToSourceMaps(const DepthEstimate& estimate,
                        const Raster& confidence);

// Fused maps of every view paired with its color and camera.
std::vector<FusedView> MakeFusedViews(const Dataset& dataset,
                                      const std::vector<FusedMaps>& fused);

}  // namespace dels
