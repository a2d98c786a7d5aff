#include "dels/pipeline.h"

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "dels/common.h"
#include "dels/confidence.h"

namespace dels {

std::vector<int> SelectSources(const Dataset& dataset, int reference,
                               int count, const std::vector<int>& source_list) {
  const int n = static_cast<int>(dataset.views.size());
  DELS_CHECK(reference >= 0 && reference < n, InvalidConfig,
             "reference index " + std::to_string(reference) + " out of range");
  if (!source_list.empty()) {
    for (int s : source_list) {
      DELS_CHECK(s >= 0 && s < n && s != reference, InvalidConfig,
                 "invalid source index " + std::to_string(s));
    }
    return source_list;
  }
  std::vector<int> order;
  for (int i = 0; i < n; ++i) {
    if (i != reference) order.push_back(i);
  }
  const Eigen::Vector3d center = dataset.views[reference].pose.Center();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return (dataset.views[a].pose.Center() - center).norm() <
           (dataset.views[b].pose.Center() - center).norm();
  });
  order.resize(std::min<std::size_t>(order.size(), count));
  DELS_CHECK(!order.empty(), InvalidConfig, "dataset has no source views");
  return order;
}

ClassifierBundle MakeClassifier(const RunConfig& config, const Dataset& dataset,
                                int reference) {
  ClassifierBundle bundle;
  switch (config.classifier) {
    case ClassifierKind::kZncc:
      bundle.classifier = std::make_unique<ZnccClassifier>(config.patch_radius,
                                                           config.temperature);
      break;
    case ClassifierKind::kOracle:
      DELS_CHECK(dataset.has_ground_truth(), InvalidConfig,
                 "the oracle classifier needs ground-truth depth");
      bundle.classifier =
          std::make_unique<PerfectOracleClassifier>(dataset.gt_depth[reference]);
      break;
    case ClassifierKind::kLearned: {
      LearnedClassifierWeights weights = ReadWeights(config.weights);
      const auto manifest = ManifestPathFor(config.weights);
      if (std::filesystem::exists(manifest)) {
        ApplyWeightsManifest(manifest, &weights);
      }
      bundle.calibration = weights.calibration;
      bundle.classifier = std::make_unique<LearnedClassifier>(std::move(weights));
      break;
    }
  }
  return bundle;
}

std::vector<PreparedView> PrepareViews(const Dataset& dataset) {
  std::vector<PreparedView> prepared;
  prepared.reserve(dataset.views.size());
  for (const View& view : dataset.views) {
    prepared.push_back(PreparedView::From(view));
  }
  return prepared;
}

SourceMaps ToSourceMaps(const DepthEstimate& estimate,
                        const Raster& confidence) {
  return {estimate.depth, confidence, estimate.delta_depth,
          estimate.occluded};
}

ReferenceResult EstimateReference(const Dataset& dataset,
                                  const std::vector<PreparedView>& prepared,
                                  int reference, const RunConfig& config) {
  config.Check();
  ReferenceResult result;
  result.reference = reference;
  result.sources =
      SelectSources(dataset, reference, config.sources, config.source_list);
  const ClassifierBundle bundle = MakeClassifier(config, dataset, reference);
  std::vector<SourceMaps> maps;
  for (int s : result.sources) {
    DepthEstimate estimate = RunDels(
        prepared[reference], prepared[s], dataset.min_depth, dataset.max_depth,
        config.partition, *bundle.classifier, {config.threads});
    Raster confidence =
        EstimateConfidence(estimate, config.partition.k, bundle.calibration);
    maps.push_back(ToSourceMaps(estimate, confidence));
    result.estimates.push_back(std::move(estimate));
    result.confidences.push_back(std::move(confidence));
  }
  result.fused =
      FuseMaps(maps, config.fusion, config.fusion_mode, config.threads);
  return result;
}

std::vector<FusedView> MakeFusedViews(const Dataset& dataset,
                                      const std::vector<FusedMaps>& fused) {
  DELS_CHECK(fused.size() == dataset.views.size(), DimensionMismatch,
             "need fused maps for every view");
  std::vector<FusedView> views;
  for (std::size_t i = 0; i < fused.size(); ++i) {
    views.push_back({fused[i].depth, fused[i].confidence, dataset.colors[i],
                     dataset.views[i].intrinsics, dataset.views[i].pose});
  }
  return views;
}

}  // namespace dels
