#include "dels/search.h"

#include <cmath>
#include <limits>

#include "dels/common.h"
#include "dels/confidence.h"
#include "dels/parallel.h"

namespace dels {

PreparedView PreparedView::From(const View& view) {
  DELS_CHECK(view.image.channels() == 1, DimensionMismatch,
             "view image must be single-channel");
  DELS_CHECK(view.intrinsics.IsValid(), InvalidConfig, "invalid intrinsics");
  return {view.intrinsics, view.pose, BuildFeaturePyramid(view.image)};
}

FrameMap BuildFrameMap(int width, int height, const RelativePose& pose,
                       const Intrinsics& intr_ref, const Intrinsics& intr_src,
                       double init_depth, int threads) {
  FrameMap map{Grid<EpipolarFrame>(width, height),
               Grid<std::uint8_t>(width, height, 0)};
  ParallelForRows(height, threads, [&](int y) {
    for (int x = 0; x < width; ++x) {
      const auto frame = MakeEpipolarFrame(Eigen::Vector2d(x, y), pose,
                                           intr_ref, intr_src, init_depth);
      if (frame.ok()) {
        map.frames.at(x, y) = frame.value;
        map.valid.at(x, y) = 1;
      }
    }
  });
  return map;
}

SearchState::SearchState(int width, int height, double initial_width)
    : residual(width, height, 0.0),
      width(width, height, initial_width),
      partition_width(width, height, initial_width),
      active(width, height, 1),
      unestimable(width, height, 0),
      entropy_acc(width, height, 0.0),
      last_entropy(width, height, 0.0),
      iterations_done(width, height, 0),
      last_partition(width, height, 0) {}

SelectionUpdate ApplySelection(double residual, double width, int partition,
                               double eps, int k, bool dynamic_width) {
  SelectionUpdate update;
  update.residual = residual + RelativeResidual(partition, width, k);
  update.partition_width = width;
  update.width = dynamic_width ? UpdateWidth(width, partition, eps, k) : width;
  update.stop = !IsOuterPartition(partition, k) && width <= eps;
  return update;
}

namespace {

bool AnySampleInside(const EpipolarFrame& frame, double residual, double width,
                     int k, const Raster& source) {
  for (int l = 0; l < k; ++l) {
    const Eigen::Vector2d p =
        frame.PointAt(residual + RelativeResidual(l, width, k));
    if (InsideRaster(source.width(), source.height(), p.x(), p.y())) {
      return true;
    }
  }
  return false;
}

void MarkUnestimable(SearchState* state, int x, int y) {
  state->active.at(x, y) = 0;
  state->unestimable.at(x, y) = 1;
  state->last_partition.at(x, y) = 0;
}

}  // namespace

void DelsIteration(const IterationInputs& in, SearchState* state) {
  const int width = state->width_px();
  const int height = state->height_px();
  DELS_CHECK(in.frames.frames.width() == width &&
                 in.frames.frames.height() == height,
             DimensionMismatch, "frame map does not match search state");
  ParallelForRows(height, in.threads, [&](int y) {
    for (int x = 0; x < width; ++x) {
      if (!state->active.at(x, y)) continue;
      if (!in.frames.valid.at(x, y)) {
        MarkUnestimable(state, x, y);
        continue;
      }
      const EpipolarFrame& frame = in.frames.frames.at(x, y);
      const double residual = state->residual.at(x, y);
      const double delta = state->width.at(x, y);
      if (!AnySampleInside(frame, residual, delta, in.k,
                           in.context.src_features)) {
        MarkUnestimable(state, x, y);
        continue;
      }
      const PartitionQuery query{Eigen::Vector2i(x, y), frame, residual, delta,
                                 in.k};
      const ProbabilityVector p = in.classifier.Classify(in.context, query);
      const int selected = p.Argmax();
      const double entropy = p.Entropy();
      const SelectionUpdate update = ApplySelection(
          residual, delta, selected, in.eps, in.k, in.dynamic_width);
      state->residual.at(x, y) = update.residual;
      state->width.at(x, y) = update.width;
      state->partition_width.at(x, y) = update.partition_width;
      state->last_partition.at(x, y) = selected;
      state->entropy_acc.at(x, y) += entropy;
      state->last_entropy.at(x, y) = entropy;
      state->iterations_done.at(x, y) += 1;
      if (update.stop) state->active.at(x, y) = 0;
    }
  });
}

LevelResult RunLevel(int level, SearchState initial,
                     const ClassifierContext& context, const FrameMap& frames,
                     const PartitionConfig& config,
                     const PartitionClassifier& classifier, int threads) {
  config.Check();
  DELS_CHECK(level >= 0 && level < kPyramidLevels, InvalidConfig,
             "pyramid level out of range");
  LevelResult result{std::move(initial), Raster()};
  SearchState& state = result.state;
  const IterationInputs inputs{context,     frames,
                               classifier,  config.eps[level],
                               config.k,    config.dynamic_width,
                               threads};
  const int iters = config.iters[level];
  for (int i = 0; i < iters; ++i) {
    DelsIteration(inputs, &state);
  }

  // A pixel that stopped early repeats its last entropy for the iterations it
  // skipped. Pixels that never ran get the maximum entropy.
  const double max_entropy = std::log(static_cast<double>(config.k));
  result.mean_entropy = Raster(state.width_px(), state.height_px());
  for (int y = 0; y < state.height_px(); ++y) {
    for (int x = 0; x < state.width_px(); ++x) {
      const int done = state.iterations_done.at(x, y);
      result.mean_entropy.at(x, y) =
          done == 0 ? max_entropy
                    : (state.entropy_acc.at(x, y) +
                       (iters - done) * state.last_entropy.at(x, y)) /
                          iters;
    }
  }
  return result;
}

namespace {

// Level entry state carried over from the coarser level: residuals are
// upsampled and doubled; the width keeps its level-local value, floored at the
// new level's eps, so halving continues where the coarser level left off.
// Unestimable flags are not inherited: a coarse pixel near the border can have
// every sample outside the source while its finer children do not.
SearchState UpsampleState(const SearchState& coarse, int width, int height,
                          double eps, const PartitionConfig& config) {
  SearchState state(width, height, config.delta_init);
  const Grid<double> residual = NnUpsampleX2(coarse.residual, width, height);
  const Grid<double> delta = NnUpsampleX2(coarse.width, width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      state.residual.at(x, y) = 2.0 * residual.at(x, y);
      const double w =
          config.dynamic_width ? std::max(delta.at(x, y), eps) : config.delta_init;
      state.width.at(x, y) = w;
      state.partition_width.at(x, y) = w;
    }
  }
  return state;
}

}  // namespace

DepthEstimate RunDels(const PreparedView& reference,
                      const PreparedView& source, double min_depth,
                      double max_depth, const PartitionConfig& config,
                      const PartitionClassifier& classifier,
                      const DelsOptions& options) {
  config.Check();
  DELS_CHECK(min_depth > 0.0 && max_depth > min_depth &&
                 std::isfinite(max_depth),
             InvalidConfig, "depth range must satisfy 0 < min < max");
  const RelativePose pose = RelativePose::Between(reference.pose, source.pose);
  const double init_depth = 0.5 * (min_depth + max_depth);
  const int threads = std::max(options.threads, 1);

  DepthEstimate estimate;
  SearchState state;
  for (int level = kPyramidLevels - 1; level >= 0; --level) {
    const int w = reference.width(level);
    const int h = reference.height(level);
    FrameMap frames = BuildFrameMap(w, h, pose,
                                    reference.intrinsics.AtLevel(level),
                                    source.intrinsics.AtLevel(level),
                                    init_depth, threads);
    SearchState initial =
        level == kPyramidLevels - 1
            ? SearchState(w, h, std::max(config.delta_init, config.eps[level]))
            : UpsampleState(state, w, h, config.eps[level], config);
    const ClassifierContext context{level, reference.pyramid.features[level],
                                    source.pyramid.features[level]};
    LevelResult result = RunLevel(level, std::move(initial), context, frames,
                                  config, classifier, threads);
    estimate.level_entropy[level] = std::move(result.mean_entropy);
    state = std::move(result.state);
    if (level == 0) estimate.frames = std::move(frames);
  }

  const int w = reference.width(0);
  const int h = reference.height(0);
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  estimate.depth = Raster(w, h, 1, kNaN);
  estimate.delta_depth = Raster(w, h, 1, kInf);
  estimate.occluded = Grid<std::uint8_t>(w, h, 1);
  estimate.last_partition = state.last_partition;
  estimate.residual = state.residual;
  estimate.partition_width = state.partition_width;
  ParallelForRows(h, threads, [&](int y) {
    for (int x = 0; x < w; ++x) {
      if (state.unestimable.at(x, y) || !estimate.frames.valid.at(x, y)) {
        estimate.last_partition.at(x, y) = 0;
        continue;
      }
      const EpipolarFrame& frame = estimate.frames.frames.at(x, y);
      const auto depth = ResidualToDepth(frame, state.residual.at(x, y));
      // Outer selections can walk past the known depth range; such
      // estimates are reported invalid.
      if (depth.ok() && depth.value >= min_depth && depth.value <= max_depth) {
        estimate.depth.at(x, y) = depth.value;
      }
      estimate.delta_depth.at(x, y) = PartitionDepthRange(
          frame, state.residual.at(x, y), state.partition_width.at(x, y));
      estimate.occluded.at(x, y) =
          IsOuterPartition(state.last_partition.at(x, y), config.k) ? 1 : 0;
    }
  });
  estimate.confidence_raw = CombineLevels(estimate.level_entropy);
  return estimate;
}

}  // namespace dels
