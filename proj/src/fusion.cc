#include "dels/fusion.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dels/common.h"
#include "dels/parallel.h"

namespace dels {

void FusionParams::Check() const {
  DELS_CHECK(omega >= 0.0 && omega <= 1.0, InvalidConfig,
             "omega must lie in [0, 1]");
  DELS_CHECK(eta > 0.0 && std::isfinite(eta), InvalidConfig,
             "eta must be positive");
  DELS_CHECK(beta >= 0.0 && beta <= 1.0, InvalidConfig,
             "beta must lie in [0, 1]");
  DELS_CHECK(min_consistent >= 1, InvalidConfig, "min_consistent must be >= 1");
  DELS_CHECK(consist_rel > 0.0 && std::isfinite(consist_rel), InvalidConfig,
             "consist_rel must be positive");
  DELS_CHECK(cloud_margin >= 0, InvalidConfig, "cloud_margin must be >= 0");
}

const char* ToString(FusionMode mode) {
  switch (mode) {
    case FusionMode::kAverage:
      return "average";
    case FusionMode::kOuterMasked:
      return "outer-masked";
    case FusionMode::kHighestConfidence:
      return "highest-confidence";
    case FusionMode::kGeometryAware:
      return "geometry-aware";
  }
  return "unknown";
}

FusionMode ParseFusionMode(const std::string& name) {
  for (FusionMode mode :
       {FusionMode::kAverage, FusionMode::kOuterMasked,
        FusionMode::kHighestConfidence, FusionMode::kGeometryAware}) {
    if (name == ToString(mode)) return mode;
  }
  throw InvalidConfig("unknown fusion mode '" + name + "'");
}

std::optional<int> SelectMostConfident(
    std::span<const FusionCandidate> candidates) {
  std::optional<int> best;
  for (int n = 0; n < static_cast<int>(candidates.size()); ++n) {
    if (!candidates[n].valid) continue;
    if (!best || candidates[n].confidence > candidates[*best].confidence) {
      best = n;
    }
  }
  return best;
}

std::optional<int> SelectReferenceCandidate(
    std::span<const FusionCandidate> candidates, double omega) {
  std::optional<int> best;
  for (int n = 0; n < static_cast<int>(candidates.size()); ++n) {
    const FusionCandidate& c = candidates[n];
    if (!c.valid || !(c.confidence > omega)) continue;
    if (!best || c.delta_depth < candidates[*best].delta_depth) best = n;
  }
  return best ? best : SelectMostConfident(candidates);
}

std::optional<FusedValue> FusePixel(std::span<const FusionCandidate> candidates,
                                    const FusionParams& params,
                                    FusionMode mode) {
  std::optional<int> selected;
  if (mode == FusionMode::kGeometryAware) {
    selected = SelectReferenceCandidate(candidates, params.omega);
  } else if (mode == FusionMode::kHighestConfidence) {
    selected = SelectMostConfident(candidates);
  }
  FusedValue sum;
  int members = 0;
  for (int n = 0; n < static_cast<int>(candidates.size()); ++n) {
    const FusionCandidate& c = candidates[n];
    if (!c.valid) continue;
    if (selected) {
      const double ref = candidates[*selected].depth;
      if (!(std::abs(ref - c.depth) / ref < params.eta)) continue;
    }
    sum.depth += c.depth;
    sum.confidence += c.confidence;
    ++members;
  }
  if (members == 0) return std::nullopt;
  return FusedValue{sum.depth / members, sum.confidence / members};
}

FusedMaps FuseMaps(const std::vector<SourceMaps>& sources,
                   const FusionParams& params, FusionMode mode, int threads) {
  params.Check();
  DELS_CHECK(!sources.empty(), InvalidConfig, "no depth estimates to fuse");
  const int w = sources.front().depth.width();
  const int h = sources.front().depth.height();
  for (const SourceMaps& s : sources) {
    DELS_CHECK(s.depth.width() == w && s.depth.height() == h &&
                   s.confidence.width() == w && s.confidence.height() == h &&
                   s.delta_depth.width() == w && s.delta_depth.height() == h &&
                   s.occluded.width() == w && s.occluded.height() == h,
               DimensionMismatch, "source maps disagree in size");
  }
  FusedMaps fused{Raster(w, h, 1, std::numeric_limits<double>::quiet_NaN()),
                  Raster(w, h, 1, 0.0)};
  const bool keep_occluded = mode == FusionMode::kAverage;
  ParallelForRows(h, threads, [&](int y) {
    std::vector<FusionCandidate> candidates(sources.size());
    for (int x = 0; x < w; ++x) {
      for (std::size_t n = 0; n < sources.size(); ++n) {
        const SourceMaps& s = sources[n];
        const double depth = s.depth.at(x, y);
        candidates[n] = {depth, s.confidence.at(x, y), s.delta_depth.at(x, y),
                         std::isfinite(depth) && depth > 0.0 &&
                             (keep_occluded || !s.occluded.at(x, y))};
      }
      const auto value = FusePixel(candidates, params, mode);
      if (value) {
        fused.depth.at(x, y) = value->depth;
        fused.confidence.at(x, y) = value->confidence;
      }
    }
  });
  return fused;
}

namespace {

struct ViewGeometry {
  Eigen::Matrix3d k;
  Eigen::Matrix3d k_inv;
};

bool Usable(const FusedView& view, int x, int y, const FusionParams& params) {
  const int m = params.cloud_margin;
  if (x < m || y < m || x >= view.depth.width() - m ||
      y >= view.depth.height() - m) {
    return false;
  }
  const double depth = view.depth.at(x, y);
  return std::isfinite(depth) && depth > 0.0 &&
         view.confidence.at(x, y) >= params.beta;
}

std::uint8_t ToByte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

PointCloud BuildPointCloud(const std::vector<FusedView>& views,
                           const FusionParams& params) {
  params.Check();
  DELS_CHECK(views.size() >= 2, InvalidConfig,
             "point cloud needs at least two views");
  std::vector<ViewGeometry> geometry;
  std::vector<Grid<std::uint8_t>> used;
  for (const FusedView& v : views) {
    DELS_CHECK(v.confidence.width() == v.depth.width() &&
                   v.confidence.height() == v.depth.height() &&
                   v.color.width() == v.depth.width() &&
                   v.color.height() == v.depth.height(),
               DimensionMismatch, "fused view rasters disagree in size");
    geometry.push_back({v.intrinsics.K(), v.intrinsics.InverseK()});
    used.emplace_back(v.depth.width(), v.depth.height(), 0);
  }
  auto back_project = [&](int view, int x, int y) {
    const double depth = views[view].depth.at(x, y);
    return views[view].pose.CameraToWorld(depth * geometry[view].k_inv *
                                          Eigen::Vector3d(x, y, 1.0));
  };

  PointCloud cloud;
  std::vector<std::pair<int, Eigen::Vector2i>> agreeing;
  for (int i = 0; i < static_cast<int>(views.size()); ++i) {
    const FusedView& ref = views[i];
    for (int y = 0; y < ref.depth.height(); ++y) {
      for (int x = 0; x < ref.depth.width(); ++x) {
        if (used[i].at(x, y) || !Usable(ref, x, y, params)) continue;
        const Eigen::Vector3d point = back_project(i, x, y);
        agreeing.clear();
        bool free_space = false;
        for (int j = 0; j < static_cast<int>(views.size()); ++j) {
          if (j == i) continue;
          const FusedView& other = views[j];
          const Eigen::Vector3d cam = other.pose.WorldToCamera(point);
          if (!(cam.z() > 0.0)) continue;
          const Eigen::Vector3d h = geometry[j].k * cam;
          const long px = std::lround(h.x() / h.z());
          const long py = std::lround(h.y() / h.z());
          if (px < 0 || py < 0 || px >= other.depth.width() ||
              py >= other.depth.height()) {
            continue;
          }
          const int qx = static_cast<int>(px);
          const int qy = static_cast<int>(py);
          if (!Usable(other, qx, qy, params)) continue;
          const double seen = other.depth.at(qx, qy);
          const double rel = (cam.z() - seen) / seen;
          if (rel <= -params.consist_rel) {
            // The point would hide a surface this view observes.
            free_space = true;
            break;
          }
          if (rel < params.consist_rel) {
            agreeing.emplace_back(j, Eigen::Vector2i(qx, qy));
          }
        }
        if (free_space ||
            static_cast<int>(agreeing.size()) < params.min_consistent) {
          continue;
        }
        Eigen::Vector3d sum = point;
        double confidence = ref.confidence.at(x, y);
        for (const auto& [j, q] : agreeing) {
          sum += back_project(j, q.x(), q.y());
          confidence += views[j].confidence.at(q.x(), q.y());
          used[j].at(q.x(), q.y()) = 1;
        }
        used[i].at(x, y) = 1;
        const double count = static_cast<double>(agreeing.size() + 1);
        CloudPoint p;
        p.xyz = (sum / count).cast<float>();
        const int channels = ref.color.channels();
        for (int c = 0; c < 3; ++c) {
          p.rgb[c] = ToByte(ref.color.at(x, y, channels == 3 ? c : 0));
        }
        p.confidence = static_cast<float>(confidence / count);
        cloud.points.push_back(p);
      }
    }
  }
  return cloud;
}

}  // namespace dels
