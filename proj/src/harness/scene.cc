#include "dels/harness/scene.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>

#include <Eigen/Geometry>

#include "dels/common.h"
#include "dels/image_io.h"
#include "dels/parallel.h"

namespace dels {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double UnitFromBits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double LatticeValue(std::uint64_t seed, long ix, long iy, long iz, int octave) {
  std::uint64_t h = SplitMix64(seed);
  h = SplitMix64(h ^ static_cast<std::uint64_t>(ix));
  h = SplitMix64(h ^ static_cast<std::uint64_t>(iy));
  h = SplitMix64(h ^ static_cast<std::uint64_t>(iz));
  h = SplitMix64(h ^ static_cast<std::uint64_t>(octave));
  return UnitFromBits(h);
}

double Smooth(double t) { return t * t * (3.0 - 2.0 * t); }

double ValueNoiseOctave(const Eigen::Vector3d& p, std::uint64_t seed,
                        int octave) {
  const Eigen::Vector3d f(std::floor(p.x()), std::floor(p.y()),
                          std::floor(p.z()));
  const long ix = static_cast<long>(f.x());
  const long iy = static_cast<long>(f.y());
  const long iz = static_cast<long>(f.z());
  const double tx = Smooth(p.x() - f.x());
  const double ty = Smooth(p.y() - f.y());
  const double tz = Smooth(p.z() - f.z());
  double value = 0.0;
  for (int c = 0; c < 8; ++c) {
    const int dx = c & 1;
    const int dy = (c >> 1) & 1;
    const int dz = (c >> 2) & 1;
    const double w = (dx ? tx : 1.0 - tx) * (dy ? ty : 1.0 - ty) *
                     (dz ? tz : 1.0 - tz);
    value += w * LatticeValue(seed, ix + dx, iy + dy, iz + dz, octave);
  }
  return value;
}

class Texture {
 public:
  explicit Texture(const SceneSpec& spec)
      : kind_(spec.texture), scale_(spec.texture_scale), seed_(spec.seed) {}

  double operator()(const Eigen::Vector3d& p) const {
    if (kind_ == TextureKind::kChecker) {
      const long parity = static_cast<long>(std::floor(p.x() / scale_)) +
                          static_cast<long>(std::floor(p.y() / scale_)) +
                          static_cast<long>(std::floor(p.z() / scale_));
      return (parity & 1) ? 0.8 : 0.2;
    }
    constexpr int kOctaves = 4;
    double sum = 0.0;
    double norm = 0.0;
    double amplitude = 1.0;
    double frequency = 1.0 / scale_;
    for (int o = 0; o < kOctaves; ++o) {
      sum += amplitude * ValueNoiseOctave(p * frequency, seed_, o);
      norm += amplitude;
      amplitude *= 0.6;
      frequency *= 2.0;
    }
    // Stretch the noise (which clusters around 0.5) to a usable contrast.
    return std::clamp(0.5 + 1.6 * (sum / norm - 0.5), 0.02, 0.98);
  }

 private:
  TextureKind kind_;
  double scale_;
  std::uint64_t seed_;
};

struct Plane {
  Eigen::Vector3d normal;
  double offset;

  double Intersect(const Eigen::Vector3d& origin,
                   const Eigen::Vector3d& dir) const {
    const double denom = normal.dot(dir);
    if (std::abs(denom) < 1e-12) return kInf;
    const double t = -(normal.dot(origin) + offset) / denom;
    return t > 0.0 ? t : kInf;
  }
};

struct Sphere {
  Eigen::Vector3d center;
  double radius;

  double Intersect(const Eigen::Vector3d& origin,
                   const Eigen::Vector3d& dir) const {
    const Eigen::Vector3d oc = origin - center;
    const double a = dir.squaredNorm();
    const double b = oc.dot(dir);
    const double c = oc.squaredNorm() - radius * radius;
    const double disc = b * b - a * c;
    if (disc < 0.0) return kInf;
    const double root = std::sqrt(disc);
    const double near = (-b - root) / a;
    if (near > 0.0) return near;
    const double far = (-b + root) / a;
    return far > 0.0 ? far : kInf;
  }
};

struct Box {
  Eigen::Vector3d lo;
  Eigen::Vector3d hi;

  double Intersect(const Eigen::Vector3d& origin,
                   const Eigen::Vector3d& dir) const {
    double t_near = -kInf;
    double t_far = kInf;
    for (int a = 0; a < 3; ++a) {
      if (std::abs(dir[a]) < 1e-15) {
        if (origin[a] < lo[a] || origin[a] > hi[a]) return kInf;
        continue;
      }
      double t0 = (lo[a] - origin[a]) / dir[a];
      double t1 = (hi[a] - origin[a]) / dir[a];
      if (t0 > t1) std::swap(t0, t1);
      t_near = std::max(t_near, t0);
      t_far = std::min(t_far, t1);
    }
    if (t_near > t_far || t_far <= 0.0) return kInf;
    return t_near > 0.0 ? t_near : t_far;
  }
};

class Scene {
 public:
  explicit Scene(const SceneSpec& spec) : texture_(spec) {
    const Eigen::Vector3d& c = spec.look_at;
    if (spec.kind == SceneKind::kPlane) {
      const PlaneEquation eq = ScenePlane(spec);
      planes_.push_back({eq.normal, eq.offset});
      return;
    }
    const double backdrop_z = c.z() + 0.3 * spec.distance;
    planes_.push_back({Eigen::Vector3d(0, 0, -1), backdrop_z});
    if (spec.kind == SceneKind::kSphere) {
      spheres_.push_back({c, 0.2 * spec.distance});
      return;
    }
    std::uint64_t state = SplitMix64(spec.seed ^ 0xb0c5ull);
    auto uniform = [&](double lo, double hi) {
      state = SplitMix64(state);
      return lo + (hi - lo) * UnitFromBits(state);
    };
    const double s = spec.distance;
    for (int i = 0; i < 4; ++i) {
      const Eigen::Vector3d center(c.x() + uniform(-0.2, 0.2) * s,
                                   c.y() + uniform(-0.2, 0.2) * s,
                                   c.z() + uniform(-0.15, 0.1) * s);
      const Eigen::Vector3d half(uniform(0.04, 0.09) * s,
                                 uniform(0.04, 0.09) * s,
                                 uniform(0.04, 0.09) * s);
      boxes_.push_back({center - half, center + half});
    }
  }

  double Intersect(const Eigen::Vector3d& origin,
                   const Eigen::Vector3d& dir) const {
    double t = kInf;
    for (const Plane& p : planes_) t = std::min(t, p.Intersect(origin, dir));
    for (const Sphere& s : spheres_) t = std::min(t, s.Intersect(origin, dir));
    for (const Box& b : boxes_) t = std::min(t, b.Intersect(origin, dir));
    return t;
  }

  double Shade(const Eigen::Vector3d& point) const { return texture_(point); }

 private:
  Texture texture_;
  std::vector<Plane> planes_;
  std::vector<Sphere> spheres_;
  std::vector<Box> boxes_;
};

CameraPose LookAt(const Eigen::Vector3d& center, const Eigen::Vector3d& target) {
  const Eigen::Vector3d z = (target - center).normalized();
  const Eigen::Vector3d x = Eigen::Vector3d::UnitY().cross(z).normalized();
  const Eigen::Vector3d y = z.cross(x);
  CameraPose pose;
  pose.rotation.row(0) = x.transpose();
  pose.rotation.row(1) = y.transpose();
  pose.rotation.row(2) = z.transpose();
  pose.translation = -pose.rotation * center;
  return pose;
}

std::string IndexName(std::size_t i, const char* extension) {
  char name[32];
  std::snprintf(name, sizeof(name), "%03zu%s", i, extension);
  return name;
}

}  // namespace

const char* ToString(SceneKind kind) {
  switch (kind) {
    case SceneKind::kPlane:
      return "plane";
    case SceneKind::kSphere:
      return "sphere";
    case SceneKind::kBoxes:
      return "boxes";
  }
  return "unknown";
}

const char* ToString(TextureKind kind) {
  return kind == TextureKind::kChecker ? "checker" : "value-noise";
}

SceneKind ParseSceneKind(const std::string& name) {
  for (SceneKind k : {SceneKind::kPlane, SceneKind::kSphere, SceneKind::kBoxes}) {
    if (name == ToString(k)) return k;
  }
  throw InvalidConfig("unknown scene kind '" + name + "'");
}

TextureKind ParseTextureKind(const std::string& name) {
  for (TextureKind k : {TextureKind::kChecker, TextureKind::kValueNoise}) {
    if (name == ToString(k)) return k;
  }
  throw InvalidConfig("unknown texture '" + name + "'");
}

void SceneSpec::Check() const {
  DELS_CHECK(width >= 32 && height >= 32, InvalidConfig,
             "image size must be at least 32");
  DELS_CHECK(views >= 2, InvalidConfig, "a scene needs at least two views");
  DELS_CHECK(texture_scale > 0.0, InvalidConfig,
             "texture scale must be positive");
  DELS_CHECK(ring_radius > 0.0 && distance > 0.0 && focal_factor > 0.0,
             InvalidConfig, "camera ring parameters must be positive");
  DELS_CHECK(arc_degrees > 0.0 && arc_degrees <= 360.0, InvalidConfig,
             "arc must lie in (0, 360] degrees");
  DELS_CHECK(supersample >= 1, InvalidConfig, "supersample must be >= 1");
  const bool auto_range = min_depth <= 0.0 && max_depth <= 0.0;
  DELS_CHECK(auto_range || (min_depth > 0.0 && max_depth > min_depth),
             InvalidConfig, "depth range must satisfy 0 < min < max");
}

PlaneEquation ScenePlane(const SceneSpec& spec) {
  const Eigen::Vector3d normal = Eigen::Vector3d(0.15, -0.1, -1.0).normalized();
  return {normal, -normal.dot(spec.look_at)};
}

Dataset RenderScene(const SceneSpec& spec, int threads) {
  spec.Check();
  const Scene scene(spec);
  Dataset dataset;
  const bool full_ring = spec.arc_degrees >= 360.0;
  const double arc = spec.arc_degrees * std::numbers::pi / 180.0;
  double near = kInf;
  double far = 0.0;
  for (int v = 0; v < spec.views; ++v) {
    const double angle =
        full_ring ? arc * v / spec.views
                  : -0.5 * arc + arc * v / (spec.views - 1);
    const Eigen::Vector3d center =
        spec.look_at + Eigen::Vector3d(spec.ring_radius * std::cos(angle),
                                       spec.ring_radius * std::sin(angle),
                                       -spec.distance);
    View view;
    view.pose = LookAt(center, spec.look_at);
    const double focal = spec.focal_factor * spec.width;
    view.intrinsics = {focal, focal, 0.5 * (spec.width - 1),
                       0.5 * (spec.height - 1)};
    const Eigen::Matrix3d k_inv = view.intrinsics.InverseK();
    const Eigen::Matrix3d to_world = view.pose.rotation.transpose();

    view.image = Raster(spec.width, spec.height);
    Raster depth(spec.width, spec.height, 1,
                 std::numeric_limits<double>::quiet_NaN());
    const int ss = spec.supersample;
    ParallelForRows(spec.height, threads, [&](int y) {
      for (int x = 0; x < spec.width; ++x) {
        const Eigen::Vector3d ray = k_inv * Eigen::Vector3d(x, y, 1.0);
        const double t = scene.Intersect(center, to_world * ray);
        if (std::isfinite(t)) depth.at(x, y) = t;
        double sum = 0.0;
        for (int sy = 0; sy < ss; ++sy) {
          for (int sx = 0; sx < ss; ++sx) {
            const Eigen::Vector3d sub =
                k_inv * Eigen::Vector3d(x - 0.5 + (sx + 0.5) / ss,
                                        y - 0.5 + (sy + 0.5) / ss, 1.0);
            const Eigen::Vector3d dir = to_world * sub;
            const double ts = scene.Intersect(center, dir);
            if (std::isfinite(ts)) sum += scene.Shade(center + ts * dir);
          }
        }
        view.image.at(x, y) = sum / (ss * ss);
      }
    });
    for (double d : depth.data()) {
      if (std::isfinite(d)) {
        near = std::min(near, d);
        far = std::max(far, d);
      }
    }
    dataset.colors.push_back(view.image);
    dataset.gt_depth.push_back(std::move(depth));
    dataset.views.push_back(std::move(view));
  }
  if (spec.min_depth > 0.0) {
    dataset.min_depth = spec.min_depth;
    dataset.max_depth = spec.max_depth;
  } else {
    DELS_CHECK(far > 0.0, InvalidConfig, "scene is not visible from any view");
    dataset.min_depth = 0.9 * near;
    dataset.max_depth = 1.1 * far;
  }
  return dataset;
}

void WriteDataset(const std::filesystem::path& root, const Dataset& dataset) {
  namespace fs = std::filesystem;
  std::error_code ec;
  for (const char* sub : {"images", "cams", "depth"}) {
    fs::create_directories(root / sub, ec);
    if (ec) throw IoError("cannot create " + (root / sub).string());
  }
  for (std::size_t i = 0; i < dataset.views.size(); ++i) {
    WritePngGray(root / "images" / IndexName(i, ".png"),
                 dataset.views[i].image);
    WriteCameraFile(root / "cams" / IndexName(i, ".txt"),
                    {dataset.views[i].intrinsics, dataset.views[i].pose});
    if (dataset.has_ground_truth()) {
      WritePfm(root / "depth" / IndexName(i, ".pfm"), dataset.gt_depth[i]);
    }
  }
  WriteDepthRange(root / "range.txt", dataset.min_depth, dataset.max_depth);
}

Dataset LoadDataset(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root / "images") || !fs::is_directory(root / "cams")) {
    throw IoError("not a dataset directory: " + root.string());
  }
  Dataset dataset;
  bool all_depth = true;
  for (std::size_t i = 0;; ++i) {
    const fs::path image = root / "images" / IndexName(i, ".png");
    if (!fs::exists(image)) break;
    View view;
    view.image = ReadPngGray(image);
    const CameraFile cam = ReadCameraFile(root / "cams" / IndexName(i, ".txt"));
    view.intrinsics = cam.intrinsics;
    view.pose = cam.pose;
    dataset.colors.push_back(ReadPngColor(image));
    const fs::path depth = root / "depth" / IndexName(i, ".pfm");
    if (all_depth && fs::exists(depth)) {
      dataset.gt_depth.push_back(ReadPfm(depth));
    } else {
      all_depth = false;
    }
    dataset.views.push_back(std::move(view));
  }
  if (dataset.views.empty()) {
    throw IoError("no images in " + (root / "images").string());
  }
  if (!all_depth) dataset.gt_depth.clear();
  const auto [lo, hi] = ReadDepthRange(root / "range.txt");
  dataset.min_depth = lo;
  dataset.max_depth = hi;
  return dataset;
}

void GenerateScene(const SceneSpec& spec, const std::filesystem::path& root,
                   int threads) {
  WriteDataset(root, RenderScene(spec, threads));
}

Grid<std::uint8_t> VisibilityMask(const Raster& ref_depth,
                                  const Intrinsics& ref_intrinsics,
                                  const CameraPose& ref_pose,
                                  const Raster& src_depth,
                                  const Intrinsics& src_intrinsics,
                                  const CameraPose& src_pose, double rel_tol) {
  Grid<std::uint8_t> mask(ref_depth.width(), ref_depth.height(), 0);
  const Eigen::Matrix3d k_inv = ref_intrinsics.InverseK();
  const Eigen::Matrix3d k_src = src_intrinsics.K();
  for (int y = 0; y < ref_depth.height(); ++y) {
    for (int x = 0; x < ref_depth.width(); ++x) {
      const double depth = ref_depth.at(x, y);
      if (!std::isfinite(depth) || depth <= 0.0) continue;
      const Eigen::Vector3d world =
          ref_pose.CameraToWorld(depth * k_inv * Eigen::Vector3d(x, y, 1.0));
      const Eigen::Vector3d cam = src_pose.WorldToCamera(world);
      if (cam.z() <= 0.0) continue;
      const Eigen::Vector3d h = k_src * cam;
      const double u = h.x() / h.z();
      const double v = h.y() / h.z();
      if (!InsideRaster(src_depth.width(), src_depth.height(), u, v)) continue;
      const double seen = src_depth.at(static_cast<int>(std::lround(u)),
                                       static_cast<int>(std::lround(v)));
      if (std::isfinite(seen) && std::abs(seen - cam.z()) < rel_tol * cam.z()) {
        mask.at(x, y) = 1;
      }
    }
  }
  return mask;
}

}  // namespace dels
