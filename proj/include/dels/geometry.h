#pragma once

#include <Eigen/Core>

namespace dels {

// Pixel centers sit at integer coordinates, x grows right and y grows down.
// Depth is the z coordinate of a point in the camera frame.

struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  Eigen::Matrix3d K() const;
  Eigen::Matrix3d InverseK() const;

  // Intrinsics of pyramid level `level`, where each level is a 2x2 box
  // downsample of the previous one. The half-pixel shift keeps integer pixel
  // centers aligned with the centers of the averaged blocks.
  Intrinsics AtLevel(int level) const;

  bool IsValid() const;
};

// World-to-camera transform: x_cam = rotation * x_world + translation.
struct CameraPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d Center() const;
  Eigen::Vector3d WorldToCamera(const Eigen::Vector3d& world) const;
  Eigen::Vector3d CameraToWorld(const Eigen::Vector3d& cam) const;
};

// Transform from the reference camera frame to a source camera frame.
struct RelativePose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RelativePose Between(const CameraPose& reference,
                              const CameraPose& source);

  // Orthonormal with determinant +1 within `tol`.
  bool IsValid(double tol = 1e-9) const;
};

enum class GeometryStatus {
  kOk,
  kBehindCamera,
  kDegenerateEpipolar,
  kNonPositiveDepth,
};

const char* ToString(GeometryStatus status);

template <typename T>
struct GeometryResult {
  T value{};
  GeometryStatus status = GeometryStatus::kOk;

  bool ok() const { return status == GeometryStatus::kOk; }
};

// Per reference pixel and source view: the projection of depth lambda is the
// dehomogenized point of lambda * m + e. p0 is the projection of the initial
// depth and d the unit direction along which depth decreases.
struct EpipolarFrame {
  Eigen::Vector2d p0 = Eigen::Vector2d::Zero();
  Eigen::Vector2d d = Eigen::Vector2d::UnitX();
  Eigen::Vector3d m = Eigen::Vector3d::Zero();
  Eigen::Vector3d e = Eigen::Vector3d::Zero();

  Eigen::Vector2d PointAt(double residual) const { return p0 + d * residual; }
};

GeometryResult<Eigen::Vector2d> ProjectToSource(const Eigen::Vector2d& pixel,
                                                double depth,
                                                const RelativePose& pose,
                                                const Intrinsics& intr_ref,
                                                const Intrinsics& intr_src);

GeometryResult<EpipolarFrame> MakeEpipolarFrame(const Eigen::Vector2d& pixel,
                                                const RelativePose& pose,
                                                const Intrinsics& intr_ref,
                                                const Intrinsics& intr_src,
                                                double init_depth);

// Projection of `depth` through the frame's homogeneous coefficients.
GeometryResult<Eigen::Vector2d> ProjectDepth(const EpipolarFrame& frame,
                                             double depth);

// Least-squares depth of the point p0 + d * residual. Exact for points on the
// ideal epipolar line.
GeometryResult<double> ResidualToDepth(const EpipolarFrame& frame,
                                       double residual);

// Signed distance from p0 to the projection of `depth`, positive along d.
GeometryResult<double> DepthToResidual(const EpipolarFrame& frame,
                                       double depth);

// Depth span of the partition [residual - width/2, residual + width/2].
// Returns +infinity when either endpoint has no positive depth.
double PartitionDepthRange(const EpipolarFrame& frame, double residual,
                           double width);

}  // namespace dels
