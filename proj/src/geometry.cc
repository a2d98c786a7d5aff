#include "dels/geometry.h"

#include <cmath>
#include <limits>

#include <Eigen/Geometry>
#include <Eigen/LU>

namespace dels {

Eigen::Matrix3d Intrinsics::K() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Eigen::Matrix3d Intrinsics::InverseK() const {
  Eigen::Matrix3d k_inv;
  k_inv << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
  return k_inv;
}

Intrinsics Intrinsics::AtLevel(int level) const {
  const double scale = std::ldexp(1.0, -level);
  return {fx * scale, fy * scale, (cx + 0.5) * scale - 0.5,
          (cy + 0.5) * scale - 0.5};
}

bool Intrinsics::IsValid() const {
  return fx > 0.0 && fy > 0.0 && std::isfinite(fx) && std::isfinite(fy) &&
         std::isfinite(cx) && std::isfinite(cy);
}

Eigen::Vector3d CameraPose::Center() const {
  return -rotation.transpose() * translation;
}

Eigen::Vector3d CameraPose::WorldToCamera(const Eigen::Vector3d& world) const {
  return rotation * world + translation;
}

Eigen::Vector3d CameraPose::CameraToWorld(const Eigen::Vector3d& cam) const {
  return rotation.transpose() * (cam - translation);
}

RelativePose RelativePose::Between(const CameraPose& reference,
                                   const CameraPose& source) {
  RelativePose rel;
  rel.rotation = source.rotation * reference.rotation.transpose();
  rel.translation = source.translation - rel.rotation * reference.translation;
  return rel;
}

bool RelativePose::IsValid(double tol) const {
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  return (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(rotation.determinant() - 1.0) <= tol &&
         translation.allFinite();
}

const char* ToString(GeometryStatus status) {
  switch (status) {
    case GeometryStatus::kOk:
      return "Ok";
    case GeometryStatus::kBehindCamera:
      return "BehindCamera";
    case GeometryStatus::kDegenerateEpipolar:
      return "DegenerateEpipolar";
    case GeometryStatus::kNonPositiveDepth:
      return "NonPositiveDepth";
  }
  return "Unknown";
}

namespace {

struct HomogeneousTerms {
  Eigen::Vector3d m;
  Eigen::Vector3d e;
};

HomogeneousTerms ComputeTerms(const Eigen::Vector2d& pixel,
                              const RelativePose& pose,
                              const Intrinsics& intr_ref,
                              const Intrinsics& intr_src) {
  const Eigen::Vector3d ray = intr_ref.InverseK() * pixel.homogeneous();
  const Eigen::Matrix3d k_src = intr_src.K();
  return {k_src * (pose.rotation * ray), k_src * pose.translation};
}

GeometryResult<Eigen::Vector2d> Dehomogenize(const Eigen::Vector3d& m,
                                             const Eigen::Vector3d& e,
                                             double depth) {
  if (!(depth > 0.0)) {
    return {{}, GeometryStatus::kNonPositiveDepth};
  }
  const Eigen::Vector3d h = depth * m + e;
  if (!(h.z() > 0.0)) {
    return {{}, GeometryStatus::kBehindCamera};
  }
  return {h.head<2>() / h.z(), GeometryStatus::kOk};
}

}  // namespace

GeometryResult<Eigen::Vector2d> ProjectToSource(const Eigen::Vector2d& pixel,
                                                double depth,
                                                const RelativePose& pose,
                                                const Intrinsics& intr_ref,
                                                const Intrinsics& intr_src) {
  const HomogeneousTerms terms = ComputeTerms(pixel, pose, intr_ref, intr_src);
  return Dehomogenize(terms.m, terms.e, depth);
}

GeometryResult<EpipolarFrame> MakeEpipolarFrame(const Eigen::Vector2d& pixel,
                                                const RelativePose& pose,
                                                const Intrinsics& intr_ref,
                                                const Intrinsics& intr_src,
                                                double init_depth) {
  const HomogeneousTerms terms = ComputeTerms(pixel, pose, intr_ref, intr_src);
  const auto anchor = Dehomogenize(terms.m, terms.e, init_depth);
  if (!anchor.ok()) {
    return {{}, anchor.status};
  }

  // dp/dlambda = (m_xy * e_z - m_z * e_xy) / h_z^2, so the direction of
  // decreasing depth is m_z * e_xy - e_z * m_xy for every valid depth. This
  // is the segment from the vanishing point m/m_z toward the epipole e/e_z,
  // written without dividing by either z component.
  const Eigen::Vector2d descent =
      terms.m.z() * terms.e.head<2>() - terms.e.z() * terms.m.head<2>();
  const double norm = descent.norm();
  if (!(norm > 1e-10 * terms.m.norm() * terms.e.norm())) {
    return {{}, GeometryStatus::kDegenerateEpipolar};
  }

  EpipolarFrame frame;
  frame.p0 = anchor.value;
  frame.d = descent / norm;
  frame.m = terms.m;
  frame.e = terms.e;
  return {frame, GeometryStatus::kOk};
}

GeometryResult<Eigen::Vector2d> ProjectDepth(const EpipolarFrame& frame,
                                             double depth) {
  return Dehomogenize(frame.m, frame.e, depth);
}

GeometryResult<double> ResidualToDepth(const EpipolarFrame& frame,
                                       double residual) {
  const Eigen::Vector2d p = frame.PointAt(residual);
  // p * (lambda * m_z + e_z) = lambda * m_xy + e_xy, two equations in lambda.
  const Eigen::Vector2d a = p * frame.m.z() - frame.m.head<2>();
  const Eigen::Vector2d b = frame.e.head<2>() - p * frame.e.z();
  const double aa = a.squaredNorm();
  if (!(aa > 0.0)) {
    return {0.0, GeometryStatus::kNonPositiveDepth};
  }
  const double depth = a.dot(b) / aa;
  if (!(depth > 0.0) || !std::isfinite(depth) ||
      !(depth * frame.m.z() + frame.e.z() > 0.0)) {
    return {0.0, GeometryStatus::kNonPositiveDepth};
  }
  return {depth, GeometryStatus::kOk};
}

GeometryResult<double> DepthToResidual(const EpipolarFrame& frame,
                                       double depth) {
  const auto projected = ProjectDepth(frame, depth);
  if (!projected.ok()) {
    return {0.0, projected.status};
  }
  const Eigen::Vector2d diff = projected.value - frame.p0;
  const double along = diff.dot(frame.d);
  const double magnitude = diff.norm();
  return {along < 0.0 ? -magnitude : magnitude, GeometryStatus::kOk};
}

double PartitionDepthRange(const EpipolarFrame& frame, double residual,
                           double width) {
  const auto far_end = ResidualToDepth(frame, residual - 0.5 * width);
  const auto near_end = ResidualToDepth(frame, residual + 0.5 * width);
  if (!far_end.ok() || !near_end.ok()) {
    return std::numeric_limits<double>::infinity();
  }
  return std::abs(far_end.value - near_end.value);
}

}  // namespace dels
