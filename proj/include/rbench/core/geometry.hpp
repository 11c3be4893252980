#pragma once

// Rigid-body primitives in the single table frame. All lengths are centimeters.

#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "rbench/core/error.hpp"

namespace rbench {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kRotationTolerance = 1e-6;
inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

/// Unit quaternion in (x, y, z, w) order, the on-disk rotation encoding.
struct QuaternionXyzw {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double w = 1.0;
};

/// Proper rotation matrix. Only constructible through validation or from
/// operations that preserve SO(3) (composition, inversion, axis-angle).
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  static Rotation identity() { return Rotation(); }

  /// Accepts m iff it is finite, orthonormal and has det +1, all within 1e-6.
  static Rotation from_matrix(const Mat3& m) {
    if (!m.allFinite()) throw Error(ErrorCode::NonFinite, "rotation matrix has non-finite entries");
    const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (ortho > kRotationTolerance) {
      throw Error(ErrorCode::NotOrthonormal,
                  "max |R^T R - I| = " + std::to_string(ortho) + " exceeds 1e-6");
    }
    const double det = m.determinant();
    if (std::abs(det - 1.0) > kRotationTolerance) {
      throw Error(ErrorCode::ImproperRotation, "det(R) = " + std::to_string(det));
    }
    return Rotation(m);
  }

  /// Normalizes q if its norm is within 1e-6 of 1, rejects it otherwise.
  static Rotation from_quaternion(const QuaternionXyzw& q) {
    if (!std::isfinite(q.x) || !std::isfinite(q.y) || !std::isfinite(q.z) || !std::isfinite(q.w)) {
      throw Error(ErrorCode::NonFinite, "quaternion has non-finite components");
    }
    Eigen::Quaterniond eq(q.w, q.x, q.y, q.z);
    const double n = eq.norm();
    if (std::abs(n - 1.0) > kRotationTolerance) {
      throw Error(ErrorCode::NotUnitQuaternion, "quaternion norm " + std::to_string(n));
    }
    // keep the caller's components when they are already unit to working
    // precision, so that parse -> serialize reproduces them bit for bit
    QuaternionXyzw kept = q;
    if (std::abs(n - 1.0) > 1e-12) kept = {q.x / n, q.y / n, q.z / n, q.w / n};
    if (kept.w < 0.0) kept = {-kept.x, -kept.y, -kept.z, -kept.w};
    eq.normalize();
    Rotation r(eq.toRotationMatrix());
    r.q_ = kept;
    return r;
  }

  static Rotation about_axis(const Vec3& axis, double angle_rad) {
    return Rotation(Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix());
  }

  static Rotation about_z(double angle_rad) { return about_axis(Vec3::UnitZ(), angle_rad); }

  const Mat3& matrix() const { return m_; }

  /// Canonical sign: w >= 0.
  QuaternionXyzw to_quaternion() const {
    if (q_) return *q_;
    Eigen::Quaterniond q(m_);
    q.normalize();
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();
    return {q.x(), q.y(), q.z(), q.w()};
  }

  Rotation inverse() const { return Rotation(m_.transpose()); }

  Vec3 operator*(const Vec3& p) const { return m_ * p; }
  Rotation operator*(const Rotation& other) const { return Rotation(m_ * other.m_); }

  friend bool operator==(const Rotation& a, const Rotation& b) { return a.m_ == b.m_; }

 private:
  explicit Rotation(const Mat3& m) : m_(m) {}
  Mat3 m_;
  std::optional<QuaternionXyzw> q_;  // set when built from a quaternion
};

/// Free-function form of Rotation::from_matrix.
inline Rotation validate_rotation(const Mat3& m) { return Rotation::from_matrix(m); }

/// Rigid transform p -> R p + T.
struct Pose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }
  static Pose from_translation(const Vec3& t) { return {Rotation::identity(), t}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  Pose inverse() const {
    const Rotation inv = rotation.inverse();
    return {inv, -(inv * translation)};
  }

  /// (this ∘ other)(p) = this(other(p)).
  Pose operator*(const Pose& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }

  friend bool operator==(const Pose& a, const Pose& b) {
    return a.rotation == b.rotation && a.translation == b.translation;
  }
};

inline Vec3 apply_pose(const Pose& pose, const Vec3& p) { return pose.apply(p); }

/// Object-model bounding box extents. The model frame's origin sits at the
/// center of the box's bottom face: x in [-L/2, L/2], y in [-W/2, W/2], z in [0, H].
struct BoundingBox {
  double length = 1.0;
  double width = 1.0;
  double height = 1.0;

  static BoundingBox make(double l, double w, double h) {
    if (!(std::isfinite(l) && std::isfinite(w) && std::isfinite(h))) {
      throw Error(ErrorCode::NonFinite, "bounding box dimensions must be finite");
    }
    if (!(l > 0.0 && w > 0.0 && h > 0.0)) {
      throw Error(ErrorCode::InvalidBoundingBox, "bounding box dimensions must be positive");
    }
    return {l, w, h};
  }

  /// Edge length of the evaluation cube, (L + W + H) / 3.
  double mean_extent() const { return (length + width + height) / 3.0; }

  Vec3 half_extents() const { return {length / 2.0, width / 2.0, height / 2.0}; }
  Vec3 local_center() const { return {0.0, 0.0, height / 2.0}; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// The 8 vertices of the axis-aligned evaluation cube of edge (L+W+H)/3
/// centered at the model origin. Order is lexicographic over the sign triple
/// (sx, sy, sz) with '-' before '+': (---), (--+), (-+-), ..., (+++).
inline std::array<Vec3, 8> cube_vertices(const BoundingBox& bbox) {
  const double h = bbox.mean_extent() / 2.0;
  std::array<Vec3, 8> out;
  int i = 0;
  for (double sx : {-h, h}) {
    for (double sy : {-h, h}) {
      for (double sz : {-h, h}) out[i++] = Vec3(sx, sy, sz);
    }
  }
  return out;
}

}  // namespace rbench
