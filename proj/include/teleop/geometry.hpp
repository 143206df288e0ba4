#pragma once

#include <array>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "teleop/errors.hpp"

namespace teleop {

using Vec3 = Eigen::Vector3d;

/// Maximum |norm - 1| accepted when building a quaternion from raw components.
inline constexpr double kUnitNormTolerance = 1e-6;

/**
 * Unit quaternion stored in canonical sign (w >= 0; when w == 0 the first
 * nonzero vector component is positive). q and -q build the same object, so
 * every operation on this type is insensitive to the double cover.
 */
class UnitQuaternion {
 public:
  /// Identity rotation.
  UnitQuaternion() = default;

  /// Validates that the raw components have unit norm within
  /// kUnitNormTolerance, then renormalizes. Throws InvalidInput otherwise.
  static UnitQuaternion from_wxyz(double w, double x, double y, double z);
  static UnitQuaternion from_wxyz(const std::array<double, 4>& wxyz);

  /// Normalizes any finite, non-zero 4-vector.
  static UnitQuaternion normalized(double w, double x, double y, double z);
  static UnitQuaternion from_eigen(const Eigen::Quaterniond& q);
  static UnitQuaternion from_axis_angle(const Vec3& axis, double angle);
  static UnitQuaternion from_rotation_matrix(const Eigen::Matrix3d& r);

  double w() const noexcept { return c_[0]; }
  double x() const noexcept { return c_[1]; }
  double y() const noexcept { return c_[2]; }
  double z() const noexcept { return c_[3]; }

  /// Components in (w, x, y, z) order.
  const Eigen::Vector4d& coeffs() const noexcept { return c_; }
  std::array<double, 4> wxyz() const noexcept { return {c_[0], c_[1], c_[2], c_[3]}; }

  Eigen::Quaterniond eigen() const { return {c_[0], c_[1], c_[2], c_[3]}; }
  Eigen::Matrix3d rotation_matrix() const { return eigen().toRotationMatrix(); }

  UnitQuaternion inverse() const;
  UnitQuaternion operator*(const UnitQuaternion& rhs) const;
  Vec3 rotate(const Vec3& v) const { return eigen() * v; }

  /// Exact component equality (canonical form makes this rotation equality).
  bool operator==(const UnitQuaternion& rhs) const { return c_ == rhs.c_; }

 private:
  explicit UnitQuaternion(const Eigen::Vector4d& c);

  Eigen::Vector4d c_{1.0, 0.0, 0.0, 0.0};
};

struct Pose {
  Vec3 position = Vec3::Zero();
  UnitQuaternion orientation;

  bool operator==(const Pose& rhs) const {
    return position == rhs.position && orientation == rhs.orientation;
  }
};

Pose compose(const Pose& a, const Pose& b);
Eigen::Isometry3d to_isometry(const Pose& p);
Pose from_isometry(const Eigen::Isometry3d& t);

/**
 * Spherical linear interpolation along the shorter arc from q0 to q1.
 *
 * The rotation angle from q0 to the result is exactly `alpha` times the
 * rotation angle from q0 to q1. Below 1e-6 rad the normalized linear blend is
 * used. When the rotation angle is within 1e-6 of pi both arcs are geodesics;
 * the arc whose relative rotation axis has a positive dominant component is
 * taken so that replays stay deterministic.
 */
UnitQuaternion slerp(const UnitQuaternion& q0, const UnitQuaternion& q1, double alpha);

/// min(|qa + qb|, |qa - qb|): chord length between the two rotations on S^3.
double angular_chord_distance(const UnitQuaternion& qa, const UnitQuaternion& qb);

double linear_distance(const Vec3& pa, const Vec3& pb);

/// Rotation angle of qa^-1 * qb, in [0, pi].
double rotation_angle_between(const UnitQuaternion& qa, const UnitQuaternion& qb);

UnitQuaternion rot_x(double angle);
UnitQuaternion rot_y(double angle);
UnitQuaternion rot_z(double angle);

}  // namespace teleop
