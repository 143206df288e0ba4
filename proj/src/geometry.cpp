#include "teleop/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace teleop {
namespace {

constexpr double kSmallAngle = 1e-6;
constexpr double kAntipodalBand = 1e-6;

Eigen::Vector4d canonical(Eigen::Vector4d c) {
  for (int i = 0; i < 4; ++i) {
    if (c[i] != 0.0) {
      return c[i] < 0.0 ? Eigen::Vector4d(-c) : c;
    }
  }
  return c;
}

// Hamilton product on (w, x, y, z) vectors.
Eigen::Vector4d multiply(const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
  return {a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
          a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
          a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
          a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}

Eigen::Vector4d conjugate(const Eigen::Vector4d& a) { return {a[0], -a[1], -a[2], -a[3]}; }

}  // namespace

UnitQuaternion::UnitQuaternion(const Eigen::Vector4d& c) : c_(canonical(c)) {}

UnitQuaternion UnitQuaternion::from_wxyz(double w, double x, double y, double z) {
  const Eigen::Vector4d c(w, x, y, z);
  if (!c.allFinite()) {
    throw InvalidInput("quaternion has non-finite components");
  }
  const double n = c.norm();
  if (std::abs(n - 1.0) > kUnitNormTolerance) {
    throw InvalidInput("quaternion is not unit-norm (norm " + std::to_string(n) + ")");
  }
  // Already unit up to rounding: keep the bits so serialized poses round-trip.
  if (std::abs(n - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) return UnitQuaternion(c);
  return UnitQuaternion(c / n);
}

UnitQuaternion UnitQuaternion::from_wxyz(const std::array<double, 4>& wxyz) {
  return from_wxyz(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
}

UnitQuaternion UnitQuaternion::normalized(double w, double x, double y, double z) {
  const Eigen::Vector4d c(w, x, y, z);
  const double n = c.norm();
  if (!c.allFinite() || !(n > 0.0)) {
    throw InvalidInput("cannot normalize a zero or non-finite quaternion");
  }
  return UnitQuaternion(c / n);
}

UnitQuaternion UnitQuaternion::from_eigen(const Eigen::Quaterniond& q) {
  return normalized(q.w(), q.x(), q.y(), q.z());
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0) || !std::isfinite(angle)) {
    throw InvalidInput("axis-angle needs a non-zero axis and finite angle");
  }
  const Vec3 u = axis / n;
  const double s = std::sin(0.5 * angle);
  return normalized(std::cos(0.5 * angle), s * u.x(), s * u.y(), s * u.z());
}

UnitQuaternion UnitQuaternion::from_rotation_matrix(const Eigen::Matrix3d& r) {
  return from_eigen(Eigen::Quaterniond(r));
}

UnitQuaternion UnitQuaternion::inverse() const { return UnitQuaternion(conjugate(c_)); }

UnitQuaternion UnitQuaternion::operator*(const UnitQuaternion& rhs) const {
  Eigen::Vector4d p = multiply(c_, rhs.c_);
  return UnitQuaternion(p / p.norm());
}

Pose compose(const Pose& a, const Pose& b) {
  return {a.position + a.orientation.rotate(b.position), a.orientation * b.orientation};
}

Eigen::Isometry3d to_isometry(const Pose& p) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = p.orientation.rotation_matrix();
  t.translation() = p.position;
  return t;
}

Pose from_isometry(const Eigen::Isometry3d& t) {
  return {t.translation(), UnitQuaternion::from_rotation_matrix(t.linear())};
}

UnitQuaternion slerp(const UnitQuaternion& q0, const UnitQuaternion& q1, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidInput("slerp parameter must lie in [0, 1]");
  }
  const Eigen::Vector4d& a = q0.coeffs();
  Eigen::Vector4d b = q1.coeffs();

  const double angle = rotation_angle_between(q0, q1);
  if (std::numbers::pi - angle < kAntipodalBand) {
    // Relative rotation is a half turn; pick the sign whose relative axis has
    // a positive dominant component.
    const Eigen::Vector4d rel = multiply(conjugate(a), b);
    Eigen::Index dominant = 1;
    for (Eigen::Index i = 2; i < 4; ++i) {
      if (std::abs(rel[i]) > std::abs(rel[dominant])) {
        dominant = i;
      }
    }
    if (rel[dominant] < 0.0) {
      b = -b;
    }
  } else if (a.dot(b) < 0.0) {
    b = -b;
  }

  Eigen::Vector4d out;
  if (angle < kSmallAngle) {
    out = (1.0 - alpha) * a + alpha * b;
  } else {
    // Half-angle between the aligned 4-vectors, computed without acos.
    const double omega = 2.0 * std::atan2((a - b).norm(), (a + b).norm());
    const double s = std::sin(omega);
    out = (std::sin((1.0 - alpha) * omega) / s) * a + (std::sin(alpha * omega) / s) * b;
  }
  return UnitQuaternion::normalized(out[0], out[1], out[2], out[3]);
}

double angular_chord_distance(const UnitQuaternion& qa, const UnitQuaternion& qb) {
  const Eigen::Vector4d& a = qa.coeffs();
  const Eigen::Vector4d& b = qb.coeffs();
  return std::min((a + b).norm(), (a - b).norm());
}

double linear_distance(const Vec3& pa, const Vec3& pb) {
  if (!pa.allFinite() || !pb.allFinite()) {
    throw InvalidInput("linear_distance needs finite positions");
  }
  return (pa - pb).norm();
}

double rotation_angle_between(const UnitQuaternion& qa, const UnitQuaternion& qb) {
  const Eigen::Vector4d rel = multiply(conjugate(qa.coeffs()), qb.coeffs());
  return 2.0 * std::atan2(rel.tail<3>().norm(), std::abs(rel[0]));
}

UnitQuaternion rot_x(double angle) { return UnitQuaternion::from_axis_angle(Vec3::UnitX(), angle); }
UnitQuaternion rot_y(double angle) { return UnitQuaternion::from_axis_angle(Vec3::UnitY(), angle); }
UnitQuaternion rot_z(double angle) { return UnitQuaternion::from_axis_angle(Vec3::UnitZ(), angle); }

}  // namespace teleop
