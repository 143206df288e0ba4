#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "teleop/io.hpp"
#include "teleop/kinematics.hpp"

namespace teleop::test {

inline constexpr double kPi = std::numbers::pi;

inline double deg(double d) { return d * kPi / 180.0; }

// Uniform unit quaternion (Shoemake), returned as raw (possibly negative-w)
// components so sign-flip tests see both covers.
inline std::array<double, 4> random_wxyz(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double u1 = u(rng), u2 = u(rng), u3 = u(rng);
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  return {a * std::sin(2 * kPi * u2), a * std::cos(2 * kPi * u2), b * std::sin(2 * kPi * u3),
          b * std::cos(2 * kPi * u3)};
}

inline UnitQuaternion random_quat(std::mt19937_64& rng) {
  return UnitQuaternion::from_wxyz(random_wxyz(rng));
}

inline Vec3 random_vec(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

inline UnitQuaternion negate(const UnitQuaternion& q) {
  return UnitQuaternion::from_wxyz(-q.w(), -q.x(), -q.y(), -q.z());
}

/// Two revolute z joints with unit links, identity base and tool.
inline RobotModel planar_2r(double min = -kPi, double max = kPi, double l1 = 1.0, double l2 = 1.0) {
  std::vector<DhJoint> j(2);
  j[0].a = l1;
  j[1].a = l2;
  for (auto& x : j) {
    x.min = min;
    x.max = max;
  }
  return RobotModel(j, {}, {}, {0, 1});
}

inline RobotModel ur5() { return io::load_robot_model(TELEOP_DATA_DIR "/ur5.json"); }

inline JointConfiguration random_joints(const RobotModel& m, std::mt19937_64& rng, double margin = 0.0) {
  JointConfiguration q(static_cast<Eigen::Index>(m.dof()));
  for (std::size_t i = 0; i < m.dof(); ++i) {
    const auto& j = m.joints()[i];
    std::uniform_real_distribution<double> u(j.min + margin, j.max - margin);
    q[static_cast<Eigen::Index>(i)] = u(rng);
  }
  return q;
}

}  // namespace teleop::test
