#pragma once

#include <optional>
#include <string>
#include <vector>

#include "teleop/geometry.hpp"

namespace teleop {

struct TrajectorySample {
  double t = 0.0;
  Pose pose;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double speed = 0.0;  // m/s
  double dt = 0.0;     // s
};

struct MotionMetrics {
  double path_length = 0.0;              // m
  double orientation_travel = 0.0;       // rad
  double completion_time = 0.0;          // s
  double max_step_heading_change = 0.0;  // rad
};

/// Angular rate used only when start and target share a position but differ
/// in orientation, where the arc-length parameterization has zero duration.
inline constexpr double kPureRotationRate = 0.5;  // rad/s

/**
 * Straight-line approach at constant `speed`, with orientation SLERPed by the
 * same arc-length fraction. Samples are spaced by `dt`; the last one lands
 * exactly on `target` at t = distance / speed.
 */
Trajectory plan_approach(const Pose& start, const Pose& target, double speed, double dt);

MotionMetrics compute_metrics(const Trajectory& traj);

/// Streaming form of compute_metrics. `completion_time` is the time of the
/// last sample that moved, so a stationary tail does not grow it.
class MetricsAccumulator {
 public:
  void add(double t, const Pose& pose);
  const MotionMetrics& metrics() const noexcept { return metrics_; }
  std::size_t samples() const noexcept { return count_; }

 private:
  MotionMetrics metrics_;
  std::optional<Pose> last_;
  std::optional<Vec3> last_heading_;
  std::size_t count_ = 0;
};

/// CSV with header `t,px,py,pz,qw,qx,qy,qz`.
std::string trajectory_to_csv(const Trajectory& traj);

}  // namespace teleop
