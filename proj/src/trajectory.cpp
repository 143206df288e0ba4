#include "teleop/trajectory.hpp"

#include <cmath>
#include <cstdio>

namespace teleop {
namespace {

double heading_change(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace

Trajectory plan_approach(const Pose& start, const Pose& target, double speed, double dt) {
  if (!(speed > 0.0) || !std::isfinite(speed)) throw InvalidInput("speed must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("dt must be positive");

  Trajectory traj;
  traj.speed = speed;
  traj.dt = dt;

  const double distance = linear_distance(start.position, target.position);
  const double angle = rotation_angle_between(start.orientation, target.orientation);
  double duration = distance / speed;
  if (distance == 0.0 && angle > 0.0) {
    duration = angle / kPureRotationRate;
  }
  if (duration == 0.0) {
    traj.samples.push_back({0.0, target});
    return traj;
  }

  // Interior samples on the dt grid; the final sample carries the exact target.
  const auto intervals = static_cast<long>(std::ceil(duration / dt - 1e-9));
  traj.samples.reserve(static_cast<std::size_t>(intervals) + 1);
  for (long i = 0; i < intervals; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double s = t / duration;
    traj.samples.push_back(
        {t, {start.position + s * (target.position - start.position),
             slerp(start.orientation, target.orientation, s)}});
  }
  traj.samples.push_back({duration, target});
  return traj;
}

void MetricsAccumulator::add(double t, const Pose& pose) {
  ++count_;
  if (last_) {
    const Vec3 delta = pose.position - last_->position;
    const double step = delta.norm();
    const double turn = rotation_angle_between(last_->orientation, pose.orientation);
    metrics_.path_length += step;
    metrics_.orientation_travel += turn;
    if (step > 0.0) {
      if (last_heading_) {
        metrics_.max_step_heading_change =
            std::max(metrics_.max_step_heading_change, heading_change(*last_heading_, delta));
      }
      last_heading_ = delta;
    }
    if (step > 0.0 || turn > 0.0) {
      metrics_.completion_time = t;
    }
  }
  last_ = pose;
}

MotionMetrics compute_metrics(const Trajectory& traj) {
  if (traj.samples.empty()) throw InvalidInput("cannot compute metrics of an empty trajectory");
  MetricsAccumulator acc;
  for (const auto& s : traj.samples) {
    acc.add(s.t, s.pose);
  }
  MotionMetrics m = acc.metrics();
  m.completion_time = traj.samples.back().t;
  return m;
}

std::string trajectory_to_csv(const Trajectory& traj) {
  std::string out = "t,px,py,pz,qw,qx,qy,qz\n";
  char line[512];
  for (const auto& s : traj.samples) {
    const auto& p = s.pose.position;
    const auto& q = s.pose.orientation;
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t,
                  p.x(), p.y(), p.z(), q.w(), q.x(), q.y(), q.z());
    out += line;
  }
  return out;
}

}  // namespace teleop
