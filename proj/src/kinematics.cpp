#include "teleop/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

namespace teleop {
namespace {

constexpr double kExactError = 1e-12;
constexpr int kPolishIterations = 10;

Eigen::Isometry3d dh_transform(const DhJoint& j, double q) {
  const double theta = q + j.theta_offset;
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ca = std::cos(j.alpha), sa = std::sin(j.alpha);
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() << ct, -st * ca, st * sa,
                st, ct * ca, -ct * sa,
                0.0, sa, ca;
  t.translation() << j.a * ct, j.a * st, j.d;
  return t;
}

std::vector<int> default_task_rows(std::size_t dof) {
  if (dof >= 6) return {0, 1, 2, 3, 4, 5};
  if (dof >= 3) return {0, 1, 2};
  return {0, 1};
}

struct PoseError {
  Eigen::Matrix<double, 6, 1> twist;
  double position = 0.0;
  double orientation = 0.0;
};

PoseError pose_error(const Pose& target, const Pose& current) {
  PoseError e;
  e.twist.head<3>() = target.position - current.position;
  const UnitQuaternion rel = target.orientation * current.orientation.inverse();
  const Vec3 v(rel.x(), rel.y(), rel.z());
  const double vn = v.norm();
  const double angle = 2.0 * std::atan2(vn, rel.w());
  e.twist.tail<3>() = vn > 0.0 ? Vec3(v * (angle / vn)) : Vec3::Zero();
  e.position = e.twist.head<3>().norm();
  e.orientation = angle;
  return e;
}

}  // namespace

RobotModel::RobotModel(std::vector<DhJoint> joints, Pose base, Pose tool,
                       std::vector<int> task_rows, JointConfiguration home)
    : joints_(std::move(joints)), base_(std::move(base)), tool_(std::move(tool)),
      task_rows_(std::move(task_rows)), home_(std::move(home)) {
  if (joints_.size() < 2) {
    throw InvalidInput("robot model needs at least 2 joints");
  }
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    const DhJoint& j = joints_[i];
    if (!std::isfinite(j.a) || !std::isfinite(j.alpha) || !std::isfinite(j.d) ||
        !std::isfinite(j.theta_offset) || !std::isfinite(j.min) || !std::isfinite(j.max)) {
      throw InvalidInput("joint " + std::to_string(i) + " has non-finite parameters");
    }
    if (!(j.min < j.max)) {
      throw InvalidInput("joint " + std::to_string(i) + " has min >= max");
    }
    reach_ += std::hypot(j.a, j.d);
  }
  reach_ += tool_.position.norm();
  if (task_rows_.empty()) {
    task_rows_ = default_task_rows(joints_.size());
  }
  for (int r : task_rows_) {
    if (r < 0 || r > 5) {
      throw InvalidInput("task rows must lie in [0, 5]");
    }
  }
  if (task_rows_.size() > joints_.size()) {
    throw InvalidInput("more task rows than joints makes the singularity term degenerate");
  }
  if (home_.size() == 0) {
    home_ = JointConfiguration::Zero(static_cast<Eigen::Index>(joints_.size()));
  }
  check(home_);
}

void RobotModel::check(const JointConfiguration& theta) const {
  if (static_cast<std::size_t>(theta.size()) != joints_.size()) {
    throw InvalidInput("joint configuration has " + std::to_string(theta.size()) +
                       " entries, model has " + std::to_string(joints_.size()));
  }
  if (!theta.allFinite()) {
    throw InvalidInput("joint configuration is not finite");
  }
}

JointConfiguration RobotModel::clamp_to_limits(const JointConfiguration& theta) const {
  check(theta);
  JointConfiguration out = theta;
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out[k] = std::clamp(out[k], joints_[i].min, joints_[i].max);
  }
  return out;
}

Pose forward_kinematics(const RobotModel& model, const JointConfiguration& theta) {
  model.check(theta);
  Eigen::Isometry3d t = to_isometry(model.base());
  for (std::size_t i = 0; i < model.dof(); ++i) {
    t = t * dh_transform(model.joints()[i], theta[static_cast<Eigen::Index>(i)]);
  }
  t = t * to_isometry(model.tool());
  return from_isometry(t);
}

Jacobian jacobian(const RobotModel& model, const JointConfiguration& theta) {
  model.check(theta);
  const auto n = static_cast<Eigen::Index>(model.dof());
  Eigen::Matrix3Xd axes(3, n);
  Eigen::Matrix3Xd origins(3, n);
  Eigen::Isometry3d t = to_isometry(model.base());
  for (Eigen::Index i = 0; i < n; ++i) {
    axes.col(i) = t.linear().col(2);
    origins.col(i) = t.translation();
    t = t * dh_transform(model.joints()[static_cast<std::size_t>(i)], theta[i]);
  }
  const Vec3 tip = (t * to_isometry(model.tool())).translation();

  Jacobian j(6, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 z = axes.col(i);
    j.block<3, 1>(0, i) = z.cross(tip - origins.col(i));
    j.block<3, 1>(3, i) = z;
  }
  return j;
}

double singularity_term(const RobotModel& model, const JointConfiguration& theta) {
  const Jacobian full = jacobian(model, theta);
  const auto rows = model.task_rows();
  Eigen::MatrixXd task(static_cast<Eigen::Index>(rows.size()), full.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    task.row(static_cast<Eigen::Index>(r)) = full.row(rows[r]);
  }
  const double det = (task * task.transpose()).determinant();
  return std::sqrt(std::max(det, 0.0));
}

double joint_limit_term(const RobotModel& model, const JointConfiguration& theta) {
  model.check(theta);
  double product = 1.0;
  for (std::size_t i = 0; i < model.dof(); ++i) {
    const DhJoint& j = model.joints()[i];
    const double q = theta[static_cast<Eigen::Index>(i)];
    const double range = j.max - j.min;
    const double factor = 4.0 * (q - j.min) * (j.max - q) / (range * range);
    product *= std::clamp(factor, 0.0, 1.0);
  }
  return product;
}

ManipulabilityScore penalized_manipulability(const RobotModel& model,
                                             const JointConfiguration& theta) {
  ManipulabilityScore s;
  s.singularity = singularity_term(model, theta);
  s.joint_limit = joint_limit_term(model, theta);
  s.value = s.singularity * s.joint_limit;
  return s;
}

IkResult solve_ik(const RobotModel& model, const Pose& target, const JointConfiguration& seed,
                  const IkOptions& options) {
  model.check(seed);
  IkResult result;
  result.joints = model.clamp_to_limits(seed);

  PoseError err = pose_error(target, forward_kinematics(model, result.joints));
  const auto within = [&](const PoseError& e) {
    return e.position <= options.position_tolerance &&
           e.orientation <= options.orientation_tolerance;
  };

  // Quick rejection for targets no configuration can reach.
  if ((target.position - model.base().position).norm() > model.reach() + options.position_tolerance) {
    result.position_error = err.position;
    result.orientation_error = err.orientation;
    return result;
  }

  const auto n = static_cast<Eigen::Index>(model.dof());
  const double lambda2 = options.damping * options.damping;
  int polish = 0;
  while (result.iterations < options.max_iterations) {
    if (err.position <= kExactError && err.orientation <= kExactError) break;
    if (within(err)) {
      if (polish >= kPolishIterations) break;
      ++polish;
    }
    const Jacobian j = jacobian(model, result.joints);
    const Eigen::Matrix<double, 6, 6> damped =
        j * j.transpose() + lambda2 * Eigen::Matrix<double, 6, 6>::Identity();
    Eigen::VectorXd delta = j.transpose() * damped.partialPivLu().solve(err.twist);
    for (Eigen::Index i = 0; i < n; ++i) {
      delta[i] = std::clamp(delta[i], -options.max_step, options.max_step);
    }
    result.joints = model.clamp_to_limits(result.joints + delta);
    ++result.iterations;
    const PoseError next = pose_error(target, forward_kinematics(model, result.joints));
    const bool stalled = delta.norm() < 1e-15;
    err = next;
    if (stalled) break;
  }

  result.position_error = err.position;
  result.orientation_error = err.orientation;
  result.converged = within(err);
  return result;
}

}  // namespace teleop
