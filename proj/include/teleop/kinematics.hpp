#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "teleop/geometry.hpp"

namespace teleop {

/// Revolute joint in standard Denavit-Hartenberg form, with its limits.
struct DhJoint {
  double a = 0.0;             // link length (m)
  double alpha = 0.0;         // link twist (rad)
  double d = 0.0;             // link offset (m)
  double theta_offset = 0.0;  // added to the joint angle (rad)
  double min = -3.141592653589793;
  double max = 3.141592653589793;
};

using JointConfiguration = Eigen::VectorXd;
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/**
 * Immutable serial-chain description.
 *
 * `task_rows` selects the Jacobian rows (0-2 linear, 3-5 angular) used by the
 * singularity term. When left empty it defaults to all six rows for arms with
 * at least six joints, the position rows for three to five joints and the
 * planar x/y rows otherwise.
 */
class RobotModel {
 public:
  RobotModel(std::vector<DhJoint> joints, Pose base = {}, Pose tool = {},
             std::vector<int> task_rows = {}, JointConfiguration home = {});

  std::size_t dof() const noexcept { return joints_.size(); }
  const std::vector<DhJoint>& joints() const noexcept { return joints_; }
  const Pose& base() const noexcept { return base_; }
  const Pose& tool() const noexcept { return tool_; }
  std::span<const int> task_rows() const noexcept { return task_rows_; }
  const JointConfiguration& home() const noexcept { return home_; }

  /// Upper bound on the distance from the first joint axis to the tool.
  double reach() const noexcept { return reach_; }

  /// Throws InvalidInput unless `theta` has one finite entry per joint.
  void check(const JointConfiguration& theta) const;

  JointConfiguration clamp_to_limits(const JointConfiguration& theta) const;

 private:
  std::vector<DhJoint> joints_;
  Pose base_;
  Pose tool_;
  std::vector<int> task_rows_;
  JointConfiguration home_;
  double reach_ = 0.0;
};

struct ManipulabilityScore {
  double singularity = 0.0;  // S: Yoshikawa measure on the task rows
  double joint_limit = 0.0;  // L: in [0, 1]
  double value = 0.0;        // M = S * L
};

Pose forward_kinematics(const RobotModel& model, const JointConfiguration& theta);

/// Geometric Jacobian of the tool frame expressed in the base-world frame.
Jacobian jacobian(const RobotModel& model, const JointConfiguration& theta);

/// sqrt(det(J J^T)) over the model's task rows.
double singularity_term(const RobotModel& model, const JointConfiguration& theta);

/// Product over joints of 4 (q - min)(max - q) / (max - min)^2, each clamped to [0, 1].
double joint_limit_term(const RobotModel& model, const JointConfiguration& theta);

ManipulabilityScore penalized_manipulability(const RobotModel& model,
                                             const JointConfiguration& theta);

struct IkOptions {
  double damping = 0.05;
  double max_step = 0.2;  // rad per joint per iteration
  int max_iterations = 200;
  double position_tolerance = 1e-4;
  double orientation_tolerance = 1e-3;
};

struct IkResult {
  bool converged = false;
  JointConfiguration joints;
  int iterations = 0;
  double position_error = 0.0;
  double orientation_error = 0.0;
};

/**
 * Damped-least-squares IK on the full 6D pose error, clamping each update to
 * `max_step` and the iterate to the joint limits. Once inside tolerance the
 * solver keeps refining for a few iterations so that mirrored targets land on
 * mirrored solutions to near machine precision. Failure to converge is
 * reported through `converged`, never thrown.
 */
IkResult solve_ik(const RobotModel& model, const Pose& target, const JointConfiguration& seed,
                  const IkOptions& options = {});

}  // namespace teleop
