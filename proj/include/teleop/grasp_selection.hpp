#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "teleop/kinematics.hpp"

namespace teleop {

struct GraspCandidate {
  int id = 0;
  std::string object_id;
  Pose pose;  // desired tool pose in the robot base frame
};

struct GraspLibrary {
  std::string object_id;
  std::vector<GraspCandidate> candidates;

  /// Non-empty, unique ids.
  void validate() const;
};

struct SelectionConfig {
  int k_angular = 30;
  int k_linear = 6;

  void validate() const;
};

struct RankedCandidate {
  GraspCandidate candidate;
  double distance = 0.0;
};

struct StageEntry {
  int id = 0;
  double distance = 0.0;
};

struct SelectionReport {
  GraspCandidate chosen;
  JointConfiguration chosen_joint_solution;
  ManipulabilityScore chosen_score;
  std::vector<StageEntry> angular_stage;  // ascending d_a
  std::vector<StageEntry> linear_stage;   // ascending d_l
  std::vector<int> discarded_ik_failures;
};

/// Two scores closer than this are treated as a tie in M.
inline constexpr double kManipulabilityTieTolerance = 1e-9;

/// The min(k, n) candidates closest in orientation to `q_ee`, ascending, ties by id.
std::vector<RankedCandidate> filter_top_k_angular(const std::vector<GraspCandidate>& candidates,
                                                  const UnitQuaternion& q_ee, int k);

/// The min(k, n) candidates closest in position to `p_ee`, ascending, ties by id.
std::vector<RankedCandidate> filter_top_k_linear(const std::vector<GraspCandidate>& candidates,
                                                 const Vec3& p_ee, int k);

/**
 * Preference-aware selection: the k_angular candidates nearest the current
 * tool orientation, then the k_linear of those nearest the tool position, then
 * the finalist with the highest penalized manipulability at its IK solution
 * (seeded at `theta_seed`). Ties in M go to the smaller linear distance, then
 * the smaller id. Throws NoFeasibleGrasp when every finalist fails IK.
 */
SelectionReport select_grasp(const GraspLibrary& library, const Pose& ee_pose,
                             const RobotModel& model, const JointConfiguration& theta_seed,
                             const SelectionConfig& config, const IkOptions& ik = {});

/// Manipulability-only selection over the whole library, with the same
/// tie-breaks. `ee_pose` only feeds the distances recorded in the report and
/// the d_l tie-break.
SelectionReport select_grasp_baseline(const GraspLibrary& library, const Pose& ee_pose,
                                      const RobotModel& model,
                                      const JointConfiguration& theta_seed,
                                      const IkOptions& ik = {});

/**
 * Seeded synthetic library: `count` grasps on a sphere of `radius` around the
 * object center, each with its tool z axis pointing at the center and a random
 * roll about it. Approach directions from well below the object are excluded.
 */
GraspLibrary generate_synthetic_library(const std::string& object_id, const Pose& object_pose,
                                        double radius, int count, std::uint64_t seed);

}  // namespace teleop
