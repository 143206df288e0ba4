#include "teleop/grasp_selection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

namespace teleop {
namespace {

template <typename Distance>
std::vector<RankedCandidate> top_k(const std::vector<GraspCandidate>& candidates, int k,
                                   Distance&& distance) {
  if (candidates.empty()) throw InvalidInput("candidate list is empty");
  if (k < 1) throw InvalidInput("k must be at least 1");
  std::vector<RankedCandidate> ranked;
  ranked.reserve(candidates.size());
  for (const auto& c : candidates) {
    ranked.push_back({c, distance(c)});
  }
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep),
                    ranked.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
                      if (a.distance != b.distance) return a.distance < b.distance;
                      return a.candidate.id < b.candidate.id;
                    });
  ranked.resize(keep);
  return ranked;
}

std::vector<StageEntry> to_stage(const std::vector<RankedCandidate>& ranked) {
  std::vector<StageEntry> out;
  out.reserve(ranked.size());
  for (const auto& r : ranked) out.push_back({r.candidate.id, r.distance});
  return out;
}

std::vector<GraspCandidate> strip(const std::vector<RankedCandidate>& ranked) {
  std::vector<GraspCandidate> out;
  out.reserve(ranked.size());
  for (const auto& r : ranked) out.push_back(r.candidate);
  return out;
}

struct Evaluated {
  const RankedCandidate* finalist;
  JointConfiguration joints;
  ManipulabilityScore score;
};

// Runs IK + M on each finalist and picks the winner. `finalists` carry d_l.
void choose(const std::vector<RankedCandidate>& finalists, const RobotModel& model,
            const JointConfiguration& theta_seed, const IkOptions& ik, SelectionReport& report) {
  std::vector<Evaluated> feasible;
  for (const auto& f : finalists) {
    const IkResult sol = solve_ik(model, f.candidate.pose, theta_seed, ik);
    if (!sol.converged) {
      report.discarded_ik_failures.push_back(f.candidate.id);
      continue;
    }
    feasible.push_back({&f, sol.joints, penalized_manipulability(model, sol.joints)});
  }
  if (feasible.empty()) {
    throw NoFeasibleGrasp("no grasp candidate of the final stage has an IK solution");
  }
  double best = feasible.front().score.value;
  for (const auto& e : feasible) best = std::max(best, e.score.value);

  const Evaluated* winner = nullptr;
  for (const auto& e : feasible) {
    if (e.score.value < best - kManipulabilityTieTolerance) continue;
    if (!winner || e.finalist->distance < winner->finalist->distance ||
        (e.finalist->distance == winner->finalist->distance &&
         e.finalist->candidate.id < winner->finalist->candidate.id)) {
      winner = &e;
    }
  }
  report.chosen = winner->finalist->candidate;
  report.chosen_joint_solution = winner->joints;
  report.chosen_score = winner->score;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

void GraspLibrary::validate() const {
  if (candidates.empty()) throw InvalidInput("grasp library '" + object_id + "' is empty");
  std::set<int> ids;
  for (const auto& c : candidates) {
    if (!ids.insert(c.id).second) {
      throw InvalidInput("grasp library '" + object_id + "' repeats id " + std::to_string(c.id));
    }
    if (!c.pose.position.allFinite()) {
      throw InvalidInput("grasp " + std::to_string(c.id) + " has a non-finite position");
    }
  }
}

void SelectionConfig::validate() const {
  if (k_angular < 1 || k_linear < 1) throw InvalidInput("selection k values must be positive");
  if (k_linear > k_angular) throw InvalidInput("k_linear must not exceed k_angular");
}

std::vector<RankedCandidate> filter_top_k_angular(const std::vector<GraspCandidate>& candidates,
                                                  const UnitQuaternion& q_ee, int k) {
  return top_k(candidates, k, [&](const GraspCandidate& c) {
    return angular_chord_distance(q_ee, c.pose.orientation);
  });
}

std::vector<RankedCandidate> filter_top_k_linear(const std::vector<GraspCandidate>& candidates,
                                                 const Vec3& p_ee, int k) {
  return top_k(candidates, k, [&](const GraspCandidate& c) {
    return linear_distance(p_ee, c.pose.position);
  });
}

SelectionReport select_grasp(const GraspLibrary& library, const Pose& ee_pose,
                             const RobotModel& model, const JointConfiguration& theta_seed,
                             const SelectionConfig& config, const IkOptions& ik) {
  library.validate();
  config.validate();
  model.check(theta_seed);

  SelectionReport report;
  const auto angular = filter_top_k_angular(library.candidates, ee_pose.orientation, config.k_angular);
  const auto linear = filter_top_k_linear(strip(angular), ee_pose.position, config.k_linear);
  report.angular_stage = to_stage(angular);
  report.linear_stage = to_stage(linear);
  choose(linear, model, theta_seed, ik, report);
  return report;
}

SelectionReport select_grasp_baseline(const GraspLibrary& library, const Pose& ee_pose,
                                      const RobotModel& model,
                                      const JointConfiguration& theta_seed, const IkOptions& ik) {
  library.validate();
  model.check(theta_seed);

  const int all = static_cast<int>(library.candidates.size());
  SelectionReport report;
  report.angular_stage = to_stage(filter_top_k_angular(library.candidates, ee_pose.orientation, all));
  const auto linear = filter_top_k_linear(library.candidates, ee_pose.position, all);
  report.linear_stage = to_stage(linear);
  choose(linear, model, theta_seed, ik, report);
  return report;
}

GraspLibrary generate_synthetic_library(const std::string& object_id, const Pose& object_pose,
                                        double radius, int count, std::uint64_t seed) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidInput("radius must be positive");
  if (count < 1) throw InvalidInput("count must be at least 1");

  // Lowest allowed z of the outward direction, in the object frame.
  constexpr double kMinElevation = -0.25;

  std::mt19937_64 rng(seed);
  GraspLibrary lib;
  lib.object_id = object_id;
  lib.candidates.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Vec3 dir;
    do {
      const double z = 2.0 * uniform01(rng) - 1.0;
      const double phi = 2.0 * std::numbers::pi * uniform01(rng);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      dir = Vec3(r * std::cos(phi), r * std::sin(phi), z);
    } while (dir.z() < kMinElevation);
    const double roll = 2.0 * std::numbers::pi * uniform01(rng);

    const Vec3 outward = object_pose.orientation.rotate(dir).normalized();
    const Vec3 approach = -outward;
    const Vec3 ref = std::abs(approach.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
    const Vec3 x0 = ref.cross(approach).normalized();
    const Vec3 y0 = approach.cross(x0);
    Eigen::Matrix3d frame;
    frame.col(0) = x0;
    frame.col(1) = y0;
    frame.col(2) = approach;

    GraspCandidate c;
    c.id = i;
    c.object_id = object_id;
    c.pose.position = object_pose.position + radius * outward;
    c.pose.orientation =
        UnitQuaternion::from_rotation_matrix(frame) * rot_z(roll);
    lib.candidates.push_back(std::move(c));
  }
  return lib;
}

}  // namespace teleop
