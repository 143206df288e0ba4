#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "teleop/grasp_selection.hpp"
#include "teleop/io.hpp"
#include "teleop/shared_control.hpp"
#include "teleop/trajectory.hpp"

namespace teleop {

enum class Strategy { PreferenceAware, ManipulabilityOnly };

const char* to_string(Strategy s) noexcept;
Strategy strategy_from_string(const std::string& name);

/// Seeded operator stand-in: positions uniform in a box, tool z axis aimed
/// at `look_at` then tilted by up to `max_tilt`, with a uniform roll.
struct RandomPreparationSpec {
  int count = 50;
  std::uint64_t seed = 1;
  Vec3 box_min{0.25, -0.30, 0.20};
  Vec3 box_max{0.55, 0.30, 0.45};
  Vec3 look_at{0.45, 0.0, 0.05};
  double max_tilt = 0.35;  // rad
};

struct ScenarioConfig {
  std::shared_ptr<const RobotModel> model;
  std::vector<GraspLibrary> libraries;
  std::vector<Pose> preparation_poses;
  std::optional<RandomPreparationSpec> random_preparation;
  std::vector<Strategy> strategies{Strategy::PreferenceAware, Strategy::ManipulabilityOnly};
  double speed = 0.1;  // m/s
  double dt = 0.02;    // s
  SelectionConfig selection;
  SharedControlConfig shared_control;
  IkOptions ik;
  std::filesystem::path output_path;

  void validate() const;
};

/**
 * Reads a scenario JSON file. Relative paths inside it resolve against the
 * file's directory.
 *
 *   {"robot_model": "ur5.json", "grasp_libraries": ["cup.json", ...],
 *    "preparation_poses": [{"p": [...], "q": [...]}],
 *    "random_preparation": {"count", "seed", "box_min", "box_max", "look_at", "max_tilt"},
 *    "strategies": ["PreferenceAware", "ManipulabilityOnly"],
 *    "speed": 0.1, "dt": 0.02, "selection": {"k_angular", "k_linear"},
 *    "shared_control": {"alpha", "blend_epsilon", "sample_rate"}, "output": "out/report"}
 */
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

/// Explicit poses followed by the generated ones. Generated poses are
/// resampled until IK from the home configuration succeeds.
std::vector<Pose> resolve_preparation_poses(const ScenarioConfig& config);

struct CaseKey {
  int pose_index = 0;
  Strategy strategy = Strategy::PreferenceAware;
  std::string object_id;

  auto operator<=>(const CaseKey&) const = default;
};

struct CaseResult {
  Pose preparation;
  std::optional<SelectionReport> selection;
  std::optional<MotionMetrics> metrics;
  std::string failure;  // empty on success

  bool ok() const noexcept { return failure.empty(); }
};

struct StrategyAggregate {
  int cases = 0;
  int failures = 0;
  double mean_path_length = 0.0;
  double mean_orientation_travel = 0.0;
  double mean_completion_time = 0.0;
  double mean_manipulability = 0.0;
  double win_rate = 0.0;       // strictly shortest path among strategies on the same pose/object
  double no_worse_rate = 0.0;  // path no longer than any other strategy
};

struct ExperimentReport {
  std::map<CaseKey, CaseResult> cases;
  std::map<Strategy, StrategyAggregate> aggregate;

  int failures() const;
};

/// Fills `report.aggregate` from `report.cases`.
void summarize(ExperimentReport& report);

/// Runs every (preparation pose, strategy, object) combination. Per-case
/// failures are recorded, not thrown.
ExperimentReport run_experiment(const ScenarioConfig& config);

io::json report_to_json(const ExperimentReport& report);
/// One row per case.
std::string report_to_csv(const ExperimentReport& report);

struct CommandLogEntry {
  std::int64_t step = 0;
  double t = 0.0;
  Mode mode = Mode::Manual;
  bool blending = false;
  Pose pose;
};

struct ReplayResult {
  ExperimentReport report;  // one PreferenceAware case per grip, keyed by grip index
  std::vector<CommandLogEntry> log;
};

/**
 * Feeds a trace through the shared controller. The controller engages Manual
 * mode at the first record (with orientation blending). A grip in Automatic
 * mode selects a grasp on the object whose library has the candidate nearest
 * the effector and follows the planned approach one sample per record.
 * Events that do not fit the current mode throw ModeViolation.
 */
ReplayResult replay_trace(const std::vector<io::TraceRecord>& trace, const ScenarioConfig& config);

/// CSV with header `step,t,mode,blending,px,py,pz,qw,qx,qy,qz`.
std::string command_log_to_csv(const std::vector<CommandLogEntry>& log);

}  // namespace teleop
