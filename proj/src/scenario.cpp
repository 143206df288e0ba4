#include "teleop/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

namespace teleop {
namespace {

constexpr int kMaxPreparationAttempts = 1000;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

// Frame whose z axis is `approach`, rolled by `roll` about it.
UnitQuaternion aim(const Vec3& approach, double roll) {
  const Vec3 z = approach.normalized();
  const Vec3 ref = std::abs(z.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 x = ref.cross(z).normalized();
  Eigen::Matrix3d frame;
  frame.col(0) = x;
  frame.col(1) = z.cross(x);
  frame.col(2) = z;
  return UnitQuaternion::from_rotation_matrix(frame) * rot_z(roll);
}

Pose sample_preparation(std::mt19937_64& rng, const RandomPreparationSpec& spec) {
  const Vec3 p(uniform(rng, spec.box_min.x(), spec.box_max.x()),
               uniform(rng, spec.box_min.y(), spec.box_max.y()),
               uniform(rng, spec.box_min.z(), spec.box_max.z()));
  Vec3 dir = spec.look_at - p;
  if (dir.norm() < 1e-9) dir = -Vec3::UnitZ();
  dir.normalize();
  const Vec3 ref = std::abs(dir.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 perp = ref.cross(dir).normalized();
  const double spin = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double tilt = uniform(rng, 0.0, spec.max_tilt);
  const double roll = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const Vec3 tilt_axis = UnitQuaternion::from_axis_angle(dir, spin).rotate(perp);
  const Vec3 approach = UnitQuaternion::from_axis_angle(tilt_axis, tilt).rotate(dir);
  return {p, aim(approach, roll)};
}

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SelectionReport run_strategy(Strategy s, const GraspLibrary& lib, const Pose& ee,
                             const ScenarioConfig& config, const JointConfiguration& seed) {
  if (s == Strategy::PreferenceAware) {
    return select_grasp(lib, ee, *config.model, seed, config.selection, config.ik);
  }
  return select_grasp_baseline(lib, ee, *config.model, seed, config.ik);
}

// Library holding the candidate nearest to `p`.
const GraspLibrary& nearest_library(const std::vector<GraspLibrary>& libs, const Vec3& p) {
  const GraspLibrary* best = &libs.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& lib : libs) {
    for (const auto& c : lib.candidates) {
      const double d = linear_distance(p, c.pose.position);
      if (d < best_d) {
        best_d = d;
        best = &lib;
      }
    }
  }
  return *best;
}

}  // namespace

const char* to_string(Strategy s) noexcept {
  return s == Strategy::PreferenceAware ? "PreferenceAware" : "ManipulabilityOnly";
}

Strategy strategy_from_string(const std::string& name) {
  if (name == "PreferenceAware") return Strategy::PreferenceAware;
  if (name == "ManipulabilityOnly") return Strategy::ManipulabilityOnly;
  throw InvalidInput("unknown strategy '" + name + "'");
}

void ScenarioConfig::validate() const {
  if (!model) throw InvalidInput("scenario has no robot model");
  if (libraries.empty()) throw InvalidInput("scenario has no grasp libraries");
  for (const auto& lib : libraries) lib.validate();
  if (strategies.empty()) throw InvalidInput("scenario needs at least one strategy");
  if (!(speed > 0.0) || !std::isfinite(speed)) throw InvalidInput("speed must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("dt must be positive");
  selection.validate();
  shared_control.validate();
  if (random_preparation) {
    const auto& r = *random_preparation;
    if (r.count < 0) throw InvalidInput("random_preparation.count must be non-negative");
    if ((r.box_max - r.box_min).minCoeff() < 0.0) {
      throw InvalidInput("random_preparation box_min exceeds box_max");
    }
  }
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  const io::json j = io::read_json_file(path);
  const auto dir = path.parent_path();
  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : dir / fp;
  };
  ScenarioConfig c;
  try {
    c.model = std::make_shared<const RobotModel>(
        io::load_robot_model(resolve(j.at("robot_model").get<std::string>())));
    for (const auto& lp : j.at("grasp_libraries")) {
      c.libraries.push_back(io::load_grasp_library(resolve(lp.get<std::string>())));
    }
    if (j.contains("preparation_poses")) {
      for (const auto& p : j.at("preparation_poses")) c.preparation_poses.push_back(io::pose_from_json(p));
    }
    if (j.contains("random_preparation")) {
      const auto& r = j.at("random_preparation");
      RandomPreparationSpec spec;
      spec.count = r.value("count", spec.count);
      spec.seed = r.value("seed", spec.seed);
      if (r.contains("box_min")) spec.box_min = io::vec3_from_json(r.at("box_min"));
      if (r.contains("box_max")) spec.box_max = io::vec3_from_json(r.at("box_max"));
      if (r.contains("look_at")) spec.look_at = io::vec3_from_json(r.at("look_at"));
      spec.max_tilt = r.value("max_tilt", spec.max_tilt);
      c.random_preparation = spec;
    }
    if (j.contains("strategies")) {
      c.strategies.clear();
      for (const auto& s : j.at("strategies")) c.strategies.push_back(strategy_from_string(s.get<std::string>()));
    }
    c.speed = j.value("speed", c.speed);
    c.dt = j.value("dt", c.dt);
    if (j.contains("selection")) {
      c.selection.k_angular = j.at("selection").value("k_angular", c.selection.k_angular);
      c.selection.k_linear = j.at("selection").value("k_linear", c.selection.k_linear);
    }
    if (j.contains("shared_control")) {
      const auto& s = j.at("shared_control");
      c.shared_control.alpha = s.value("alpha", c.shared_control.alpha);
      c.shared_control.blend_epsilon = s.value("blend_epsilon", c.shared_control.blend_epsilon);
      c.shared_control.sample_rate = s.value("sample_rate", c.shared_control.sample_rate);
    }
    if (j.contains("output")) c.output_path = resolve(j.at("output").get<std::string>());
  } catch (const io::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  c.validate();
  return c;
}

std::vector<Pose> resolve_preparation_poses(const ScenarioConfig& config) {
  std::vector<Pose> poses = config.preparation_poses;
  if (!config.random_preparation) return poses;
  const auto& spec = *config.random_preparation;
  std::mt19937_64 rng(spec.seed);
  for (int i = 0; i < spec.count; ++i) {
    bool found = false;
    for (int attempt = 0; attempt < kMaxPreparationAttempts && !found; ++attempt) {
      const Pose p = sample_preparation(rng, spec);
      if (solve_ik(*config.model, p, config.model->home(), config.ik).converged) {
        poses.push_back(p);
        found = true;
      }
    }
    if (!found) throw InvalidInput("no reachable preparation pose found in the sampling box");
  }
  return poses;
}

int ExperimentReport::failures() const {
  int n = 0;
  for (const auto& [_, c] : cases) n += c.ok() ? 0 : 1;
  return n;
}

void summarize(ExperimentReport& report) {
  report.aggregate.clear();
  std::map<Strategy, double> sum_m;
  for (const auto& [key, c] : report.cases) {
    auto& a = report.aggregate[key.strategy];
    ++a.cases;
    if (!c.ok()) {
      ++a.failures;
      continue;
    }
    a.mean_path_length += c.metrics->path_length;
    a.mean_orientation_travel += c.metrics->orientation_travel;
    a.mean_completion_time += c.metrics->completion_time;
    sum_m[key.strategy] += c.selection->chosen_score.value;
  }

  // Pairwise comparison per (pose, object) among strategies that all succeeded.
  std::map<std::pair<int, std::string>, std::map<Strategy, double>> groups;
  for (const auto& [key, c] : report.cases) {
    auto& g = groups[{key.pose_index, key.object_id}];
    g[key.strategy] = c.ok() ? c.metrics->path_length : std::numeric_limits<double>::quiet_NaN();
  }
  std::map<Strategy, int> wins, no_worse, compared;
  for (const auto& [_, g] : groups) {
    bool complete = g.size() == report.aggregate.size();
    for (const auto& [s, v] : g) complete = complete && !std::isnan(v);
    if (!complete) continue;
    for (const auto& [s, v] : g) {
      bool strictly = true, not_worse = true;
      for (const auto& [o, w] : g) {
        if (o == s) continue;
        strictly = strictly && v < w;
        not_worse = not_worse && v <= w;
      }
      ++compared[s];
      wins[s] += strictly ? 1 : 0;
      no_worse[s] += not_worse ? 1 : 0;
    }
  }

  for (auto& [s, a] : report.aggregate) {
    const int ok = a.cases - a.failures;
    if (ok > 0) {
      a.mean_path_length /= ok;
      a.mean_orientation_travel /= ok;
      a.mean_completion_time /= ok;
      a.mean_manipulability = sum_m[s] / ok;
    }
    if (compared[s] > 0) {
      a.win_rate = static_cast<double>(wins[s]) / compared[s];
      a.no_worse_rate = static_cast<double>(no_worse[s]) / compared[s];
    }
  }
}

ExperimentReport run_experiment(const ScenarioConfig& config) {
  config.validate();
  const std::vector<Pose> poses = resolve_preparation_poses(config);
  ExperimentReport report;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const Pose& prep = poses[i];
    const IkResult reach = solve_ik(*config.model, prep, config.model->home(), config.ik);
    for (Strategy s : config.strategies) {
      for (const auto& lib : config.libraries) {
        CaseResult c;
        c.preparation = prep;
        if (!reach.converged) {
          c.failure = "preparation pose is unreachable";
        } else {
          try {
            c.selection = run_strategy(s, lib, prep, config, reach.joints);
            c.metrics = compute_metrics(plan_approach(prep, c.selection->chosen.pose, config.speed, config.dt));
          } catch (const NoFeasibleGrasp& e) {
            c.selection.reset();
            c.failure = e.what();
          }
        }
        report.cases[{static_cast<int>(i), s, lib.object_id}] = std::move(c);
      }
    }
  }
  summarize(report);
  return report;
}

io::json report_to_json(const ExperimentReport& report) {
  io::json cases = io::json::array();
  for (const auto& [key, c] : report.cases) {
    io::json row = {{"pose_index", key.pose_index},
                    {"strategy", to_string(key.strategy)},
                    {"object_id", key.object_id},
                    {"status", c.ok() ? "ok" : "failed"},
                    {"preparation", io::pose_to_json(c.preparation)}};
    if (!c.ok()) row["failure"] = c.failure;
    if (c.selection) row["selection"] = io::selection_report_to_json(*c.selection);
    if (c.metrics) row["metrics"] = io::metrics_to_json(*c.metrics);
    cases.push_back(std::move(row));
  }
  io::json aggregate = io::json::object();
  for (const auto& [s, a] : report.aggregate) {
    aggregate[to_string(s)] = {{"cases", a.cases},
                               {"failures", a.failures},
                               {"mean_path_length", a.mean_path_length},
                               {"mean_orientation_travel", a.mean_orientation_travel},
                               {"mean_completion_time", a.mean_completion_time},
                               {"mean_manipulability", a.mean_manipulability},
                               {"win_rate", a.win_rate},
                               {"no_worse_rate", a.no_worse_rate}};
  }
  return {{"cases", cases}, {"aggregate", aggregate}};
}

std::string report_to_csv(const ExperimentReport& report) {
  std::string out =
      "pose_index,strategy,object_id,status,chosen_id,M,path_length,orientation_travel,"
      "completion_time,max_step_heading_change\n";
  for (const auto& [key, c] : report.cases) {
    out += std::to_string(key.pose_index) + "," + to_string(key.strategy) + "," + key.object_id + ",";
    if (!c.ok()) {
      out += "failed,,,,,,\n";
      continue;
    }
    const auto& m = *c.metrics;
    out += "ok," + std::to_string(c.selection->chosen.id) + "," + number(c.selection->chosen_score.value) +
           "," + number(m.path_length) + "," + number(m.orientation_travel) + "," +
           number(m.completion_time) + "," + number(m.max_step_heading_change) + "\n";
  }
  return out;
}

ReplayResult replay_trace(const std::vector<io::TraceRecord>& trace, const ScenarioConfig& config) {
  config.validate();
  ReplayResult out;
  if (trace.empty()) return out;

  const RobotModel& model = *config.model;
  const double dt = 1.0 / config.shared_control.sample_rate;
  JointConfiguration joints = model.home();
  ControlState state = make_initial_state(forward_kinematics(model, joints));
  std::optional<Trajectory> approach;
  std::size_t approach_index = 0;
  int grips = 0;

  for (std::size_t i = 0; i < trace.size(); ++i) {
    const io::TraceRecord& rec = trace[i];
    const HandSample hand{rec.hand_position, rec.hand_orientation, rec.step};
    const auto where = [&] { return " (trace step " + std::to_string(rec.step) + ")"; };
    if (i == 0 && rec.event != io::TraceEvent::ToManual) state = switch_to_manual(state, hand);

    try {
      switch (rec.event) {
        case io::TraceEvent::None:
          break;
        case io::TraceEvent::ToManual:
          state = switch_to_manual(state, hand);
          approach.reset();
          break;
        case io::TraceEvent::ToAutomatic:
          state = switch_to_automatic(state);
          break;
        case io::TraceEvent::Grip: {
          if (state.mode != Mode::Automatic) break;
          const GraspLibrary& lib = nearest_library(config.libraries, state.last_commanded.position);
          CaseResult c;
          c.preparation = state.last_commanded;
          try {
            c.selection = select_grasp(lib, state.last_commanded, model, joints, config.selection, config.ik);
            approach = plan_approach(state.last_commanded, c.selection->chosen.pose, config.speed, dt);
            approach_index = 0;
            c.metrics = compute_metrics(*approach);
          } catch (const NoFeasibleGrasp& e) {
            c.selection.reset();
            c.failure = e.what();
          }
          out.report.cases[{grips++, Strategy::PreferenceAware, lib.object_id}] = std::move(c);
          break;
        }
      }
    } catch (const ModeViolation& e) {
      throw ModeViolation(e.what() + where());
    }

    std::optional<Pose> command;
    if (state.mode == Mode::Automatic && approach) {
      command = approach->samples[std::min(approach_index, approach->samples.size() - 1)].pose;
      ++approach_index;
    }
    StepResult r = step(state, hand, config.shared_control, command);
    state = r.state;
    const IkResult ik = solve_ik(model, r.commanded, joints, config.ik);
    if (ik.converged) joints = ik.joints;
    out.log.push_back({rec.step, rec.t, state.mode, state.blending_active, r.commanded});
  }
  summarize(out.report);
  return out;
}

std::string command_log_to_csv(const std::vector<CommandLogEntry>& log) {
  std::string out = "step,t,mode,blending,px,py,pz,qw,qx,qy,qz\n";
  for (const auto& e : log) {
    const auto& p = e.pose.position;
    const auto& q = e.pose.orientation;
    out += std::to_string(e.step) + "," + number(e.t) + "," + to_string(e.mode) + "," +
           (e.blending ? "1" : "0") + "," + number(p.x()) + "," + number(p.y()) + "," +
           number(p.z()) + "," + number(q.w()) + "," + number(q.x()) + "," + number(q.y()) + "," +
           number(q.z()) + "\n";
  }
  return out;
}

}  // namespace teleop
