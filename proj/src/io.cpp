#include "teleop/io.hpp"

#include <fstream>
#include <sstream>

namespace teleop::io {
namespace {

template <std::size_t N>
std::array<double, N> fixed_array(const json& j, const char* what) {
  if (!j.is_array() || j.size() != N) {
    throw ParseError(std::string(what) + " must be an array of " + std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!j[i].is_number()) throw ParseError(std::string(what) + " must contain numbers");
    out[i] = j[i].get<double>();
  }
  return out;
}

double number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ParseError(std::string("missing numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

// Converts json and validation exceptions into ParseError with context.
template <typename F>
auto guarded(const std::string& context, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw ParseError(context + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw ParseError(context + ": " + e.what());
  } catch (const json::exception& e) {
    throw ParseError(context + ": " + e.what());
  }
}

}  // namespace

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j) {
  const auto a = fixed_array<3>(j, "position");
  const Vec3 v(a[0], a[1], a[2]);
  if (!v.allFinite()) throw ParseError("position must be finite");
  return v;
}

json quat_to_json(const UnitQuaternion& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

UnitQuaternion quat_from_json(const json& j) {
  return UnitQuaternion::from_wxyz(fixed_array<4>(j, "quaternion"));
}

json pose_to_json(const Pose& p) {
  return {{"p", vec3_to_json(p.position)}, {"q", quat_to_json(p.orientation)}};
}

Pose pose_from_json(const json& j) {
  if (!j.is_object() || !j.contains("p") || !j.contains("q")) {
    throw ParseError("pose needs 'p' and 'q'");
  }
  return {vec3_from_json(j.at("p")), quat_from_json(j.at("q"))};
}

json joints_to_json(const JointConfiguration& theta) {
  json out = json::array();
  for (Eigen::Index i = 0; i < theta.size(); ++i) out.push_back(theta[i]);
  return out;
}

JointConfiguration joints_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("joint configuration must be an array");
  JointConfiguration theta(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError("joint configuration must contain numbers");
    theta[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return theta;
}

json robot_model_to_json(const RobotModel& model) {
  json joints = json::array();
  for (const auto& jt : model.joints()) {
    joints.push_back({{"a", jt.a},
                      {"alpha", jt.alpha},
                      {"d", jt.d},
                      {"theta_offset", jt.theta_offset},
                      {"min", jt.min},
                      {"max", jt.max}});
  }
  return {{"joints", joints},
          {"base", pose_to_json(model.base())},
          {"tool", pose_to_json(model.tool())},
          {"task_rows", std::vector<int>(model.task_rows().begin(), model.task_rows().end())},
          {"home", joints_to_json(model.home())}};
}

RobotModel robot_model_from_json(const json& j) {
  return guarded("robot model", [&] {
    if (!j.is_object() || !j.contains("joints") || !j.at("joints").is_array()) {
      throw ParseError("missing 'joints' array");
    }
    std::vector<DhJoint> joints;
    for (const auto& jj : j.at("joints")) {
      DhJoint d;
      d.a = number(jj, "a");
      d.alpha = number(jj, "alpha");
      d.d = number(jj, "d");
      d.theta_offset = jj.contains("theta_offset") ? number(jj, "theta_offset") : 0.0;
      d.min = number(jj, "min");
      d.max = number(jj, "max");
      joints.push_back(d);
    }
    const Pose base = j.contains("base") ? pose_from_json(j.at("base")) : Pose{};
    const Pose tool = j.contains("tool") ? pose_from_json(j.at("tool")) : Pose{};
    std::vector<int> rows;
    if (j.contains("task_rows")) rows = j.at("task_rows").get<std::vector<int>>();
    JointConfiguration home;
    if (j.contains("home")) home = joints_from_json(j.at("home"));
    return RobotModel(std::move(joints), base, tool, std::move(rows), std::move(home));
  });
}

json grasp_library_to_json(const GraspLibrary& lib) {
  json cands = json::array();
  for (const auto& c : lib.candidates) {
    cands.push_back({{"id", c.id},
                     {"p", vec3_to_json(c.pose.position)},
                     {"q", quat_to_json(c.pose.orientation)}});
  }
  return {{"object_id", lib.object_id}, {"candidates", cands}};
}

GraspLibrary grasp_library_from_json(const json& j) {
  return guarded("grasp library", [&] {
    if (!j.is_object() || !j.contains("object_id") || !j.at("object_id").is_string()) {
      throw ParseError("missing string 'object_id'");
    }
    if (!j.contains("candidates") || !j.at("candidates").is_array()) {
      throw ParseError("missing 'candidates' array");
    }
    GraspLibrary lib;
    lib.object_id = j.at("object_id").get<std::string>();
    for (const auto& c : j.at("candidates")) {
      if (!c.contains("id") || !c.at("id").is_number_integer()) {
        throw ParseError("candidate needs an integer 'id'");
      }
      GraspCandidate g;
      g.id = c.at("id").get<int>();
      g.object_id = lib.object_id;
      g.pose = pose_from_json(c);
      lib.candidates.push_back(std::move(g));
    }
    lib.validate();
    return lib;
  });
}

json score_to_json(const ManipulabilityScore& s) {
  return {{"S", s.singularity}, {"L", s.joint_limit}, {"M", s.value}};
}

json selection_report_to_json(const SelectionReport& r) {
  const auto stage = [](const std::vector<StageEntry>& entries) {
    json out = json::array();
    for (const auto& e : entries) out.push_back({{"id", e.id}, {"d", e.distance}});
    return out;
  };
  return {{"chosen", {{"id", r.chosen.id},
                      {"object_id", r.chosen.object_id},
                      {"pose", pose_to_json(r.chosen.pose)}}},
          {"chosen_joint_solution", joints_to_json(r.chosen_joint_solution)},
          {"chosen_score", score_to_json(r.chosen_score)},
          {"angular_stage", stage(r.angular_stage)},
          {"linear_stage", stage(r.linear_stage)},
          {"discarded_ik_failures", r.discarded_ik_failures}};
}

json metrics_to_json(const MotionMetrics& m) {
  return {{"path_length", m.path_length},
          {"orientation_travel", m.orientation_travel},
          {"completion_time", m.completion_time},
          {"max_step_heading_change", m.max_step_heading_change}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

RobotModel load_robot_model(const std::filesystem::path& path) {
  return guarded(path.string(), [&] { return robot_model_from_json(read_json_file(path)); });
}

GraspLibrary load_grasp_library(const std::filesystem::path& path) {
  return guarded(path.string(), [&] { return grasp_library_from_json(read_json_file(path)); });
}

TraceRecord trace_record_from_json_line(const std::string& text, std::size_t line) {
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ParseError("record must be an object");
    for (const auto& [key, _] : j.items()) {
      if (key != "step" && key != "t" && key != "hand" && key != "event") {
        throw ParseError("unknown field '" + key + "'");
      }
    }
    TraceRecord r;
    if (!j.contains("step") || !j.at("step").is_number_integer()) {
      throw ParseError("missing integer 'step'");
    }
    r.step = j.at("step").get<std::int64_t>();
    r.t = number(j, "t");
    if (!j.contains("hand")) throw ParseError("missing 'hand'");
    const Pose hand = pose_from_json(j.at("hand"));
    r.hand_position = hand.position;
    r.hand_orientation = hand.orientation;
    if (j.contains("event") && !j.at("event").is_null()) {
      const auto& ev = j.at("event");
      const std::string name = ev.is_string() ? ev.get<std::string>() : "";
      if (name == "to_manual") r.event = TraceEvent::ToManual;
      else if (name == "to_automatic") r.event = TraceEvent::ToAutomatic;
      else if (name == "grip") r.event = TraceEvent::Grip;
      else throw ParseError("unknown event " + ev.dump());
    }
    return r;
  } catch (const ParseError& e) {
    throw ParseError(e.what(), line);
  } catch (const InvalidInput& e) {
    throw ParseError(e.what(), line);
  } catch (const json::exception& e) {
    throw ParseError(e.what(), line);
  }
}

std::string trace_record_to_json_line(const TraceRecord& r) {
  json ev = nullptr;
  switch (r.event) {
    case TraceEvent::None: break;
    case TraceEvent::ToManual: ev = "to_manual"; break;
    case TraceEvent::ToAutomatic: ev = "to_automatic"; break;
    case TraceEvent::Grip: ev = "grip"; break;
  }
  const json j = {{"step", r.step},
                  {"t", r.t},
                  {"hand", {{"p", vec3_to_json(r.hand_position)},
                            {"q", quat_to_json(r.hand_orientation)}}},
                  {"event", ev}};
  return j.dump();
}

std::vector<TraceRecord> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<TraceRecord> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(trace_record_from_json_line(text, line));
  }
  return out;
}

}  // namespace teleop::io
