#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "teleop/grasp_selection.hpp"
#include "teleop/kinematics.hpp"
#include "teleop/shared_control.hpp"
#include "teleop/trajectory.hpp"

namespace teleop::io {

using nlohmann::json;

// All quaternions are serialized as [w, x, y, z]; all units are SI.

json vec3_to_json(const Vec3& v);
Vec3 vec3_from_json(const json& j);
json quat_to_json(const UnitQuaternion& q);
UnitQuaternion quat_from_json(const json& j);

/// {"p": [x, y, z], "q": [w, x, y, z]}
json pose_to_json(const Pose& p);
Pose pose_from_json(const json& j);

json joints_to_json(const JointConfiguration& theta);
JointConfiguration joints_from_json(const json& j);

/// {"joints": [{a, alpha, d, theta_offset, min, max}], "base": pose, "tool": pose,
///  "task_rows": [...] (optional), "home": [...] (optional)}
json robot_model_to_json(const RobotModel& model);
RobotModel robot_model_from_json(const json& j);

/// {"object_id": "...", "candidates": [{"id", "p", "q"}]}
json grasp_library_to_json(const GraspLibrary& lib);
GraspLibrary grasp_library_from_json(const json& j);

json score_to_json(const ManipulabilityScore& s);
json selection_report_to_json(const SelectionReport& r);
json metrics_to_json(const MotionMetrics& m);

json read_json_file(const std::filesystem::path& path);
/// Pretty-printed, trailing newline.
void write_json_file(const std::filesystem::path& path, const json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

RobotModel load_robot_model(const std::filesystem::path& path);
GraspLibrary load_grasp_library(const std::filesystem::path& path);

enum class TraceEvent { None, ToManual, ToAutomatic, Grip };

struct TraceRecord {
  std::int64_t step = 0;
  double t = 0.0;
  Vec3 hand_position = Vec3::Zero();
  UnitQuaternion hand_orientation;
  TraceEvent event = TraceEvent::None;
};

/// `{step, t, hand: {p, q}, event: null | "to_manual" | "to_automatic" | "grip"}`.
/// Throws ParseError carrying `line`.
TraceRecord trace_record_from_json_line(const std::string& text, std::size_t line);
std::string trace_record_to_json_line(const TraceRecord& r);

/// Parses a JSON-lines trace; blank lines are skipped.
std::vector<TraceRecord> load_trace(const std::filesystem::path& path);

}  // namespace teleop::io
