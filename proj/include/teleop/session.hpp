#pragma once

#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "teleop/grasp_selection.hpp"
#include "teleop/io.hpp"
#include "teleop/shared_control.hpp"
#include "teleop/trajectory.hpp"

namespace teleop {

struct ServiceConfig {
  double tick_rate = 50.0;  // Hz
  int preview_interval_ticks = 5;
  double preview_min_translation = 1e-3;  // m
  double preview_min_rotation = std::numbers::pi / 360.0;  // rad (0.5 deg)
  double speed = 0.1;  // m/s, automatic approach
  SharedControlConfig shared_control;
  SelectionConfig selection;
  IkOptions ik;

  void validate() const;
};

ServiceConfig service_config_from_json(const io::json& j);

/// Everything a session reads but never writes.
struct SessionContext {
  std::shared_ptr<const RobotModel> model;
  std::vector<GraspLibrary> libraries;
  ServiceConfig config;

  const GraspLibrary* library(const std::string& object_id) const;
};

// Client -> service messages. Envelope: {"type", "seq", "payload"}.
struct HandPoseMsg {
  Vec3 position = Vec3::Zero();
  UnitQuaternion orientation;
};
struct ToggleModeMsg {};
struct GripMsg {};
struct SelectObjectMsg {
  std::string object_id;
};
struct SetConfigMsg {
  std::optional<double> alpha;
  std::optional<int> k_angular;
  std::optional<int> k_linear;
};
/// Handled by the network layer: operator role claim and model request.
struct ClaimOperatorMsg {};
struct ModelDescriptionMsg {};

using ClientMessage = std::variant<HandPoseMsg, ToggleModeMsg, GripMsg, SelectObjectMsg,
                                   SetConfigMsg, ClaimOperatorMsg, ModelDescriptionMsg>;

struct ParsedMessage {
  std::int64_t seq = 0;
  ClientMessage message;
};

/// Validates one text frame. Unknown types or fields, non-unit quaternions
/// and malformed JSON all throw ParseError.
ParsedMessage parse_client_message(const std::string& text);

/// True for messages that mutate the session and so need the operator role.
bool is_control_message(const ClientMessage& m) noexcept;

struct InboundMessage {
  int client_id = 0;
  std::int64_t seq = 0;
  ClientMessage message;
};

struct SelectedGrasp {
  std::string object_id;
  int candidate_id = 0;
  Pose pose;
  double manipulability = 0.0;
};

struct PipelinePreview {
  std::string object_id;
  std::optional<SelectionReport> report;  // empty when no finalist was feasible
};

struct StateSnapshot {
  std::int64_t tick = 0;
  Mode mode = Mode::Automatic;
  Pose commanded_pose;
  JointConfiguration joint_configuration;
  bool joint_tracking_ok = true;
  bool blending_active = false;
  bool approach_active = false;
  std::string selected_object;
  std::optional<SelectedGrasp> selected_grasp;
  std::optional<PipelinePreview> pipeline_preview;
  MotionMetrics metrics_so_far;
};

struct SessionState {
  std::int64_t tick = 0;  // tick of the last snapshot; 0 before the first
  ControlState control;
  HandSample hand;
  JointConfiguration joints;
  bool joint_tracking_ok = true;
  std::string selected_object;
  SharedControlConfig shared_control;
  SelectionConfig selection;
  std::optional<Trajectory> approach;
  std::size_t approach_index = 0;
  std::optional<SelectedGrasp> selected;
  std::optional<PipelinePreview> preview;
  bool preview_stale = true;
  std::int64_t last_preview_tick = 0;
  Pose last_preview_pose;
  MetricsAccumulator metrics;
};

/// Automatic mode holding the model's home pose; first library selected.
SessionState make_session(const SessionContext& ctx);

struct ErrorReply {
  int client_id = 0;
  std::int64_t seq = 0;
  std::string message;
};

struct TickResult {
  SessionState state;
  StateSnapshot snapshot;
  std::vector<ErrorReply> errors;
};

/**
 * One simulation tick. Messages apply in order; a message that fails leaves
 * the state exactly as it was and produces an ErrorReply for its sender.
 * Then the controller advances one sample (manual following or the next
 * approach sample) and a snapshot is emitted.
 */
TickResult session_tick(const SessionContext& ctx, SessionState state,
                        std::span<const InboundMessage> messages);

io::json snapshot_to_json(const StateSnapshot& s);

/// {"type": "snapshot", "seq": tick, "payload": {...}}
std::string snapshot_message(const StateSnapshot& s);
std::string error_message(std::int64_t seq, const std::string& what);

}  // namespace teleop
