#include "teleop/session.hpp"

#include <cmath>
#include <set>

namespace teleop {
namespace {

using io::json;

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ParseError("unknown field '" + key + "' in " + where);
  }
}

template <typename... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <typename... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

// Applies one control message to `s`. Throws on anything the session refuses.
void apply(const SessionContext& ctx, SessionState& s, const ClientMessage& message) {
  std::visit(
      Overloaded{
          [&](const HandPoseMsg& m) {
            s.hand.position = m.position;
            s.hand.orientation = m.orientation;
          },
          [&](const ToggleModeMsg&) {
            if (s.control.mode == Mode::Automatic) {
              HandSample h = s.hand;
              h.step_index = s.tick + 1;
              s.control = switch_to_manual(s.control, h);
              s.approach.reset();
            } else {
              s.control = switch_to_automatic(s.control);
            }
          },
          [&](const GripMsg&) {
            if (s.control.mode != Mode::Automatic) return;  // recorded, no effect
            const GraspLibrary* lib = ctx.library(s.selected_object);
            if (!lib) throw InvalidInput("no grasp library for '" + s.selected_object + "'");
            const SelectionReport r = select_grasp(*lib, s.control.last_commanded, *ctx.model,
                                                   s.joints, s.selection, ctx.config.ik);
            s.approach = plan_approach(s.control.last_commanded, r.chosen.pose, ctx.config.speed,
                                       1.0 / ctx.config.tick_rate);
            s.approach_index = 0;
            s.selected = SelectedGrasp{lib->object_id, r.chosen.id, r.chosen.pose,
                                       r.chosen_score.value};
          },
          [&](const SelectObjectMsg& m) {
            if (!ctx.library(m.object_id)) throw InvalidInput("unknown object '" + m.object_id + "'");
            if (s.selected_object != m.object_id) {
              s.selected_object = m.object_id;
              s.preview_stale = true;
            }
          },
          [&](const SetConfigMsg& m) {
            SharedControlConfig sc = s.shared_control;
            SelectionConfig sel = s.selection;
            if (m.alpha) sc.alpha = *m.alpha;
            if (m.k_angular) sel.k_angular = *m.k_angular;
            if (m.k_linear) sel.k_linear = *m.k_linear;
            sc.validate();
            sel.validate();
            s.shared_control = sc;
            if (sel.k_angular != s.selection.k_angular || sel.k_linear != s.selection.k_linear) {
              s.selection = sel;
              s.preview_stale = true;
            }
          },
          [&](const ClaimOperatorMsg&) {},
          [&](const ModelDescriptionMsg&) {},
      },
      message);
}

bool preview_due(const SessionContext& ctx, const SessionState& s, const Pose& pose) {
  if (s.approach) return false;
  if (s.preview && s.tick - s.last_preview_tick < ctx.config.preview_interval_ticks) return false;
  if (!s.preview || s.preview_stale) return true;
  return linear_distance(pose.position, s.last_preview_pose.position) > ctx.config.preview_min_translation ||
         rotation_angle_between(pose.orientation, s.last_preview_pose.orientation) >
             ctx.config.preview_min_rotation;
}

}  // namespace

void ServiceConfig::validate() const {
  if (!(tick_rate > 0.0) || !std::isfinite(tick_rate)) throw InvalidInput("tick_rate must be positive");
  if (preview_interval_ticks < 1) throw InvalidInput("preview_interval_ticks must be >= 1");
  if (!(speed > 0.0) || !std::isfinite(speed)) throw InvalidInput("speed must be positive");
  shared_control.validate();
  selection.validate();
}

ServiceConfig service_config_from_json(const json& j) {
  ServiceConfig c;
  try {
    c.tick_rate = j.value("tick_rate", c.tick_rate);
    c.preview_interval_ticks = j.value("preview_interval_ticks", c.preview_interval_ticks);
    c.preview_min_translation = j.value("preview_min_translation", c.preview_min_translation);
    c.preview_min_rotation = j.value("preview_min_rotation", c.preview_min_rotation);
    c.speed = j.value("speed", c.speed);
    if (j.contains("shared_control")) {
      const auto& s = j.at("shared_control");
      c.shared_control.alpha = s.value("alpha", c.shared_control.alpha);
      c.shared_control.blend_epsilon = s.value("blend_epsilon", c.shared_control.blend_epsilon);
      c.shared_control.sample_rate = s.value("sample_rate", c.shared_control.sample_rate);
    }
    if (j.contains("selection")) {
      c.selection.k_angular = j.at("selection").value("k_angular", c.selection.k_angular);
      c.selection.k_linear = j.at("selection").value("k_linear", c.selection.k_linear);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("service config: ") + e.what());
  }
  c.validate();
  return c;
}

const GraspLibrary* SessionContext::library(const std::string& object_id) const {
  for (const auto& lib : libraries) {
    if (lib.object_id == object_id) return &lib;
  }
  return nullptr;
}

ParsedMessage parse_client_message(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("message must be a JSON object");
  reject_unknown_keys(j, {"type", "seq", "payload"}, "envelope");
  if (!j.contains("type") || !j.at("type").is_string()) throw ParseError("missing string 'type'");
  if (!j.contains("seq") || !j.at("seq").is_number_integer()) throw ParseError("missing integer 'seq'");
  const json payload = j.value("payload", json::object());
  if (!payload.is_object()) throw ParseError("'payload' must be an object");

  ParsedMessage out;
  out.seq = j.at("seq").get<std::int64_t>();
  const std::string type = j.at("type").get<std::string>();
  try {
    if (type == "hand_pose") {
      reject_unknown_keys(payload, {"p", "q"}, type);
      const Pose p = io::pose_from_json(payload);
      out.message = HandPoseMsg{p.position, p.orientation};
    } else if (type == "toggle_mode") {
      reject_unknown_keys(payload, {}, type);
      out.message = ToggleModeMsg{};
    } else if (type == "grip") {
      reject_unknown_keys(payload, {}, type);
      out.message = GripMsg{};
    } else if (type == "select_object") {
      reject_unknown_keys(payload, {"object_id"}, type);
      if (!payload.contains("object_id") || !payload.at("object_id").is_string()) {
        throw ParseError("select_object needs a string 'object_id'");
      }
      out.message = SelectObjectMsg{payload.at("object_id").get<std::string>()};
    } else if (type == "set_config") {
      reject_unknown_keys(payload, {"alpha", "k_angular", "k_linear"}, type);
      SetConfigMsg m;
      if (payload.contains("alpha")) {
        if (!payload.at("alpha").is_number()) throw ParseError("alpha must be a number");
        m.alpha = payload.at("alpha").get<double>();
        if (!(*m.alpha > 0.0 && *m.alpha <= 1.0)) throw ParseError("alpha must lie in (0, 1]");
      }
      for (const char* key : {"k_angular", "k_linear"}) {
        if (!payload.contains(key)) continue;
        if (!payload.at(key).is_number_integer() || payload.at(key).get<std::int64_t>() < 1) {
          throw ParseError(std::string(key) + " must be a positive integer");
        }
        (std::string(key) == "k_angular" ? m.k_angular : m.k_linear) = payload.at(key).get<int>();
      }
      out.message = m;
    } else if (type == "claim_operator") {
      reject_unknown_keys(payload, {}, type);
      out.message = ClaimOperatorMsg{};
    } else if (type == "model_description") {
      reject_unknown_keys(payload, {}, type);
      out.message = ModelDescriptionMsg{};
    } else {
      throw ParseError("unknown message type '" + type + "'");
    }
  } catch (const InvalidInput& e) {
    throw ParseError(type + ": " + e.what());
  }
  return out;
}

bool is_control_message(const ClientMessage& m) noexcept {
  return !std::holds_alternative<ClaimOperatorMsg>(m) && !std::holds_alternative<ModelDescriptionMsg>(m);
}

SessionState make_session(const SessionContext& ctx) {
  if (!ctx.model) throw InvalidInput("session needs a robot model");
  ctx.config.validate();
  SessionState s;
  s.joints = ctx.model->home();
  s.control = make_initial_state(forward_kinematics(*ctx.model, s.joints));
  s.shared_control = ctx.config.shared_control;
  s.selection = ctx.config.selection;
  if (!ctx.libraries.empty()) s.selected_object = ctx.libraries.front().object_id;
  return s;
}

TickResult session_tick(const SessionContext& ctx, SessionState state,
                        std::span<const InboundMessage> messages) {
  TickResult out;
  for (const auto& in : messages) {
    SessionState trial = state;
    try {
      apply(ctx, trial, in.message);
      state = std::move(trial);
    } catch (const Error& e) {
      out.errors.push_back({in.client_id, in.seq, e.what()});
    }
  }

  state.tick += 1;
  state.hand.step_index = state.tick;
  std::optional<Pose> command;
  if (state.control.mode == Mode::Automatic && state.approach) {
    const auto& samples = state.approach->samples;
    command = samples[std::min(state.approach_index, samples.size() - 1)].pose;
    if (state.approach_index + 1 >= samples.size()) {
      state.approach.reset();
    } else {
      ++state.approach_index;
    }
  }
  const Pose previous = state.control.last_commanded;
  StepResult r = step(state.control, state.hand, state.shared_control, command);
  state.control = r.state;

  if (!(r.commanded == previous)) {
    const IkResult ik = solve_ik(*ctx.model, r.commanded, state.joints, ctx.config.ik);
    state.joint_tracking_ok = ik.converged;
    if (ik.converged) state.joints = ik.joints;
  }
  state.metrics.add(static_cast<double>(state.tick) / ctx.config.tick_rate, r.commanded);

  if (preview_due(ctx, state, r.commanded)) {
    if (const GraspLibrary* lib = ctx.library(state.selected_object)) {
      PipelinePreview p{lib->object_id, std::nullopt};
      try {
        p.report = select_grasp(*lib, r.commanded, *ctx.model, state.joints, state.selection, ctx.config.ik);
      } catch (const NoFeasibleGrasp&) {
      }
      state.preview = std::move(p);
    }
    state.preview_stale = false;
    state.last_preview_tick = state.tick;
    state.last_preview_pose = r.commanded;
  }

  StateSnapshot& snap = out.snapshot;
  snap.tick = state.tick;
  snap.mode = state.control.mode;
  snap.commanded_pose = r.commanded;
  snap.joint_configuration = state.joints;
  snap.joint_tracking_ok = state.joint_tracking_ok;
  snap.blending_active = state.control.blending_active;
  snap.approach_active = state.approach.has_value();
  snap.selected_object = state.selected_object;
  snap.selected_grasp = state.selected;
  snap.pipeline_preview = state.preview;
  snap.metrics_so_far = state.metrics.metrics();
  out.state = std::move(state);
  return out;
}

json snapshot_to_json(const StateSnapshot& s) {
  json selected = nullptr;
  if (s.selected_grasp) {
    selected = {{"object_id", s.selected_grasp->object_id},
                {"candidate_id", s.selected_grasp->candidate_id},
                {"pose", io::pose_to_json(s.selected_grasp->pose)},
                {"M", s.selected_grasp->manipulability}};
  }
  json preview = nullptr;
  if (s.pipeline_preview) {
    preview = {{"object_id", s.pipeline_preview->object_id}, {"feasible", s.pipeline_preview->report.has_value()}};
    if (const auto& r = s.pipeline_preview->report) {
      std::vector<int> angular, linear;
      for (const auto& e : r->angular_stage) angular.push_back(e.id);
      for (const auto& e : r->linear_stage) linear.push_back(e.id);
      preview["chosen_id"] = r->chosen.id;
      preview["chosen_pose"] = io::pose_to_json(r->chosen.pose);
      preview["score"] = io::score_to_json(r->chosen_score);
      preview["angular_ids"] = angular;
      preview["linear_ids"] = linear;
      preview["discarded_ik_failures"] = r->discarded_ik_failures;
    }
  }
  return {{"tick", s.tick},
          {"mode", to_string(s.mode)},
          {"commanded_pose", io::pose_to_json(s.commanded_pose)},
          {"joint_configuration", io::joints_to_json(s.joint_configuration)},
          {"joint_tracking_ok", s.joint_tracking_ok},
          {"blending_active", s.blending_active},
          {"approach_active", s.approach_active},
          {"selected_object", s.selected_object},
          {"selected_grasp", selected},
          {"pipeline_preview", preview},
          {"metrics_so_far", io::metrics_to_json(s.metrics_so_far)}};
}

std::string snapshot_message(const StateSnapshot& s) {
  return json{{"type", "snapshot"}, {"seq", s.tick}, {"payload", snapshot_to_json(s)}}.dump();
}

std::string error_message(std::int64_t seq, const std::string& what) {
  return json{{"type", "error"}, {"seq", seq}, {"payload", {{"message", what}}}}.dump();
}

}  // namespace teleop
