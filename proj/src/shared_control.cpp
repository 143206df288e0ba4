#include "teleop/shared_control.hpp"

#include <cmath>

namespace teleop {
namespace {

void require_manual(const ControlState& state, const char* op) {
  if (state.mode != Mode::Manual) {
    throw ModeViolation(std::string(op) + " requires Manual mode");
  }
}

UnitQuaternion mapped_target(const ControlState& state, const HandSample& hand) {
  return state.calibration.tracker_to_base * hand.orientation;
}

}  // namespace

const char* to_string(Mode m) noexcept { return m == Mode::Manual ? "manual" : "automatic"; }

void SharedControlConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must lie in (0, 1]");
  if (!(blend_epsilon > 0.0) || !std::isfinite(blend_epsilon)) {
    throw InvalidInput("blend_epsilon must be positive");
  }
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw InvalidInput("sample_rate must be positive");
  }
}

ControlState make_initial_state(const Pose& start, const CalibrationFrame& calibration) {
  ControlState s;
  s.mode = Mode::Automatic;
  s.calibration = calibration;
  s.last_commanded = start;
  s.anchors = {start.position, Vec3::Zero()};
  return s;
}

Vec3 map_position(const ControlState& state, const HandSample& hand) {
  require_manual(state, "map_position");
  return state.anchors.effector_anchor + (hand.position - state.anchors.hand_anchor);
}

UnitQuaternion map_orientation(const ControlState& state, const HandSample& hand) {
  require_manual(state, "map_orientation");
  if (state.blending_active) {
    throw ModeViolation("map_orientation is unavailable while orientation blending is active");
  }
  return mapped_target(state, hand);
}

ControlState switch_to_manual(const ControlState& state, const HandSample& hand) {
  if (state.mode != Mode::Automatic) {
    throw ModeViolation("switch_to_manual requires Automatic mode");
  }
  ControlState next = state;
  next.mode = Mode::Manual;
  next.anchors.effector_anchor = state.last_commanded.position;
  next.anchors.hand_anchor = hand.position;
  next.blending_active = true;
  return next;
}

ControlState switch_to_automatic(const ControlState& state) {
  require_manual(state, "switch_to_automatic");
  ControlState next = state;
  next.mode = Mode::Automatic;
  next.blending_active = false;
  return next;
}

BlendStep blended_orientation_step(const ControlState& state, const HandSample& hand,
                                   const SharedControlConfig& config) {
  require_manual(state, "blended_orientation_step");
  if (!state.blending_active) {
    throw ModeViolation("blended_orientation_step requires active blending");
  }
  const UnitQuaternion target = mapped_target(state, hand);
  BlendStep out;
  out.orientation = slerp(state.last_commanded.orientation, target, config.alpha);
  out.completed = rotation_angle_between(out.orientation, target) < config.blend_epsilon;
  return out;
}

StepResult step(const ControlState& state, const HandSample& hand,
                const SharedControlConfig& config, const std::optional<Pose>& automatic_command) {
  if (state.last_step_index && hand.step_index <= *state.last_step_index) {
    throw InvalidInput("hand sample step " + std::to_string(hand.step_index) +
                       " does not follow step " + std::to_string(*state.last_step_index));
  }
  StepResult r{state, state.last_commanded};
  r.state.last_step_index = hand.step_index;

  if (state.mode == Mode::Manual) {
    r.commanded.position = map_position(state, hand);
    if (state.blending_active) {
      const BlendStep b = blended_orientation_step(state, hand, config);
      r.commanded.orientation = b.orientation;
      r.state.blending_active = !b.completed;
    } else {
      r.commanded.orientation = map_orientation(state, hand);
    }
  } else if (automatic_command) {
    r.commanded = *automatic_command;
  }
  r.state.last_commanded = r.commanded;
  return r;
}

}  // namespace teleop
