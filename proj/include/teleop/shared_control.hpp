#pragma once

#include <cstdint>
#include <optional>

#include "teleop/geometry.hpp"

namespace teleop {

enum class Mode { Manual, Automatic };

const char* to_string(Mode m) noexcept;

/// One tracker reading, expressed in the tracker frame.
struct HandSample {
  Vec3 position = Vec3::Zero();
  UnitQuaternion orientation;
  std::int64_t step_index = 0;
};

struct CalibrationFrame {
  UnitQuaternion tracker_to_base;
};

/// Reference pair for relative position mapping: where the effector and the
/// hand were when manual following was last engaged.
struct ControlAnchors {
  Vec3 effector_anchor = Vec3::Zero();
  Vec3 hand_anchor = Vec3::Zero();
};

struct SharedControlConfig {
  double alpha = 0.2;            // SLERP step fraction while re-engaging orientation
  double blend_epsilon = 1e-3;   // rad; blending ends below this residual
  double sample_rate = 50.0;     // Hz

  void validate() const;
};

struct ControlState {
  Mode mode = Mode::Automatic;
  ControlAnchors anchors;
  CalibrationFrame calibration;
  Pose last_commanded;
  bool blending_active = false;
  std::optional<std::int64_t> last_step_index;
};

/// Automatic mode, holding `start`.
ControlState make_initial_state(const Pose& start, const CalibrationFrame& calibration = {});

Vec3 map_position(const ControlState& state, const HandSample& hand);
UnitQuaternion map_orientation(const ControlState& state, const HandSample& hand);

/// Re-anchors both positions at the switch so the effector does not jump and
/// starts orientation blending.
ControlState switch_to_manual(const ControlState& state, const HandSample& hand);
ControlState switch_to_automatic(const ControlState& state);

struct BlendStep {
  UnitQuaternion orientation;
  bool completed = false;  // residual to the mapped target fell below blend_epsilon
};

BlendStep blended_orientation_step(const ControlState& state, const HandSample& hand,
                                   const SharedControlConfig& config);

struct StepResult {
  ControlState state;
  Pose commanded;
};

/**
 * Advances the controller by one sample. In Manual mode the commanded pose is
 * the relative position map plus either the blended or the direct orientation
 * map. In Automatic mode `automatic_command` is passed through; without one
 * the last commanded pose is held. Samples whose step_index does not increase
 * are rejected with InvalidInput.
 */
StepResult step(const ControlState& state, const HandSample& hand,
                const SharedControlConfig& config,
                const std::optional<Pose>& automatic_command = std::nullopt);

}  // namespace teleop
