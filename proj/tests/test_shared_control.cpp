#include <doctest.h>

#include "support.hpp"
#include "teleop/shared_control.hpp"

using namespace teleop;
using teleop::test::deg;

namespace {

HandSample hand(Vec3 p, UnitQuaternion q, std::int64_t step) { return {p, q, step}; }

}  // namespace

TEST_CASE("config validation") {
  SharedControlConfig c;
  CHECK_NOTHROW(c.validate());
  c.alpha = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c.alpha = 1.2;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = {};
  c.blend_epsilon = -1;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = {};
  c.sample_rate = 0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
}

TEST_CASE("relative position map") {
  ControlState s = make_initial_state({Vec3(0.5, 0.0, 0.3), UnitQuaternion()});
  s = switch_to_manual(s, hand(Vec3(0, 0, 1), UnitQuaternion(), 0));
  const Vec3 p = map_position(s, hand(Vec3(0.1, -0.2, 1.05), UnitQuaternion(), 1));
  CHECK((p - Vec3(0.6, -0.2, 0.35)).norm() < 1e-12);
}

TEST_CASE("switching re-anchors so the effector does not jump") {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 100; ++i) {
    const Pose start{test::random_vec(rng), test::random_quat(rng)};
    const HandSample h = hand(test::random_vec(rng, -2, 2), test::random_quat(rng), i);
    const ControlState s = switch_to_manual(make_initial_state(start), h);
    CHECK(s.mode == Mode::Manual);
    CHECK(s.blending_active);
    CHECK(s.anchors.effector_anchor == start.position);
    CHECK(s.anchors.hand_anchor == h.position);
    CHECK((map_position(s, h) - start.position).norm() < 1e-15);
  }
}

TEST_CASE("mode violations") {
  const ControlState automatic = make_initial_state({});
  const HandSample h = hand(Vec3::Zero(), UnitQuaternion(), 0);
  CHECK_THROWS_AS(map_position(automatic, h), ModeViolation);
  CHECK_THROWS_AS(map_orientation(automatic, h), ModeViolation);
  CHECK_THROWS_AS(switch_to_automatic(automatic), ModeViolation);
  CHECK_THROWS_AS(blended_orientation_step(automatic, h, {}), ModeViolation);

  const ControlState manual = switch_to_manual(automatic, h);
  CHECK_THROWS_AS(switch_to_manual(manual, h), ModeViolation);
  // Direct orientation following is not available until blending ends.
  CHECK_THROWS_AS(map_orientation(manual, h), ModeViolation);

  ControlState following = manual;
  following.blending_active = false;
  CHECK_THROWS_AS(blended_orientation_step(following, h, {}), ModeViolation);
  CHECK_NOTHROW(map_orientation(following, h));
}

TEST_CASE("switch back to automatic ends blending") {
  const HandSample h = hand(Vec3::Zero(), rot_x(1.0), 0);
  const ControlState manual = switch_to_manual(make_initial_state({}), h);
  const ControlState back = switch_to_automatic(manual);
  CHECK(back.mode == Mode::Automatic);
  CHECK_FALSE(back.blending_active);
  CHECK(back.last_commanded == manual.last_commanded);
}

TEST_CASE("blending residual shrinks geometrically") {
  SharedControlConfig cfg;
  cfg.alpha = 0.3;
  const UnitQuaternion target = rot_z(deg(90));
  ControlState s = switch_to_manual(make_initial_state({}), hand(Vec3::Zero(), target, 0));
  const double initial = rotation_angle_between(UnitQuaternion(), target);
  for (int n = 1; n <= 12; ++n) {
    const StepResult r = step(s, hand(Vec3::Zero(), target, n), cfg);
    const double residual = rotation_angle_between(r.commanded.orientation, target);
    CHECK(residual == doctest::Approx(initial * std::pow(0.7, n)).epsilon(1e-9));
    s = r.state;
  }
}

TEST_CASE("blending completes below epsilon and hands over to direct following") {
  SharedControlConfig cfg;
  const UnitQuaternion target = rot_y(1.2);
  ControlState s = switch_to_manual(make_initial_state({}), hand(Vec3::Zero(), target, 0));
  int steps = 0;
  std::int64_t k = 1;
  while (s.blending_active) {
    s = step(s, hand(Vec3::Zero(), target, k++), cfg).state;
    REQUIRE(++steps < 100);
  }
  // 1.2 * 0.8^n < 1e-3 first holds at n = 32.
  CHECK(steps == 32);
  CHECK(rotation_angle_between(s.last_commanded.orientation, target) < cfg.blend_epsilon);

  const UnitQuaternion moved = rot_y(1.3);
  const StepResult r = step(s, hand(Vec3::Zero(), moved, k), cfg);
  CHECK(r.commanded.orientation == moved);
}

TEST_CASE("calibration rotates the orientation map") {
  CalibrationFrame calib{rot_z(deg(90))};
  ControlState s = make_initial_state({}, calib);
  s = switch_to_manual(s, hand(Vec3::Zero(), UnitQuaternion(), 0));
  s.blending_active = false;
  const UnitQuaternion out = map_orientation(s, hand(Vec3::Zero(), rot_x(0.4), 1));
  CHECK(rotation_angle_between(out, rot_z(deg(90)) * rot_x(0.4)) < 1e-12);
}

TEST_CASE("automatic mode passes commands through or holds") {
  const Pose start{Vec3(0.1, 0.2, 0.3), rot_x(0.2)};
  const ControlState s = make_initial_state(start);
  const HandSample h = hand(Vec3(5, 5, 5), rot_y(2.0), 0);
  const StepResult held = step(s, h, {});
  CHECK(held.commanded == start);
  const Pose cmd{Vec3(0.4, 0.0, 0.1), rot_z(0.3)};
  const StepResult moved = step(held.state, hand(Vec3::Zero(), UnitQuaternion(), 1), {}, cmd);
  CHECK(moved.commanded == cmd);
  CHECK(moved.state.last_commanded == cmd);
}

TEST_CASE("step indices must increase") {
  ControlState s = make_initial_state({});
  s = step(s, hand(Vec3::Zero(), UnitQuaternion(), 5), {}).state;
  CHECK_THROWS_AS(step(s, hand(Vec3::Zero(), UnitQuaternion(), 5), {}), InvalidInput);
  CHECK_THROWS_AS(step(s, hand(Vec3::Zero(), UnitQuaternion(), 4), {}), InvalidInput);
  CHECK_NOTHROW(step(s, hand(Vec3::Zero(), UnitQuaternion(), 6), {}));
}

TEST_CASE("first manual sample never jumps and later steps are bounded") {
  // Random traces with random switch points: the commanded pose at the first
  // manual sample keeps the previous position, and each blended orientation
  // step moves by at most alpha times the remaining residual.
  std::mt19937_64 rng(67);
  std::uniform_int_distribution<int> coin(0, 9);
  SharedControlConfig cfg;
  for (int trace = 0; trace < 50; ++trace) {
    ControlState s = make_initial_state({test::random_vec(rng), test::random_quat(rng)});
    Vec3 hp = test::random_vec(rng);
    UnitQuaternion hq = test::random_quat(rng);
    for (std::int64_t k = 0; k < 80; ++k) {
      hp += test::random_vec(rng, -0.01, 0.01);
      hq = hq * UnitQuaternion::from_axis_angle(test::random_vec(rng).normalized(), 0.02);
      const HandSample h = hand(hp, hq, k);
      if (coin(rng) == 0) {
        const ControlState before = s;
        s = s.mode == Mode::Automatic ? switch_to_manual(s, h) : switch_to_automatic(s);
        if (s.mode == Mode::Manual) {
          const StepResult r = step(s, h, cfg);
          CHECK((r.commanded.position - before.last_commanded.position).norm() < 1e-12);
          const double residual = rotation_angle_between(before.last_commanded.orientation,
                                                         s.calibration.tracker_to_base * hq);
          const double moved = rotation_angle_between(before.last_commanded.orientation,
                                                      r.commanded.orientation);
          CHECK(moved <= cfg.alpha * residual + 1e-9);
          s = r.state;
          continue;
        }
      }
      s = step(s, h, cfg).state;
    }
  }
}
