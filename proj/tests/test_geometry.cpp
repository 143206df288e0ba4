#include <doctest.h>

#include "support.hpp"
#include "teleop/geometry.hpp"

using namespace teleop;
using teleop::test::deg;
using teleop::test::kPi;

TEST_CASE("quaternions are stored in canonical sign") {
  const auto q = UnitQuaternion::from_wxyz(-0.5, 0.5, -0.5, 0.5);
  CHECK(q.w() == doctest::Approx(0.5));
  CHECK(q.x() == doctest::Approx(-0.5));

  const auto zero_w = UnitQuaternion::from_wxyz(0.0, -1.0, 0.0, 0.0);
  CHECK(zero_w.x() == 1.0);
  CHECK(zero_w == UnitQuaternion::from_wxyz(0.0, 1.0, 0.0, 0.0));
}

TEST_CASE("non-unit input is rejected") {
  CHECK_THROWS_AS(UnitQuaternion::from_wxyz(1.0, 1.0, 0.0, 0.0), InvalidInput);
  CHECK_THROWS_AS(UnitQuaternion::from_wxyz(0.0, 0.0, 0.0, 0.0), InvalidInput);
  CHECK_THROWS_AS(UnitQuaternion::from_wxyz(NAN, 0.0, 0.0, 0.0), InvalidInput);
  CHECK_THROWS_AS(UnitQuaternion::normalized(0.0, 0.0, 0.0, 0.0), InvalidInput);
  const auto q = UnitQuaternion::from_wxyz(1.0 + 5e-7, 0.0, 0.0, 0.0);
  CHECK(std::abs(q.coeffs().norm() - 1.0) < 1e-12);
}

TEST_CASE("slerp endpoints and midpoint") {
  std::mt19937_64 rng(3);
  const auto q0 = test::random_quat(rng);
  const auto q1 = test::random_quat(rng);
  CHECK(rotation_angle_between(slerp(q0, q1, 0.0), q0) < 1e-12);
  CHECK(rotation_angle_between(slerp(q0, q1, 1.0), q1) < 1e-12);

  const auto mid = slerp(UnitQuaternion(), rot_z(deg(90)), 0.5);
  CHECK(rotation_angle_between(mid, rot_z(deg(45))) < 1e-12);

  CHECK_THROWS_AS(slerp(q0, q1, -0.1), InvalidInput);
  CHECK_THROWS_AS(slerp(q0, q1, 1.5), InvalidInput);
}

TEST_CASE("slerp agrees with Eigen's independent implementation") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const auto a = test::random_quat(rng);
    const auto b = test::random_quat(rng);
    const double alpha = t(rng);
    const auto ours = slerp(a, b, alpha);
    const auto theirs = UnitQuaternion::from_eigen(a.eigen().slerp(alpha, b.eigen()));
    REQUIRE(rotation_angle_between(ours, theirs) < 1e-9);
  }
}

TEST_CASE("slerp small-angle and antipodal branches") {
  const auto a = rot_x(0.3);
  const auto b = a * rot_y(1e-8);
  const auto s = slerp(a, b, 0.5);
  CHECK(std::abs(s.coeffs().norm() - 1.0) < 1e-12);
  CHECK(std::abs(rotation_angle_between(a, s) - 0.5e-8) < 1e-12);

  // Half-turn apart: either arc is a geodesic, the pick must be repeatable
  // and still cover half the angle.
  const auto c = rot_z(0.2);
  const auto d = c * rot_x(kPi);
  const auto m1 = slerp(c, d, 0.5);
  const auto m2 = slerp(c, d, 0.5);
  CHECK(m1 == m2);
  CHECK(std::abs(rotation_angle_between(c, m1) - kPi / 2) < 1e-9);
  CHECK(std::abs(rotation_angle_between(m1, d) - kPi / 2) < 1e-9);
}

TEST_CASE("angular chord distance examples") {
  std::mt19937_64 rng(5);
  const auto q = test::random_quat(rng);
  CHECK(angular_chord_distance(q, q) == 0.0);
  CHECK(angular_chord_distance(q, test::negate(q)) == 0.0);
  // sqrt(2 - sqrt(2)) = 2 sin(pi/8)
  CHECK(angular_chord_distance(UnitQuaternion(), rot_z(deg(90))) ==
        doctest::Approx(0.7653668647301796).epsilon(1e-12));
  CHECK(std::abs(2.0 * std::sin(kPi / 8) - 0.7653668647301796) < 1e-15);
}

TEST_CASE("chord distance is symmetric, sign-insensitive and bounded") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 2000; ++i) {
    const auto wa = test::random_wxyz(rng);
    const auto wb = test::random_wxyz(rng);
    const auto a = UnitQuaternion::from_wxyz(wa);
    const auto b = UnitQuaternion::from_wxyz(wb);
    const double d = angular_chord_distance(a, b);
    CHECK(d == angular_chord_distance(b, a));
    CHECK(d == angular_chord_distance(a, test::negate(b)));
    CHECK(d >= 0.0);
    CHECK(d <= std::sqrt(2.0) + 1e-15);
    const double dot = std::abs(wa[0] * wb[0] + wa[1] * wb[1] + wa[2] * wb[2] + wa[3] * wb[3]);
    CHECK(std::abs(d * d - (2.0 - 2.0 * dot)) < 1e-12);
  }
}

TEST_CASE("linear distance") {
  const Vec3 p(0.3, -0.2, 0.9);
  CHECK(linear_distance(p, p) == 0.0);
  CHECK(linear_distance(Vec3::Zero(), Vec3(1, 2, 2)) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(linear_distance(Vec3(1, 0, 0), Vec3(0, 1, 0)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(linear_distance(Vec3(NAN, 0, 0), p), InvalidInput);

  std::mt19937_64 rng(23);
  for (int i = 0; i < 500; ++i) {
    const Vec3 a = test::random_vec(rng), b = test::random_vec(rng), c = test::random_vec(rng);
    CHECK(linear_distance(a, c) <= linear_distance(a, b) + linear_distance(b, c) + 1e-15);
    CHECK(linear_distance(a, b) == linear_distance(b, a));
  }
}

TEST_CASE("rotation angle between") {
  std::mt19937_64 rng(29);
  const auto q = test::random_quat(rng);
  CHECK(rotation_angle_between(q, q) == doctest::Approx(0.0));
  CHECK(rotation_angle_between(q, test::negate(q)) == doctest::Approx(0.0));
  CHECK(rotation_angle_between(UnitQuaternion(), rot_z(deg(90))) == doctest::Approx(kPi / 2).epsilon(1e-14));
  CHECK(rotation_angle_between(UnitQuaternion(), rot_x(kPi)) == doctest::Approx(kPi));
}

TEST_CASE("composition and rotation helpers") {
  const auto q = rot_z(deg(90)) * rot_x(deg(90));
  const Vec3 v = q.rotate(Vec3::UnitY());
  // rot_x maps y to z, rot_z leaves z alone.
  CHECK((v - Vec3::UnitZ()).norm() < 1e-12);

  Pose a{Vec3(1, 0, 0), rot_z(deg(90))};
  Pose b{Vec3(1, 0, 0), UnitQuaternion()};
  const Pose c = compose(a, b);
  CHECK((c.position - Vec3(1, 1, 0)).norm() < 1e-12);
  const Pose back = from_isometry(to_isometry(c));
  CHECK((back.position - c.position).norm() < 1e-15);
  CHECK(rotation_angle_between(back.orientation, c.orientation) < 1e-12);
}
