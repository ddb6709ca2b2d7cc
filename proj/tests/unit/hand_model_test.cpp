#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "handemb/config_io.hpp"
#include "handemb/errors.hpp"
#include "handemb/hand_model.hpp"
#include "handemb/mesh.hpp"
#include "oracles.hpp"

using namespace handemb;

namespace {

constexpr double kPi = std::numbers::pi;

HandShape shipped_shape() { return load_hand_shape_file(testenv::config_path("hand_model.json")); }

FingerAngles random_angles(std::mt19937_64& rng, double lo = -0.3, double hi = 1.6) {
  std::uniform_real_distribution<double> u(lo, hi);
  FingerAngles q;
  for (int k = 0; k < 9; ++k) q[k] = u(rng);
  return q;
}

// Straight fingers along +y, no shape modes.
HandShape simple_shape(double length, double radius) {
  std::array<FingerShapeBasis, 5> basis;
  for (std::size_t i = 0; i < 5; ++i) {
    basis[i].mean << 0.02 * static_cast<double>(i), 0.0, 0.0, length, length, length, radius,
        radius, radius;
  }
  return HandShape(Beta::Zero(), basis);
}

Vec3 extent(const TriangleMesh& m) {
  Vec3 lo = m.vertices.front(), hi = m.vertices.front();
  for (const Vec3& v : m.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return hi - lo;
}

}  // namespace

TEST_SUITE("hand_model") {

TEST_CASE("finger names") {
  for (FingerId f : kFingers) CHECK(finger_from_name(finger_name(f)) == f);
  CHECK_FALSE(finger_from_name("pinky").has_value());
}

TEST_CASE("zero configuration reaches straight along the finger axis") {
  const HandShape shape = shipped_shape();
  for (FingerId f : kFingers) {
    const FingerGeometry& g = shape.finger(f);
    const MarkerPair p = finger_forward_kinematics(shape, f, FingerAngles::Zero());
    const Vec3 expected = g.base.translation() + g.base.rotation().col(1) * g.reach();
    CHECK((p[1] - expected).norm() < 1e-15);
  }
}

TEST_CASE("first flexion of a quarter turn rotates the tip about the base x axis") {
  const HandShape shape = shipped_shape();
  const FingerGeometry& g = shape.finger(FingerId::index);
  FingerAngles q = FingerAngles::Zero();
  q[0] = kPi / 2;
  const Vec3 base = g.base.translation();
  const Vec3 tip = finger_forward_kinematics(g, q)[1];
  const Vec3 straight = finger_forward_kinematics(g, FingerAngles::Zero())[1];
  CHECK(std::abs((tip - base).norm() - (straight - base).norm()) < 1e-15);
  const Vec3 local = g.base.rotation().transpose() * (tip - base);
  CHECK((local - Vec3(0, 0, g.reach())).norm() < 1e-15);
}

TEST_CASE("finger FK matches an explicit nine-joint chain") {
  const HandShape shape = shipped_shape();
  std::mt19937_64 rng(21);
  for (FingerId f : kFingers) {
    const FingerGeometry& g = shape.finger(f);
    for (int trial = 0; trial < 100; ++trial) {
      const FingerAngles q = random_angles(rng);
      std::array<double, 9> qa;
      for (int k = 0; k < 9; ++k) qa[k] = q[k];
      const MarkerPair p = finger_forward_kinematics(g, q);
      for (int j = 0; j < 2; ++j) {
        const MarkerPlacement& m = g.markers[j];
        const Vec3 expected = oracle::finger_point(g.base.matrix(), g.lengths, g.radii, qa,
                                                   m.segment, m.fraction, m.dorsal);
        CHECK((p[j] - expected).norm() < 1e-14);
      }
    }
  }
}

TEST_CASE("hand_markers applies the global pose") {
  const HandShape shape = shipped_shape();
  std::mt19937_64 rng(22);
  HandState state;
  for (FingerId f : kFingers) state.q(f) = random_angles(rng);
  const auto local = hand_markers(shape, state);
  for (FingerId f : kFingers) {
    const MarkerPair p = finger_forward_kinematics(shape, f, state.q(f));
    CHECK(local[finger_slot(f)][0] == p[0]);
    CHECK(local[finger_slot(f)][1] == p[1]);
  }

  state.pose = Transform::from_translation(Vec3(0.1, -0.2, 0.3));
  const auto shifted = hand_markers(shape, state);
  for (std::size_t i = 0; i < 5; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK((shifted[i][j] - local[i][j] - Vec3(0.1, -0.2, 0.3)).norm() < 1e-15);

  state.pose = Transform(oracle::random_rotation(rng), Vec3::Zero());
  const auto rotated = hand_markers(shape, state);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t k = 0; k < 10; ++k) {
      const double d0 = (local[i / 2][i % 2] - local[k / 2][k % 2]).norm();
      const double d1 = (rotated[i / 2][i % 2] - rotated[k / 2][k % 2]).norm();
      CHECK(std::abs(d0 - d1) < 1e-14);
    }
}

TEST_CASE("FK is Lipschitz in each angle") {
  const HandShape shape = shipped_shape();
  std::mt19937_64 rng(23);
  const double eps = 1e-6;
  for (FingerId f : kFingers) {
    const double reach = shape.finger(f).reach() + 2.0 * shape.finger(f).radii[1];
    for (int trial = 0; trial < 50; ++trial) {
      const FingerAngles q = random_angles(rng);
      const MarkerPair p = finger_forward_kinematics(shape, f, q);
      for (int k = 0; k < 9; ++k) {
        FingerAngles d = q;
        d[k] += eps;
        const MarkerPair pd = finger_forward_kinematics(shape, f, d);
        CHECK((pd[0] - p[0]).norm() <= reach * eps);
        CHECK((pd[1] - p[1]).norm() <= reach * eps);
      }
    }
  }
}

TEST_CASE("mid marker is closer to the base than the tip marker for moderate flexion") {
  // With the dorsal offset of the mid marker the ordering breaks for extreme
  // combined flexion, so this checks the range of ordinary grasps.
  const HandShape shape = shipped_shape();
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> flex(-0.26, 1.0), abd(-0.35, 0.35), twist(-0.17, 0.17);
  for (FingerId f : kFingers) {
    const Vec3 base = shape.finger(f).base.translation();
    for (int trial = 0; trial < 2000; ++trial) {
      FingerAngles q;
      for (int s = 0; s < 3; ++s) {
        q[3 * s] = flex(rng);
        q[3 * s + 1] = abd(rng);
        q[3 * s + 2] = twist(rng);
      }
      const MarkerPair p = finger_forward_kinematics(shape, f, q);
      CHECK((p[0] - base).norm() <= (p[1] - base).norm());
    }
  }
}

TEST_CASE("resolved dimensions are affine in beta") {
  const HandShape shape = shipped_shape();
  std::mt19937_64 rng(25);
  std::normal_distribution<double> n(0.0, 1.0);
  Beta beta;
  for (int k = 0; k < kShapeSize; ++k) beta[k] = n(rng);
  const HandShape s = shape.with_beta(beta);
  for (FingerId f : kFingers) {
    const FingerShapeBasis& b = shape.basis()[finger_slot(f)];
    const Eigen::Matrix<double, 9, 1> expected = b.mean + b.coefficients * beta;
    const FingerGeometry& g = s.finger(f);
    for (int k = 0; k < 3; ++k) {
      CHECK(g.base.translation()[k] == doctest::Approx(expected[k]).epsilon(1e-12));
      CHECK(g.lengths[k] == doctest::Approx(expected[3 + k]).epsilon(1e-12));
      CHECK(g.radii[k] == doctest::Approx(expected[6 + k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("shape validation") {
  std::array<FingerShapeBasis, 5> basis;
  for (auto& b : basis) b.mean << 0, 0, 0, 0.03, 0.02, 0.02, 0.008, 0.007, 0.006;
  CHECK_NOTHROW(HandShape(Beta::Zero(), basis));
  basis[2].coefficients(3, 0) = 0.02;  // length 0.03 - 3 * 0.02 < 0 at beta_0 = -3
  CHECK_THROWS_AS(HandShape(Beta::Zero(), basis), SchemaError);
}

TEST_CASE("interactive parameters") {
  std::array<double, 45> angles{};
  for (std::size_t i = 0; i < 45; ++i) angles[i] = 0.01 * static_cast<double>(i);
  const Vec3 w(0.1, -0.4, 0.2);
  const HandState s = HandState::from_parameters(Vec3(1, 2, 3), w, angles);
  CHECK((s.global_orientation() - w).norm() < 1e-14);
  CHECK(s.pose.translation() == Vec3(1, 2, 3));
  CHECK(s.q(FingerId::middle)[4] == angles[22]);
}

TEST_CASE("finger surface mesh geometry") {
  const double length = 0.03, radius = 0.008;
  const TriangleMesh capsule = capsule_mesh(length, radius, 32);
  CHECK_NOTHROW(capsule.validate());
  CHECK(std::abs(extent(capsule).y() - (length + 2 * radius)) < 1e-9);
  const double analytic = 2 * kPi * radius * length + 4 * kPi * radius * radius;
  CHECK(std::abs(capsule.area() - analytic) < 0.02 * analytic);

  const HandShape thin = simple_shape(length, radius);
  const HandShape thick = simple_shape(length, 2 * radius);
  const TriangleMesh a = finger_surface_mesh(thin, FingerId::index, FingerAngles::Zero(), 32);
  const TriangleMesh b = finger_surface_mesh(thick, FingerId::index, FingerAngles::Zero(), 32);
  CHECK(std::abs(extent(b).x() - 2.0 * extent(a).x()) < 1e-12);
  CHECK(std::abs(extent(b).z() - 2.0 * extent(a).z()) < 1e-12);
  CHECK(std::abs(extent(a).y() - (3 * length + 2 * radius)) < 1e-9);

  const TriangleMesh palmar = finger_surface_mesh(thin, FingerId::index, FingerAngles::Zero(), 32, true);
  CHECK(palmar.triangles.size() < a.triangles.size());
  for (const auto& t : palmar.triangles) {
    for (std::uint32_t i : t) CHECK(palmar.vertices[i].z() >= -1e-12);
  }
}

TEST_CASE("mesh validation and capsule arguments") {
  TriangleMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  m.triangles = {{0, 1, 2}};
  CHECK_NOTHROW(m.validate());
  CHECK(m.area() == doctest::Approx(0.5));
  m.triangles.push_back({0, 1, 3});
  CHECK_THROWS_AS(m.validate(), SchemaError);
  m.triangles.back() = {0, 1, 1};
  CHECK_THROWS_AS(m.validate(), SchemaError);
  CHECK_THROWS_AS(capsule_mesh(0.03, 0.008, 6), std::invalid_argument);
  CHECK_THROWS_AS(capsule_mesh(0.03, 0.008, 10), std::invalid_argument);

  const Transform frame = capsule_frame(Vec3(0, 0, 0), Vec3(0, 0, 2), Vec3(1, 0, 0));
  CHECK((frame.rotation().col(1) - Vec3(0, 0, 1)).norm() < 1e-15);
  CHECK((frame.rotation().col(2) - Vec3(1, 0, 0)).norm() < 1e-15);
}

}  // TEST_SUITE
