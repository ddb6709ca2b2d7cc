#include <doctest.h>

#include <cmath>
#include <random>

#include "handemb/config_io.hpp"
#include "handemb/embodiment.hpp"
#include "handemb/errors.hpp"
#include "handemb/metrics.hpp"
#include "oracles.hpp"

using namespace handemb;

namespace {

TriangleMesh square(double z, double size = 1.0) {
  TriangleMesh m;
  m.vertices = {Vec3(0, 0, z), Vec3(size, 0, z), Vec3(size, size, z), Vec3(0, size, z)};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

ContactSurface surface(TriangleMesh m) { return {std::move(m), FingerId::index}; }

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("point-triangle distance examples") {
  const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
  CHECK(point_triangle_distance(Vec3(0, 0, 1), a, b, c) == 1.0);
  CHECK(point_triangle_distance(Vec3(2, 0, 0), a, b, c) == 1.0);
  CHECK(point_triangle_distance(Vec3(0.5, -2, 0), a, b, c) == 2.0);
  CHECK(point_triangle_distance(Vec3(0.25, 0.25, 0), {a, b, c}) == 0.0);
  CHECK_THROWS_AS(point_triangle_distance(Vec3::Zero(), a, b, Vec3(2, 0, 0)), DegenerateTriangle);
}

TEST_CASE("point-triangle distance against dense sampling") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> tri(0.0, 0.05), pt(-0.025, 0.075);
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const Vec3 a(tri(rng), tri(rng), tri(rng)), b(tri(rng), tri(rng), tri(rng)), c(tri(rng), tri(rng), tri(rng));
    if ((b - a).cross(c - a).norm() < 1e-6) continue;
    const Vec3 p(pt(rng), pt(rng), pt(rng));
    const double d = point_triangle_distance(p, a, b, c);
    const double dense = oracle::dense_triangle_distance(p, a, b, c);
    worst = std::max(worst, std::abs(d - dense));
    CHECK(d <= dense + 1e-12);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("point-triangle distance is symmetric in vertex order") {
  std::mt19937_64 rng(72);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a(n(rng), n(rng), n(rng)), b(n(rng), n(rng), n(rng)), c(n(rng), n(rng), n(rng));
    const Vec3 p(n(rng), n(rng), n(rng));
    const double d = point_triangle_distance(p, a, b, c);
    CHECK(std::abs(point_triangle_distance(p, b, c, a) - d) < 1e-12);
    CHECK(std::abs(point_triangle_distance(p, c, b, a) - d) < 1e-12);
    CHECK(std::abs(point_triangle_distance(p, a, c, b) - d) < 1e-12);
    CHECK(std::abs((closest_point_on_triangle(p, a, b, c) - p).norm() - d) < 1e-15);
  }
}

TEST_CASE("poisson sampling") {
  const TriangleMesh sq = square(0.0);
  SUBCASE("single sample lies on the mesh") {
    const auto s = poisson_sample(sq, 1, 3);
    REQUIRE(s.size() == 1);
    CHECK(std::abs(s[0].barycentric.sum() - 1.0) < 1e-9);
    CHECK((s[0].barycentric.array() >= 0.0).all());
    const auto& t = sq.triangles[s[0].triangle];
    const Vec3 p = s[0].barycentric[0] * sq.vertices[t[0]] + s[0].barycentric[1] * sq.vertices[t[1]] +
                   s[0].barycentric[2] * sq.vertices[t[2]];
    CHECK((p - s[0].point).norm() < 1e-12);
  }
  SUBCASE("spacing over 20 seeds") {
    const double r = poisson_disk_radius(sq.area(), 100);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto s = poisson_sample(sq, 100, seed);
      REQUIRE(s.size() == 100);
      double closest = 1e9;
      for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = i + 1; j < s.size(); ++j)
          closest = std::min(closest, (s[i].point - s[j].point).norm());
      CHECK(closest >= 0.5 * r);
    }
  }
  SUBCASE("determinism and membership") {
    const TriangleMesh capsule = capsule_mesh(0.03, 0.008, 16);
    const auto a = poisson_sample(capsule, 100, 9);
    const auto b = poisson_sample(capsule, 100, 9);
    const auto c = poisson_sample(capsule, 100, 10);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].point == b[i].point);
      differs |= a[i].point != c[i].point;
      CHECK(std::abs(a[i].barycentric.sum() - 1.0) < 1e-9);
    }
    CHECK(differs);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(poisson_sample(TriangleMesh{}, 5, 1), EmptyMesh);
    CHECK_THROWS_AS(poisson_sample(sq, 0, 1), std::invalid_argument);
  }
}

TEST_CASE("surface distance properties") {
  const TriangleMesh capsule = capsule_mesh(0.04, 0.01, 16, CapsulePart::palmar);
  CHECK(surface_distance(surface(capsule), surface(capsule), 100, 1) < 1e-9);

  const double planes = surface_distance(surface(square(0.01)), surface(square(0.0)), 100, 2);
  CHECK(std::abs(planes - 0.01) < 1e-6);

  const double d = 5.0;
  const Transform far = Transform::from_translation(Vec3(0, 0, d));
  const double far_value = surface_distance(surface(capsule), surface(capsule.transformed(far)), 100, 3);
  CHECK(std::abs(far_value - d) < 0.05 * d);

  std::mt19937_64 rng(73);
  const Transform bent(oracle::random_rotation(rng), Vec3(0.003, 0.01, -0.002));
  const TriangleMesh other = capsule.transformed(bent);
  const Transform shift = Transform::from_translation(Vec3(0.25, -0.5, 0.125));
  const double base = surface_distance(surface(capsule), surface(other), 100, 4);
  const double shifted =
      surface_distance(surface(capsule.transformed(shift)), surface(other.transformed(shift)), 100, 4);
  CHECK(std::abs(base - shifted) < 1e-12);

  const double grid = surface_distance(surface(capsule), surface(other), 100, 4, DistanceMethod::grid);
  CHECK(std::abs(grid - base) <= 1e-12);
}

TEST_CASE("grid query equals brute force") {
  const TriangleMesh capsule = capsule_mesh(0.05, 0.01, 24);
  const TriangleGrid grid(capsule);
  const TriangleGrid coarse(capsule, 0.02);
  std::mt19937_64 rng(74);
  std::uniform_real_distribution<double> u(-0.1, 0.15);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 p(u(rng), u(rng), u(rng));
    const double brute = min_distance_to_mesh(p, capsule);
    CHECK(grid.min_distance(p) == brute);
    CHECK(coarse.min_distance(p) == brute);
  }
}

TEST_CASE("timing stats") {
  const std::vector<double> two{0.005, 0.010};
  const TimingStats s = timing_stats(two);
  CHECK(s.mean_hz == doctest::Approx(150.0));
  CHECK(s.min_hz == doctest::Approx(100.0));
  CHECK(s.frames == 2);

  const std::vector<double> uniform(100, 0.01);
  const TimingStats u = timing_stats(uniform);
  CHECK(u.mean_hz == doctest::Approx(100.0));
  CHECK(u.min_hz == doctest::Approx(100.0));

  std::vector<double> outlier(99, 0.01);
  outlier.push_back(1.0);
  const TimingStats o = timing_stats(outlier);
  CHECK(o.min_hz == doctest::Approx(1.0));
  CHECK(o.min_hz <= o.mean_hz);

  CHECK_THROWS_AS(timing_stats(std::vector<double>{}), EmptyInput);
  CHECK_THROWS_AS(timing_stats(std::vector<double>{0.01, 0.0}), NonPositiveDuration);
}

TEST_CASE("contact surfaces of the clone coincide with the hand model") {
  const HandShape shape = load_hand_shape_file(testenv::config_path("hand_model.json"));
  const RecordConfig record = load_record_config_file(testenv::config_path("record.json"), shape);
  const RobotHandModel clone = make_hand_model_clone(record);
  FingerAngles q;
  q << 0.4, 0.1, -0.05, 0.7, 0.0, 0.1, 0.3, -0.1, 0.0;
  for (FingerId f : kFingers) {
    const FingerAngles qf = q.cwiseMax(record.finger(f).q_min).cwiseMin(record.finger(f).q_max);
    std::map<std::string, double> values;
    const auto& ch = clone.finger(f).channels;
    for (std::size_t k = 0; k < ch.size(); ++k) values[ch[k]] = qf[static_cast<Eigen::Index>(k)];
    const ContactSurface robot = robot_contact_surface(clone, f, values);
    const ContactSurface model = model_contact_surface(shape, f, qf);
    CHECK(robot.finger == f);
    CHECK(surface_distance(robot, model, 100, 5) < 1e-9);
  }
}

}  // TEST_SUITE
