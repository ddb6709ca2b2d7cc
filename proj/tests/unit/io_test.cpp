#include <doctest.h>

#include <random>
#include <sstream>

#include <json.hpp>

#include "handemb/config_io.hpp"
#include "handemb/errors.hpp"
#include "handemb/synthetic.hpp"
#include "handemb/trajectory_io.hpp"
#include "oracles.hpp"

using namespace handemb;
using nlohmann::json;

namespace {

const PipelineConfig& pipeline() {
  static const PipelineConfig p = load_pipeline_config(testenv::config_path("pipeline.json"));
  return p;
}

HandStateTrajectory random_states(std::uint64_t seed, std::size_t n) {
  HandStateTrajectory t;
  t.provenance.source = "synthetic";
  t.provenance.config_digests = {{"record", "0123456789abcdef"}};
  for (const auto& s : random_hand_states(pipeline().record, n, 120.0, seed)) t.frames.push_back(s);
  return t;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("pipeline config loads everything it references") {
  const PipelineConfig& p = pipeline();
  CHECK(p.default_hand == "mia");
  CHECK(p.max_gap == 10);
  CHECK(p.seed == 7);
  CHECK(p.embodiments.size() == 4);
  CHECK(p.embodiment("shadow").hand.command_channels().size() == 20);
  CHECK_THROWS_AS(p.embodiment("allegro"), Error);
  CHECK(p.digests.count("shape") == 1);
  CHECK(p.digests.at("shape") == file_digest(testenv::config_path("hand_model.json")));
  CHECK(p.record.restart_residual == 1e-4);
}

TEST_CASE("pipeline config errors") {
  const std::string dir = testenv::scratch_dir("pipeline_errors");
  json doc = json::parse(testenv::read_file(testenv::config_path("pipeline.json")));
  doc["shape"] = testenv::config_path("hand_model.json");
  doc["record"] = testenv::config_path("record.json");
  for (auto& [k, v] : doc["embodiments"].items()) v = testenv::config_path(v.get<std::string>());
  testenv::write_file(dir + "/ok.json", doc.dump());
  CHECK_NOTHROW(load_pipeline_config(dir + "/ok.json"));

  json missing = doc;
  missing["record"] = dir + "/nope.json";
  testenv::write_file(dir + "/missing.json", missing.dump());
  CHECK_THROWS_AS(load_pipeline_config(dir + "/missing.json"), SchemaError);

  json bad_default = doc;
  bad_default["default_hand"] = "allegro";
  testenv::write_file(dir + "/default.json", bad_default.dump());
  CHECK_THROWS_AS(load_pipeline_config(dir + "/default.json"), Error);

  testenv::write_file(dir + "/garbage.json", "{ not json");
  CHECK_THROWS_AS(load_pipeline_config(dir + "/garbage.json"), SchemaError);
}

TEST_CASE("hand shape round trip") {
  const HandShape& shape = pipeline().shape;
  std::ostringstream out;
  write_hand_shape(shape, out);
  std::istringstream in(out.str());
  const HandShape back = load_hand_shape(in);
  CHECK(back.beta() == shape.beta());
  for (FingerId f : kFingers) {
    const auto& a = shape.basis()[finger_slot(f)];
    const auto& b = back.basis()[finger_slot(f)];
    CHECK(a.base_rotation == b.base_rotation);
    CHECK(a.mean == b.mean);
    CHECK(a.coefficients == b.coefficients);
    CHECK(a.markers[0].fraction == b.markers[0].fraction);
  }
}

TEST_CASE("record config options") {
  const HandShape& shape = pipeline().shape;
  json doc = json::parse(testenv::read_file(testenv::config_path("record.json")));
  doc["restart_residual"] = nullptr;
  doc["solver"]["max_iterations"] = 42;
  std::istringstream in(doc.dump());
  const RecordConfig c = load_record_config(in, shape);
  CHECK(std::isinf(c.restart_residual));
  CHECK(c.solver.max_iterations == 42);
  CHECK(c.finger(FingerId::index).w_plus[0] == 0.001);

  json bad = doc;
  bad["solver"]["max_iterations"] = -1;
  std::istringstream in2(bad.dump());
  CHECK_THROWS(load_record_config(in2, shape));
  json unknown = doc;
  unknown["fingers"]["sixth"] = json::object();
  std::istringstream in3(unknown.dump());
  CHECK_THROWS_AS(load_record_config(in3, shape), SchemaError);
  json short_bounds = doc;
  short_bounds["q_min"] = {0.0, 0.1};
  std::istringstream in4(short_bounds.dump());
  CHECK_THROWS_AS(load_record_config(in4, shape), SchemaError);
}

TEST_CASE("hand-state trajectory round trip is exact") {
  const HandStateTrajectory t = random_states(81, 25);
  std::ostringstream out;
  write_trajectory(t, out);
  std::istringstream kind(out.str());
  CHECK(read_trajectory_kind(kind) == TrajectoryKind::hand_state);
  std::istringstream in(out.str());
  const HandStateTrajectory back = read_hand_state_trajectory(in);
  CHECK(back == t);
  std::ostringstream again;
  write_trajectory(back, again);
  CHECK(again.str() == out.str());
}

TEST_CASE("robot-command trajectory round trip is exact") {
  const HandStateTrajectory states = random_states(82, 10);
  const EmbodimentConfig& c = pipeline().embodiment("mia");
  RobotCommandTrajectory t;
  t.hand = "mia";
  t.provenance.source = "states.json";
  std::optional<RobotCommand> prev;
  for (const auto& f : states.frames) {
    prev = embody_frame(f.state, pipeline().shape, c, prev, f.timestamp);
    t.frames.push_back(*prev);
  }
  std::ostringstream out;
  write_trajectory(t, out);
  std::istringstream in(out.str());
  const RobotCommandTrajectory back = read_robot_command_trajectory(in);
  CHECK(back == t);
  std::istringstream kind(out.str());
  CHECK(read_trajectory_kind(kind) == TrajectoryKind::robot_command);
}

TEST_CASE("trajectory errors") {
  const HandStateTrajectory t = random_states(83, 3);
  std::ostringstream out;
  write_trajectory(t, out);
  std::istringstream wrong_kind(out.str());
  CHECK_THROWS_AS(read_robot_command_trajectory(wrong_kind), SchemaError);

  json doc = json::parse(out.str());
  doc["frames"][2]["t"] = doc["frames"][0]["t"];
  std::istringstream nonmono(doc.dump());
  CHECK_THROWS_AS(read_hand_state_trajectory(nonmono), NonMonotoneTimestamps);

  json version = json::parse(out.str());
  version["schema_version"] = 7;
  std::istringstream v(version.dump());
  CHECK_THROWS_AS(read_hand_state_trajectory(v), SchemaError);

  json angles = json::parse(out.str());
  angles["frames"][0]["finger_angles"].erase(0);
  std::istringstream a(angles.dump());
  CHECK_THROWS_AS(read_hand_state_trajectory(a), SchemaError);

  std::istringstream junk("[]");
  CHECK_THROWS_AS(read_trajectory_kind(junk), SchemaError);
}

TEST_CASE("quaternions are normalized on ingest") {
  const HandStateTrajectory t = random_states(84, 1);
  std::ostringstream out;
  write_trajectory(t, out);
  json doc = json::parse(out.str());
  json& pose = doc["frames"][0]["pose"];
  pose.erase("rotation");
  for (auto& v : pose["quaternion"]) v = 3.0 * v.get<double>();
  std::istringstream in(doc.dump());
  const HandStateTrajectory back = read_hand_state_trajectory(in);
  CHECK(is_rotation(back.frames[0].state.pose.rotation(), 1e-12));
  CHECK(rotation_distance(back.frames[0].state.pose.rotation(), t.frames[0].state.pose.rotation()) < 1e-12);
}

TEST_CASE("digests") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(digest_hex("a") == "af63dc4c8601ec8c");
  CHECK_THROWS_AS(file_digest("/nonexistent/file"), SchemaError);
}

TEST_CASE("synthetic data") {
  const RecordConfig& c = pipeline().record;
  const auto a = synthetic_motion(c, 50, 100.0, 9);
  const auto b = synthetic_motion(c, 50, 100.0, 9);
  REQUIRE(a.size() == 50);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].state == b[i].state);
    CHECK(a[i].timestamp == doctest::Approx(0.01 * static_cast<double>(i)));
    for (FingerId f : kFingers) {
      CHECK((a[i].state.q(f).array() >= c.finger(f).q_min.array()).all());
      CHECK((a[i].state.q(f).array() <= c.finger(f).q_max.array()).all());
    }
  }
  // the glove layout yields an identity hand frame
  GloveLayout layout;
  MarkerFrame f;
  f[MarkerLabel::hand_front] = layout.front;
  f[MarkerLabel::hand_left] = layout.left;
  f[MarkerLabel::hand_right] = layout.right;
  const Transform hand = estimate_hand_frame(f);
  CHECK((hand.rotation() - Mat3::Identity()).norm() < 1e-15);
  CHECK(hand.translation().norm() < 1e-15);

  std::mt19937_64 rng(10);
  const HandState s = random_hand_state(c, rng);
  const MarkerFrame m = markers_from_state(s, c, 0.5);
  const auto expected = hand_markers(c.shape, s);
  CHECK(*m[MarkerLabel::little_tip] == expected[finger_slot(FingerId::little)][1]);
  CHECK(m.timestamp == 0.5);
}

}  // TEST_SUITE
