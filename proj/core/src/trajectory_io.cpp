#include "handemb/trajectory_io.hpp"

#include <istream>
#include <ostream>

#include "handemb/errors.hpp"
#include "json_io.hpp"

namespace handemb {

using detail::json;

bool operator==(const HandState& a, const HandState& b) {
  return a.pose == b.pose && a.finger_q == b.finger_q;
}

bool operator==(const HandStateTrajectory& a, const HandStateTrajectory& b) {
  if (!(a.provenance == b.provenance) || a.frames.size() != b.frames.size()) return false;
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    if (a.frames[i].timestamp != b.frames[i].timestamp || !(a.frames[i].state == b.frames[i].state))
      return false;
  }
  return true;
}

bool operator==(const RobotCommandTrajectory& a, const RobotCommandTrajectory& b) {
  return a.provenance == b.provenance && a.hand == b.hand && a.frames == b.frames;
}

namespace {

constexpr int kSchemaVersion = 1;

const char* kind_name(TrajectoryKind k) {
  return k == TrajectoryKind::hand_state ? "hand_state" : "robot_command";
}

json provenance_json(const Provenance& p) {
  return {{"source", p.source}, {"config_digests", p.config_digests}};
}

Provenance provenance_from(const json& doc) {
  Provenance p;
  if (!doc.contains("provenance")) return p;
  const json& j = doc["provenance"];
  if (j.contains("source")) p.source = detail::as_string(j["source"], "provenance.source");
  if (j.contains("config_digests")) {
    if (!j["config_digests"].is_object()) throw SchemaError("provenance.config_digests: expected an object");
    for (const auto& [k, v] : j["config_digests"].items())
      p.config_digests.emplace(k, detail::as_string(v, "provenance.config_digests"));
  }
  return p;
}

json read_document(std::istream& in, TrajectoryKind expected) {
  json doc = detail::parse_json(in, "trajectory");
  detail::check_schema_version(doc, kSchemaVersion, "trajectory");
  const std::string kind = detail::as_string(detail::require(doc, "kind", "trajectory"), "trajectory.kind");
  if (kind != kind_name(expected))
    throw SchemaError("trajectory kind is '" + kind + "', expected '" + kind_name(expected) + "'");
  if (!detail::require(doc, "frames", "trajectory").is_array())
    throw SchemaError("trajectory.frames: expected an array");
  return doc;
}

double frame_time(const json& f, std::size_t i, double previous) {
  const std::string ctx = "trajectory.frames[" + std::to_string(i) + "]";
  double t = detail::as_number(detail::require(f, "t", ctx), ctx + ".t");
  if (i > 0 && !(t > previous)) throw NonMonotoneTimestamps(ctx + ": timestamps must increase");
  return t;
}

json value_map_json(const std::map<std::string, double>& m) {
  json out = json::object();
  for (const auto& [k, v] : m) out[k] = v;
  return out;
}

std::map<std::string, double> value_map_from(const json& j, const std::string& ctx) {
  if (!j.is_object()) throw SchemaError(ctx + ": expected an object");
  std::map<std::string, double> out;
  for (const auto& [k, v] : j.items()) out.emplace(k, detail::as_number(v, ctx + "." + k));
  return out;
}

}  // namespace

TrajectoryKind read_trajectory_kind(std::istream& in) {
  json doc = detail::parse_json(in, "trajectory");
  detail::check_schema_version(doc, kSchemaVersion, "trajectory");
  const std::string kind = detail::as_string(detail::require(doc, "kind", "trajectory"), "trajectory.kind");
  if (kind == "hand_state") return TrajectoryKind::hand_state;
  if (kind == "robot_command") return TrajectoryKind::robot_command;
  throw SchemaError("unknown trajectory kind '" + kind + "'");
}

void write_trajectory(const HandStateTrajectory& t, std::ostream& out) {
  json frames = json::array();
  for (const auto& f : t.frames) {
    json angles = json::array();
    for (FingerId id : kFingers) {
      for (int k = 0; k < kFingerDof; ++k) angles.push_back(f.state.q(id)[k]);
    }
    frames.push_back({{"t", f.timestamp}, {"pose", detail::pose_json(f.state.pose)}, {"finger_angles", angles}});
  }
  json doc{{"schema_version", kSchemaVersion},
           {"kind", kind_name(TrajectoryKind::hand_state)},
           {"provenance", provenance_json(t.provenance)},
           {"frames", frames}};
  out << doc.dump(1) << '\n';
}

void write_trajectory(const RobotCommandTrajectory& t, std::ostream& out) {
  json frames = json::array();
  for (const auto& f : t.frames) {
    json residuals = json::object();
    for (const auto& [id, r] : f.residuals) residuals[std::string(finger_name(id))] = r;
    frames.push_back({{"t", f.timestamp},
                      {"base_pose", detail::pose_json(f.base_pose)},
                      {"actuated", value_map_json(f.actuated_values)},
                      {"fixed", value_map_json(f.fixed_values)},
                      {"residuals", residuals}});
  }
  json doc{{"schema_version", kSchemaVersion},
           {"kind", kind_name(TrajectoryKind::robot_command)},
           {"hand", t.hand},
           {"provenance", provenance_json(t.provenance)},
           {"frames", frames}};
  out << doc.dump(1) << '\n';
}

HandStateTrajectory read_hand_state_trajectory(std::istream& in) {
  json doc = read_document(in, TrajectoryKind::hand_state);
  HandStateTrajectory t;
  t.provenance = provenance_from(doc);
  const json& frames = doc["frames"];
  double previous = 0.0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const json& f = frames[i];
    const std::string ctx = "trajectory.frames[" + std::to_string(i) + "]";
    TimedHandState s;
    s.timestamp = previous = frame_time(f, i, previous);
    s.state.pose = detail::as_pose(detail::require(f, "pose", ctx), ctx + ".pose");
    auto angles = detail::as_numbers(detail::require(f, "finger_angles", ctx), ctx + ".finger_angles");
    if (angles.size() != 45) throw SchemaError(ctx + ".finger_angles: expected 45 numbers");
    for (FingerId id : kFingers) {
      for (int k = 0; k < kFingerDof; ++k) s.state.q(id)[k] = angles[finger_slot(id) * kFingerDof + k];
    }
    t.frames.push_back(std::move(s));
  }
  return t;
}

RobotCommandTrajectory read_robot_command_trajectory(std::istream& in) {
  json doc = read_document(in, TrajectoryKind::robot_command);
  RobotCommandTrajectory t;
  t.provenance = provenance_from(doc);
  if (doc.contains("hand")) t.hand = detail::as_string(doc["hand"], "trajectory.hand");
  const json& frames = doc["frames"];
  double previous = 0.0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const json& f = frames[i];
    const std::string ctx = "trajectory.frames[" + std::to_string(i) + "]";
    RobotCommand c;
    c.timestamp = previous = frame_time(f, i, previous);
    c.base_pose = detail::as_pose(detail::require(f, "base_pose", ctx), ctx + ".base_pose");
    c.actuated_values = value_map_from(detail::require(f, "actuated", ctx), ctx + ".actuated");
    if (f.contains("fixed")) c.fixed_values = value_map_from(f["fixed"], ctx + ".fixed");
    if (f.contains("residuals")) {
      for (const auto& [k, v] : value_map_from(f["residuals"], ctx + ".residuals")) {
        auto id = finger_from_name(k);
        if (!id) throw SchemaError(ctx + ".residuals: unknown finger '" + k + "'");
        if (!(v >= 0.0)) throw SchemaError(ctx + ".residuals: negative residual");
        c.residuals.emplace(*id, v);
      }
    }
    t.frames.push_back(std::move(c));
  }
  return t;
}

}  // namespace handemb
