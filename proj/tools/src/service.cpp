#include "handemb/app/service.hpp"

#include <cmath>
#include <numbers>

#include "handemb/errors.hpp"

namespace handemb::app {

using nlohmann::json;

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json pose_json(const Transform& t) {
  const Quat q = t.quaternion();
  return {{"translation", vec_json(t.translation())},
          {"quaternion", json::array({q.w(), q.x(), q.y(), q.z()})}};
}

HttpResponse error(int status, const std::string& message) {
  return {status, json{{"error", message}}.dump()};
}

Vec3 read_vec3(const json& body, const char* key) {
  if (!body.contains(key)) return Vec3::Zero();
  const json& v = body[key];
  if (!v.is_array() || v.size() != 3)
    throw std::invalid_argument(std::string(key) + " must have 3 entries, got " +
                                std::to_string(v.is_array() ? v.size() : 0));
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) throw std::invalid_argument(std::string(key) + " entries must be numbers");
    out[i] = v[i].get<double>();
  }
  if (!out.allFinite()) throw std::invalid_argument(std::string(key) + " must be finite");
  return out;
}

}  // namespace

EmbodimentService::EmbodimentService(PipelineConfig config) : config_(std::move(config)) {}

HttpResponse EmbodimentService::hands() const {
  json list = json::array();
  for (const auto& [id, emb] : config_.embodiments) {
    const RobotHandModel& hand = emb.hand;
    json channels = json::array();
    json fixed = json::object();
    for (const ChannelInfo& c : hand.channels()) {
      channels.push_back({{"name", c.name}, {"lower", c.lower}, {"upper", c.upper},
                          {"fixed", c.fixed}, {"neutral", c.neutral}});
      if (c.fixed) fixed[c.name] = c.neutral;
    }
    json fingers = json::array();
    for (const auto& [f, finger] : hand.spec().fingers) fingers.push_back(std::string(finger_name(f)));
    list.push_back({{"id", id},
                    {"name", hand.name()},
                    {"description", hand.spec().description},
                    {"actuated", hand.command_channels()},
                    {"channels", channels},
                    {"fixed", fixed},
                    {"fingers", fingers},
                    {"links", hand.tree().links()}});
  }
  json lower = json::array();
  json upper = json::array();
  for (FingerId f : kFingers) {
    const FingerRecordConfig& fc = config_.record.finger(f);
    for (int k = 0; k < kFingerDof; ++k) {
      lower.push_back(fc.q_min[k]);
      upper.push_back(fc.q_max[k]);
    }
  }
  json model{{"finger_angle_lower", lower},
             {"finger_angle_upper", upper},
             {"global_orientation_lower", -std::numbers::pi},
             {"global_orientation_upper", std::numbers::pi},
             {"parameter_count", HandState::kParameterCount}};
  return {200, json{{"hands", list}, {"default", config_.default_hand}, {"model", model}}.dump()};
}

json EmbodimentService::embody_json(const std::string& hand_id, const HandState& state,
                                    WarmStarts* warm) const {
  const EmbodimentConfig& emb = config_.embodiments.at(hand_id);
  const HandShape& shape = config_.shape;
  std::optional<RobotCommand> previous;
  if (warm) {
    if (auto it = warm->find(hand_id); it != warm->end()) previous = it->second;
  }
  const RobotCommand cmd = embody_frame(state, shape, emb, previous);
  if (warm) (*warm)[hand_id] = cmd;

  json actuated = json::object();
  for (const auto& [k, v] : cmd.actuated_values) actuated[k] = v;
  json fixed = json::object();
  for (const auto& [k, v] : cmd.fixed_values) fixed[k] = v;
  json residuals = json::object();
  for (const auto& [f, r] : cmd.residuals) residuals[std::string(finger_name(f))] = r;

  json model_markers = json::object();
  json model_skeleton = json::object();
  const auto markers = hand_markers(shape, state);
  for (FingerId f : kFingers) {
    const std::string name(finger_name(f));
    model_markers[name] = {vec_json(markers[finger_slot(f)][0]), vec_json(markers[finger_slot(f)][1])};
    const FingerGeometry& g = shape.finger(f);
    const auto frames = finger_segment_frames(g, state.q(f));
    json points = json::array({vec_json(state.pose.translation())});
    for (int s = 0; s < kSegments; ++s) points.push_back(vec_json(state.pose.apply(frames[s].translation())));
    points.push_back(vec_json(state.pose.apply(frames[kSegments - 1].apply(Vec3(0.0, g.lengths[kSegments - 1], 0.0)))));
    model_skeleton[name] = points;
  }

  std::map<std::string, double> values = cmd.actuated_values;
  values.insert(cmd.fixed_values.begin(), cmd.fixed_values.end());
  const auto poses = emb.hand.link_poses(values);
  json links = json::object();
  for (const auto& [link, pose] : poses) links[link] = pose_json(cmd.base_pose * pose);
  json robot_markers = json::object();
  for (const auto& [f, finger] : emb.hand.spec().fingers) {
    json pair = json::array();
    for (const auto& m : finger.markers) pair.push_back(vec_json(cmd.base_pose.apply(poses.at(m.link).apply(m.offset))));
    robot_markers[std::string(finger_name(f))] = pair;
  }
  return {{"hand", hand_id},
          {"base_pose", pose_json(cmd.base_pose)},
          {"actuated", actuated},
          {"fixed", fixed},
          {"residuals", residuals},
          {"model_markers", model_markers},
          {"model_skeleton", model_skeleton},
          {"robot_markers", robot_markers},
          {"link_poses", links}};
}

HttpResponse EmbodimentService::embody(const std::string& body, WarmStarts* warm) const {
  json request;
  try {
    request = json::parse(body);
  } catch (const json::parse_error&) {
    return error(400, "request body is not valid JSON");
  }
  if (!request.is_object()) return error(400, "request body must be an object");
  std::string hand = config_.default_hand;
  if (request.contains("hand")) {
    if (!request["hand"].is_string()) return error(400, "hand must be a string");
    hand = request["hand"].get<std::string>();
  }
  if (!config_.embodiments.count(hand)) return error(404, "unknown hand '" + hand + "'");

  HandState state;
  try {
    if (!request.contains("finger_angles")) throw std::invalid_argument("finger_angles is required");
    const json& fa = request["finger_angles"];
    if (!fa.is_array() || fa.size() != 45)
      throw std::invalid_argument("finger_angles must have 45 entries, got " +
                                  std::to_string(fa.is_array() ? fa.size() : 0));
    std::array<double, 45> angles{};
    for (std::size_t i = 0; i < 45; ++i) {
      if (!fa[i].is_number()) throw std::invalid_argument("finger_angles entries must be numbers");
      angles[i] = fa[i].get<double>();
      if (!std::isfinite(angles[i])) throw std::invalid_argument("finger_angles must be finite");
    }
    state = HandState::from_parameters(read_vec3(request, "translation"),
                                       read_vec3(request, "global_orientation"), angles);
  } catch (const std::invalid_argument& e) {
    return error(400, e.what());
  }
  try {
    return {200, embody_json(hand, state, warm).dump()};
  } catch (const Error& e) {
    return error(422, e.what());
  }
}

}  // namespace handemb::app
