#include "handemb/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "handemb/errors.hpp"
#include "json_io.hpp"

namespace handemb {

using detail::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

FingerAngles as_angles(const json& j, const std::string& ctx) {
  FingerAngles out;
  if (j.is_number()) {
    out.setConstant(detail::as_number(j, ctx));
    return out;
  }
  auto v = detail::as_numbers(j, ctx);
  if (v.size() != kFingerDof) throw SchemaError(ctx + ": expected 9 numbers");
  for (int k = 0; k < kFingerDof; ++k) out[k] = v[k];
  return out;
}

boxopt::SolveOptions solve_options_from(const json& j, const std::string& ctx) {
  boxopt::SolveOptions o;
  if (!j.is_object()) throw SchemaError(ctx + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    const std::string kctx = ctx + "." + key;
    if (key == "max_iterations") {
      if (!value.is_number_integer()) throw SchemaError(kctx + ": expected an integer");
      o.max_iterations = value.get<int>();
    } else if (key == "gradient_step") {
      o.gradient_step = detail::as_number(value, kctx);
    } else if (key == "objective_tolerance") {
      o.objective_tolerance = detail::as_number(value, kctx);
    } else if (key == "step_tolerance") {
      o.step_tolerance = detail::as_number(value, kctx);
    } else if (key == "initial_step") {
      o.initial_step = detail::as_number(value, kctx);
    } else if (key == "history") {
      if (!value.is_number_integer()) throw SchemaError(kctx + ": expected an integer");
      o.history = value.get<int>();
    } else {
      throw SchemaError(kctx + ": unknown solver option");
    }
  }
  try {
    o.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(ctx + ": " + e.what());
  }
  return o;
}

json json_of(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

HandShape load_hand_shape(std::istream& in) {
  const std::string ctx = "hand shape";
  json doc = detail::parse_json(in, ctx);
  detail::check_schema_version(doc, 1, ctx);
  Beta beta = Beta::Zero();
  if (doc.contains("beta")) {
    auto b = detail::as_numbers(doc["beta"], ctx + ".beta");
    if (b.size() != kShapeSize) throw SchemaError(ctx + ".beta: expected 10 numbers");
    for (int i = 0; i < kShapeSize; ++i) beta[i] = b[i];
  }
  const json& fingers = detail::require(doc, "fingers", ctx);
  std::array<FingerShapeBasis, 5> basis{};
  for (FingerId f : kFingers) {
    const std::string name(finger_name(f));
    const std::string fctx = ctx + ".fingers." + name;
    const json& e = detail::require(fingers, name.c_str(), ctx + ".fingers");
    FingerShapeBasis& b = basis[finger_slot(f)];
    if (e.contains("base_rotation")) {
      b.base_rotation = detail::as_pose(json{{"rotation", e["base_rotation"]}}, fctx).rotation();
    } else if (e.contains("base_rpy")) {
      b.base_rotation =
          Transform::from_xyz_rpy(Vec3::Zero(), detail::as_vec3(e["base_rpy"], fctx + ".base_rpy"))
              .rotation();
    }
    auto mean = detail::as_numbers(detail::require(e, "mean", fctx), fctx + ".mean");
    if (mean.size() != 9) throw SchemaError(fctx + ".mean: expected 9 numbers");
    for (int i = 0; i < 9; ++i) b.mean[i] = mean[i];
    b.coefficients.setZero();
    if (e.contains("coefficients")) {
      const json& c = e["coefficients"];
      if (!c.is_array() || c.size() != 9) throw SchemaError(fctx + ".coefficients: expected 9 rows");
      for (int i = 0; i < 9; ++i) {
        auto row = detail::as_numbers(c[i], fctx + ".coefficients");
        if (row.size() != kShapeSize)
          throw SchemaError(fctx + ".coefficients: rows need 10 entries");
        for (int k = 0; k < kShapeSize; ++k) b.coefficients(i, k) = row[k];
      }
    }
    if (e.contains("markers")) {
      const json& m = e["markers"];
      if (!m.is_array() || m.size() != 2) throw SchemaError(fctx + ".markers: expected [mid, tip]");
      for (int j = 0; j < 2; ++j) {
        const json& mj = m[j];
        const json& seg = detail::require(mj, "segment", fctx + ".markers");
        if (!seg.is_number_integer()) throw SchemaError(fctx + ".markers.segment: expected an integer");
        b.markers[j].segment = seg.get<int>();
        b.markers[j].fraction =
            detail::as_number(detail::require(mj, "fraction", fctx + ".markers"), fctx);
        b.markers[j].dorsal = mj.contains("dorsal") ? detail::as_number(mj["dorsal"], fctx) : 0.0;
      }
    }
  }
  return HandShape(beta, basis);
}

HandShape load_hand_shape_file(const std::string& path) {
  std::istringstream in(read_file(path));
  return load_hand_shape(in);
}

void write_hand_shape(const HandShape& shape, std::ostream& out) {
  json doc;
  doc["schema_version"] = 1;
  doc["beta"] = json_of(shape.beta());
  json fingers = json::object();
  for (FingerId f : kFingers) {
    const FingerShapeBasis& b = shape.basis()[finger_slot(f)];
    json rows = json::array();
    for (int i = 0; i < 3; ++i) rows.push_back(detail::vec3_json(b.base_rotation.row(i).transpose()));
    json coeff = json::array();
    for (int i = 0; i < 9; ++i) coeff.push_back(json_of(b.coefficients.row(i).transpose()));
    json markers = json::array();
    for (const auto& m : b.markers)
      markers.push_back({{"segment", m.segment}, {"fraction", m.fraction}, {"dorsal", m.dorsal}});
    fingers[std::string(finger_name(f))] = {{"base_rotation", rows},
                                            {"mean", json_of(b.mean)},
                                            {"coefficients", coeff},
                                            {"markers", markers}};
  }
  doc["fingers"] = std::move(fingers);
  out << doc.dump(2) << '\n';
}

boxopt::SolveOptions parse_solve_options(const std::string& json_text) {
  std::istringstream in(json_text);
  return solve_options_from(detail::parse_json(in, "solver options"), "solver");
}

RecordConfig load_record_config(std::istream& in, const HandShape& shape) {
  const std::string ctx = "record config";
  json doc = detail::parse_json(in, ctx);
  detail::check_schema_version(doc, 1, ctx);
  RecordConfig config;
  config.shape = shape;
  config.t_hand_model = detail::as_pose(detail::require(doc, "t_hand_model", ctx), ctx + ".t_hand_model");
  FingerRecordConfig shared = default_finger_record_config();
  if (doc.contains("w_plus")) shared.w_plus = as_angles(doc["w_plus"], ctx + ".w_plus");
  if (doc.contains("w_minus")) shared.w_minus = as_angles(doc["w_minus"], ctx + ".w_minus");
  if (doc.contains("q_min")) shared.q_min = as_angles(doc["q_min"], ctx + ".q_min");
  if (doc.contains("q_max")) shared.q_max = as_angles(doc["q_max"], ctx + ".q_max");
  for (auto& fc : config.fingers) fc = shared;
  if (doc.contains("fingers")) {
    const json& ff = doc["fingers"];
    if (!ff.is_object()) throw SchemaError(ctx + ".fingers: expected an object");
    for (const auto& [name, e] : ff.items()) {
      auto f = finger_from_name(name);
      if (!f) throw SchemaError(ctx + ".fingers: unknown finger '" + name + "'");
      FingerRecordConfig& fc = config.fingers[finger_slot(*f)];
      const std::string fctx = ctx + ".fingers." + name;
      if (e.contains("w_plus")) fc.w_plus = as_angles(e["w_plus"], fctx + ".w_plus");
      if (e.contains("w_minus")) fc.w_minus = as_angles(e["w_minus"], fctx + ".w_minus");
      if (e.contains("q_min")) fc.q_min = as_angles(e["q_min"], fctx + ".q_min");
      if (e.contains("q_max")) fc.q_max = as_angles(e["q_max"], fctx + ".q_max");
    }
  }
  if (doc.contains("solver")) config.solver = solve_options_from(doc["solver"], ctx + ".solver");
  if (doc.contains("restart_residual")) {
    const json& r = doc["restart_residual"];
    config.restart_residual = r.is_null() ? std::numeric_limits<double>::infinity()
                                          : detail::as_number(r, ctx + ".restart_residual");
  }
  config.validate();
  return config;
}

RecordConfig load_record_config_file(const std::string& path, const HandShape& shape) {
  std::istringstream in(read_file(path));
  return load_record_config(in, shape);
}

EmbodimentConfig load_embodiment_config_file(const std::string& path) {
  std::istringstream in(read_file(path));
  json doc = detail::parse_json(in, path);
  detail::check_schema_version(doc, 1, path);
  EmbodimentConfig config;
  const std::string hand_path = detail::resolve_path(
      detail::parent_directory(path), detail::as_string(detail::require(doc, "hand", path), path + ".hand"));
  config.hand = load_hand_config_file(hand_path);
  if (doc.contains("t_robot_model"))
    config.t_robot_model = detail::as_pose(doc["t_robot_model"], path + ".t_robot_model");
  if (doc.contains("solver")) config.solver = solve_options_from(doc["solver"], path + ".solver");
  if (doc.contains("restart_residual") && !doc["restart_residual"].is_null()) {
    config.restart_residual = detail::as_number(doc["restart_residual"], path + ".restart_residual");
    if (!(config.restart_residual >= 0.0)) throw SchemaError(path + ".restart_residual: must be non-negative");
  }
  return config;
}

const EmbodimentConfig& PipelineConfig::embodiment(const std::string& hand) const {
  auto it = embodiments.find(hand.empty() ? default_hand : hand);
  if (it == embodiments.end()) throw SchemaError("no embodiment configured for hand '" + hand + "'");
  return it->second;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  json doc = detail::parse_json(in, path);
  detail::check_schema_version(doc, 1, path);
  const std::string dir = detail::parent_directory(path);
  auto ref = [&](const char* key) {
    return detail::resolve_path(dir, detail::as_string(detail::require(doc, key, path), path + "." + key));
  };

  PipelineConfig config;
  config.path = path;
  config.digests["pipeline"] = digest_hex(text);
  const std::string shape_path = ref("shape");
  config.shape = load_hand_shape_file(shape_path);
  config.digests["shape"] = file_digest(shape_path);
  const std::string record_path = ref("record");
  config.record = load_record_config_file(record_path, config.shape);
  config.digests["record"] = file_digest(record_path);

  const json& emb = detail::require(doc, "embodiments", path);
  if (!emb.is_object() || emb.empty())
    throw SchemaError(path + ".embodiments: expected a non-empty object");
  for (const auto& [name, value] : emb.items()) {
    const std::string p = detail::resolve_path(dir, detail::as_string(value, path + ".embodiments." + name));
    config.embodiments.emplace(name, load_embodiment_config_file(p));
    config.digests["embodiment:" + name] = file_digest(p);
  }
  config.default_hand = doc.contains("default_hand")
                            ? detail::as_string(doc["default_hand"], path + ".default_hand")
                            : config.embodiments.begin()->first;
  if (!config.embodiments.count(config.default_hand))
    throw DanglingReference(path + ": default_hand '" + config.default_hand + "' is not configured");

  if (doc.contains("io")) {
    const json& io = doc["io"];
    if (io.contains("max_gap")) {
      if (!io["max_gap"].is_number_unsigned()) throw SchemaError(path + ".io.max_gap: expected a count");
      config.max_gap = io["max_gap"].get<std::size_t>();
    }
    if (io.contains("seed")) {
      if (!io["seed"].is_number_unsigned()) throw SchemaError(path + ".io.seed: expected a count");
      config.seed = io["seed"].get<std::uint64_t>();
    }
    if (io.contains("label_map")) {
      if (!io["label_map"].is_object()) throw SchemaError(path + ".io.label_map: expected an object");
      for (const auto& [k, v] : io["label_map"].items())
        config.label_map.emplace(k, detail::as_string(v, path + ".io.label_map"));
    }
  }
  return config;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string file_digest(const std::string& path) { return digest_hex(read_file(path)); }

}  // namespace handemb
