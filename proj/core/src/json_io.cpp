#include "json_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>

#include "handemb/errors.hpp"

namespace handemb::detail {

json parse_json(std::istream& in, const std::string& context) {
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(context + ": invalid JSON: " + e.what());
  }
}

json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);
  return parse_json(in, path);
}

const json& require(const json& j, const char* key, const std::string& context) {
  if (!j.is_object()) throw SchemaError(context + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(context + ": missing field '" + key + "'");
  return *it;
}

double as_number(const json& j, const std::string& context) {
  if (!j.is_number()) throw SchemaError(context + ": expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(context + ": non-finite number");
  return v;
}

std::string as_string(const json& j, const std::string& context) {
  if (!j.is_string()) throw SchemaError(context + ": expected a string");
  return j.get<std::string>();
}

std::vector<double> as_numbers(const json& j, const std::string& context) {
  if (!j.is_array()) throw SchemaError(context + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_number(j[i], context + "[" + std::to_string(i) + "]"));
  return out;
}

Vec3 as_vec3(const json& j, const std::string& context) {
  auto v = as_numbers(j, context);
  if (v.size() != 3) throw SchemaError(context + ": expected 3 numbers");
  return {v[0], v[1], v[2]};
}

void check_schema_version(const json& j, int expected, const std::string& context) {
  const json& v = require(j, "schema_version", context);
  if (!v.is_number_integer() || v.get<int>() != expected)
    throw SchemaError(context + ": unsupported schema_version (expected " +
                      std::to_string(expected) + ")");
}

Transform as_pose(const json& j, const std::string& context) {
  if (!j.is_object()) throw SchemaError(context + ": expected a pose object");
  if (j.contains("xyz") || j.contains("rpy")) {
    Vec3 xyz = j.contains("xyz") ? as_vec3(j["xyz"], context + ".xyz") : Vec3::Zero();
    Vec3 rpy = j.contains("rpy") ? as_vec3(j["rpy"], context + ".rpy") : Vec3::Zero();
    return Transform::from_xyz_rpy(xyz, rpy);
  }
  Vec3 t = j.contains("translation") ? as_vec3(j["translation"], context + ".translation")
                                     : Vec3::Zero();
  if (j.contains("rotation")) {
    const json& r = j["rotation"];
    if (!r.is_array() || r.size() != 3) throw SchemaError(context + ".rotation: expected 3 rows");
    Mat3 m;
    for (int i = 0; i < 3; ++i) m.row(i) = as_vec3(r[i], context + ".rotation").transpose();
    try {
      return Transform::checked(m, t, 1e-6);
    } catch (const Error& e) {
      throw SchemaError(context + ".rotation: " + e.what());
    }
  }
  if (j.contains("quaternion")) {
    auto q = as_numbers(j["quaternion"], context + ".quaternion");
    if (q.size() != 4) throw SchemaError(context + ".quaternion: expected [w, x, y, z]");
    try {
      return Transform::from_quaternion(Quat(q[0], q[1], q[2], q[3]), t);
    } catch (const Error& e) {
      throw SchemaError(context + ".quaternion: " + e.what());
    }
  }
  return Transform::from_translation(t);
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json pose_json(const Transform& t) {
  Quat q = t.quaternion();
  json rotation = json::array();
  for (int i = 0; i < 3; ++i) rotation.push_back(vec3_json(t.rotation().row(i).transpose()));
  return json{{"translation", vec3_json(t.translation())},
              {"quaternion", json::array({q.w(), q.x(), q.y(), q.z()})},
              {"rotation", rotation}};
}

std::string parent_directory(const std::string& path) {
  return std::filesystem::path(path).parent_path().string();
}

std::string resolve_path(const std::string& base_dir, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (std::filesystem::path(base_dir) / p).string();
}

}  // namespace handemb::detail
