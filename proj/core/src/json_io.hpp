#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "handemb/se3.hpp"

namespace handemb::detail {

using nlohmann::json;

/// Parses a JSON document, mapping syntax errors to SchemaError.
json parse_json(std::istream& in, const std::string& context);
json parse_json_file(const std::string& path);

const json& require(const json& j, const char* key, const std::string& context);
double as_number(const json& j, const std::string& context);
std::string as_string(const json& j, const std::string& context);
Vec3 as_vec3(const json& j, const std::string& context);
std::vector<double> as_numbers(const json& j, const std::string& context);
void check_schema_version(const json& j, int expected, const std::string& context);

/// Accepts {"xyz", "rpy"} or {"translation", "quaternion" [w,x,y,z],
/// optional "rotation" 3x3 rows}. The rotation matrix, when present, wins so
/// written poses read back bit for bit.
Transform as_pose(const json& j, const std::string& context);
json pose_json(const Transform& t);
json vec3_json(const Vec3& v);

/// Directory part of a path, used to resolve relative references.
std::string parent_directory(const std::string& path);
std::string resolve_path(const std::string& base_dir, const std::string& path);

}  // namespace handemb::detail
