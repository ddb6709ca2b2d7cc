#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

#include "handemb/boxopt.hpp"
#include "handemb/embodiment.hpp"
#include "handemb/hand_model.hpp"
#include "handemb/record_mapping.hpp"

namespace handemb {

/// Hand-shape file: schema_version, beta[10] and per finger a base rotation
/// (base_rpy or base_rotation rows), mean[9], coefficients[9][10], markers[2].
HandShape load_hand_shape(std::istream& in);
HandShape load_hand_shape_file(const std::string& path);
void write_hand_shape(const HandShape& shape, std::ostream& out);

boxopt::SolveOptions parse_solve_options(const std::string& json_text);

/// Record config: t_hand_model, per-finger weights and bounds, solver options.
/// The shape comes from its own file.
RecordConfig load_record_config(std::istream& in, const HandShape& shape);
RecordConfig load_record_config_file(const std::string& path, const HandShape& shape);

/// Embodiment config: hand (path of a hand config, relative to the file),
/// t_robot_model, solver options.
EmbodimentConfig load_embodiment_config_file(const std::string& path);

struct PipelineConfig {
  std::string path;
  HandShape shape;
  RecordConfig record;
  std::map<std::string, EmbodimentConfig> embodiments;
  std::string default_hand;
  std::size_t max_gap = 10;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> label_map;
  /// Hex FNV-1a digests of every file that was read, keyed by role.
  std::map<std::string, std::string> digests;

  const EmbodimentConfig& embodiment(const std::string& hand) const;
};

/// Reads a pipeline file and everything it references. Relative paths are
/// resolved against the pipeline file's directory.
PipelineConfig load_pipeline_config(const std::string& path);

std::uint64_t fnv1a64(std::string_view bytes);
std::string digest_hex(std::string_view bytes);
/// Digest of a file's bytes; throws SchemaError if it cannot be read.
std::string file_digest(const std::string& path);

}  // namespace handemb
