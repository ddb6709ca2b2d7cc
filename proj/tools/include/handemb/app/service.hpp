#pragma once

#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "handemb/config_io.hpp"
#include "handemb/embodiment.hpp"

namespace handemb::app {

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Warm-start memory of one stream connection, per hand.
using WarmStarts = std::map<std::string, RobotCommand>;

/// Request handling behind the HTTP and stream endpoints. Thread-safe: the
/// configuration is read-only and all per-connection state is passed in.
class EmbodimentService {
 public:
  explicit EmbodimentService(PipelineConfig config);

  const PipelineConfig& config() const { return config_; }

  /// GET /api/hands
  HttpResponse hands() const;
  /// POST /api/embody and /ws/embody messages. `warm` is null for stateless calls.
  HttpResponse embody(const std::string& body, WarmStarts* warm = nullptr) const;

  nlohmann::json embody_json(const std::string& hand, const HandState& state,
                             WarmStarts* warm) const;

 private:
  PipelineConfig config_;
};

}  // namespace handemb::app
