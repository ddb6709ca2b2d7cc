#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "handemb/app/service.hpp"

namespace handemb::app {

/// HTTP + WebSocket front end on one port: /api/hands, /api/embody,
/// /ws/embody and static files from `static_dir` (if not empty).
class Server {
 public:
  Server(const EmbodimentService& service, std::string static_dir);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts accepting in the background. Port 0 picks a free port.
  /// Returns the bound port.
  std::uint16_t start(const std::string& address, std::uint16_t port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace handemb::app
