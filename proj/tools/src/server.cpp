#include "handemb/app/server.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <mutex>
#include <thread>
#include <vector>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace handemb::app {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

std::string mime_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".wasm") return "application/wasm";
  return "application/octet-stream";
}

}  // namespace

struct Server::Impl {
  const EmbodimentService& service;
  std::string static_dir;
  net::io_context ioc;
  std::unique_ptr<tcp::acceptor> acceptor;
  std::thread accept_thread;
  std::mutex mutex;
  std::vector<std::shared_ptr<tcp::socket>> sockets;
  std::vector<std::thread> sessions;
  std::atomic<bool> running{false};
  tcp::endpoint endpoint;

  Impl(const EmbodimentService& s, std::string dir) : service(s), static_dir(std::move(dir)) {}

  HttpResponse serve_static(std::string target) const {
    if (static_dir.empty()) return {404, R"({"error":"not found"})"};
    if (auto q = target.find('?'); q != std::string::npos) target.resize(q);
    if (target.empty() || target == "/") target = "/index.html";
    if (target.find("..") != std::string::npos) return {400, R"({"error":"bad path"})"};
    const std::filesystem::path path = std::filesystem::path(static_dir) / target.substr(1);
    std::ifstream in(path, std::ios::binary);
    if (!in || std::filesystem::is_directory(path)) return {404, R"({"error":"not found"})"};
    return {200, std::string(std::istreambuf_iterator<char>(in), {}), mime_type(path)};
  }

  HttpResponse route(const http::request<http::string_body>& req) const {
    const std::string target(req.target());
    if (target == "/api/hands") {
      if (req.method() != http::verb::get) return {405, R"({"error":"use GET"})"};
      return service.hands();
    }
    if (target == "/api/embody") {
      if (req.method() != http::verb::post) return {405, R"({"error":"use POST"})"};
      return service.embody(req.body());
    }
    if (target.rfind("/api/", 0) == 0 || target.rfind("/ws/", 0) == 0)
      return {404, R"({"error":"not found"})"};
    if (req.method() != http::verb::get && req.method() != http::verb::head)
      return {405, R"({"error":"method not allowed"})"};
    return serve_static(target);
  }

  void run_websocket(tcp::socket& socket, http::request<http::string_body>& req) {
    websocket::stream<tcp::socket&> ws(socket);
    beast::error_code ec;
    ws.accept(req, ec);
    if (ec) return;
    WarmStarts warm;
    for (;;) {
      beast::flat_buffer buffer;
      ws.read(buffer, ec);
      if (ec) return;
      const HttpResponse r = service.embody(beast::buffers_to_string(buffer.data()), &warm);
      std::string reply = r.body;
      if (r.status != 200) {
        auto j = nlohmann::json::parse(r.body);
        j["status"] = r.status;
        reply = j.dump();
      }
      ws.text(true);
      ws.write(net::buffer(reply), ec);
      if (ec) return;
    }
  }

  void session(std::shared_ptr<tcp::socket> socket) {
    beast::error_code ec;
    beast::flat_buffer buffer;
    for (;;) {
      http::request<http::string_body> req;
      http::read(*socket, buffer, req, ec);
      if (ec) break;
      if (websocket::is_upgrade(req)) {
        if (req.target() == "/ws/embody") {
          run_websocket(*socket, req);
          break;
        }
      }
      const HttpResponse r = route(req);
      http::response<http::string_body> res{static_cast<http::status>(r.status), req.version()};
      res.set(http::field::server, "handemb");
      res.set(http::field::content_type, r.content_type);
      res.keep_alive(req.keep_alive());
      if (req.method() != http::verb::head) res.body() = r.body;
      res.prepare_payload();
      http::write(*socket, res, ec);
      if (ec || !res.keep_alive()) break;
    }
    socket->shutdown(tcp::socket::shutdown_both, ec);
  }

  void accept_loop() {
    while (running) {
      auto socket = std::make_shared<tcp::socket>(ioc);
      beast::error_code ec;
      acceptor->accept(*socket, ec);
      if (!running) break;
      if (ec) continue;
      socket->set_option(tcp::no_delay(true), ec);
      std::lock_guard lock(mutex);
      sockets.push_back(socket);
      sessions.emplace_back([this, socket] { session(socket); });
    }
  }
};

Server::Server(const EmbodimentService& service, std::string static_dir)
    : impl_(std::make_unique<Impl>(service, std::move(static_dir))) {}

Server::~Server() { stop(); }

std::uint16_t Server::start(const std::string& address, std::uint16_t port) {
  if (impl_->running) return impl_->endpoint.port();
  tcp::endpoint ep(net::ip::make_address(address), port);
  impl_->acceptor = std::make_unique<tcp::acceptor>(impl_->ioc);
  impl_->acceptor->open(ep.protocol());
  impl_->acceptor->set_option(net::socket_base::reuse_address(true));
  impl_->acceptor->bind(ep);
  impl_->acceptor->listen();
  impl_->endpoint = impl_->acceptor->local_endpoint();
  impl_->running = true;
  impl_->accept_thread = std::thread([this] { impl_->accept_loop(); });
  return impl_->endpoint.port();
}

void Server::stop() {
  if (!impl_ || !impl_->running.exchange(false)) return;
  {
    // Wake the blocking accept.
    beast::error_code ec;
    tcp::socket poke(impl_->ioc);
    tcp::endpoint target(impl_->endpoint.address().is_unspecified()
                             ? net::ip::make_address("127.0.0.1")
                             : impl_->endpoint.address(),
                         impl_->endpoint.port());
    poke.connect(target, ec);
  }
  impl_->accept_thread.join();
  beast::error_code ec;
  impl_->acceptor->close(ec);
  std::vector<std::thread> sessions;
  {
    std::lock_guard lock(impl_->mutex);
    for (auto& s : impl_->sockets) s->shutdown(tcp::socket::shutdown_both, ec);
    sessions.swap(impl_->sessions);
    impl_->sockets.clear();
  }
  for (auto& t : sessions) t.join();
}

}  // namespace handemb::app
