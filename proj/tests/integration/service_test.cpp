#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>

// Eigen before httplib: <resolv.h> defines a _res macro that breaks Eigen.
#include "handemb/app/server.hpp"
#include "handemb/app/service.hpp"
#include "oracles.hpp"

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <httplib.h>
#include <json.hpp>

using namespace handemb;
using nlohmann::json;
namespace beast = boost::beast;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

const app::EmbodimentService& service() {
  static const app::EmbodimentService s(load_pipeline_config(testenv::config_path("pipeline.json")));
  return s;
}

json state_body(const std::string& hand, double flex = 0.0, std::size_t count = 45) {
  json angles = json::array();
  for (std::size_t i = 0; i < count; ++i) angles.push_back(i % 3 == 0 ? flex : 0.0);
  return {{"hand", hand},
          {"translation", {0.1, 0.0, 0.2}},
          {"global_orientation", {0.0, 0.3, 0.0}},
          {"finger_angles", angles}};
}

// One server on a free port for the whole suite.
struct Running {
  std::string static_dir;
  app::Server server;
  std::uint16_t port;

  Running()
      : static_dir(testenv::scratch_dir("service_static")),
        server(service(), static_dir),
        port(0) {
    testenv::write_file(static_dir + "/index.html", "<!doctype html><title>explorer</title>");
    testenv::write_file(static_dir + "/app.js", "console.log('explorer');");
    port = server.start("127.0.0.1", 0);
  }
};

Running& running() {
  static Running r;
  return r;
}

httplib::Client client() {
  httplib::Client c("127.0.0.1", running().port);
  c.set_read_timeout(30, 0);
  return c;
}

class Stream {
 public:
  Stream() : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(running().port)));
    ws_.handshake("127.0.0.1", "/ws/embody");
  }
  ~Stream() {
    beast::error_code ec;
    ws_.close(beast::websocket::close_code::normal, ec);
  }
  json exchange(const std::string& message) {
    ws_.text(true);
    ws_.write(net::buffer(message));
    beast::flat_buffer buffer;
    ws_.read(buffer);
    return json::parse(beast::buffers_to_string(buffer.data()));
  }

 private:
  net::io_context ioc_;
  beast::websocket::stream<tcp::socket> ws_;
};

}  // namespace

TEST_SUITE("service") {

TEST_CASE("GET /api/hands advertises hands and slider bounds") {
  auto res = client().Get("/api/hands");
  REQUIRE(res);
  CHECK(res->status == 200);
  const json body = json::parse(res->body);
  CHECK(body["default"] == "mia");
  std::map<std::string, json> hands;
  for (const json& h : body["hands"]) hands[h["id"]] = h;
  REQUIRE(hands.size() == 4);
  CHECK(hands["mia"]["actuated"].size() == 3);
  CHECK(hands["mia"]["fixed"]["j_thumb_opp"] == 0.6);
  CHECK(hands["shadow"]["actuated"].size() == 20);
  CHECK(hands["robotiq_2f140"]["fingers"] == json::array({"thumb", "index"}));
  CHECK(body["model"]["finger_angle_lower"].size() == 45);
  CHECK(body["model"]["finger_angle_upper"].size() == 45);
  CHECK(body["model"]["parameter_count"] == 48);

  CHECK(client().Post("/api/hands", "{}", "application/json")->status == 405);
}

TEST_CASE("POST /api/embody") {
  SUBCASE("zero state on Mia") {
    auto res = client().Post("/api/embody", state_body("mia").dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    const json body = json::parse(res->body);
    CHECK(body["actuated"].size() == 3);
    CHECK(body["fixed"].size() == 1);
    for (auto& [finger, r] : body["residuals"].items()) CHECK(std::isfinite(r.get<double>()));
    CHECK(body["model_markers"].size() == 5);
    CHECK(body["model_skeleton"]["index"].size() == 5);
    CHECK(body["robot_markers"].size() == body["residuals"].size());
    CHECK_FALSE(body["link_poses"].empty());
    double norm = 0.0;
    for (const json& c : body["base_pose"]["quaternion"]) norm += c.get<double>() * c.get<double>();
    CHECK(std::abs(norm - 1.0) < 1e-12);
  }
  SUBCASE("default hand when none is given") {
    json body = state_body("mia");
    body.erase("hand");
    auto res = client().Post("/api/embody", body.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["hand"] == "mia");
  }
  SUBCASE("44 angles") {
    auto res = client().Post("/api/embody", state_body("mia", 0.0, 44).dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(json::parse(res->body)["error"].get<std::string>().find("44") != std::string::npos);
  }
  SUBCASE("malformed payloads") {
    CHECK(client().Post("/api/embody", "{ not json", "application/json")->status == 400);
    CHECK(client().Post("/api/embody", "[1, 2]", "application/json")->status == 400);
    json bad = state_body("mia");
    bad["translation"] = {0.0, 1.0};
    CHECK(client().Post("/api/embody", bad.dump(), "application/json")->status == 400);
    bad = state_body("mia");
    bad["finger_angles"][3] = "x";
    CHECK(client().Post("/api/embody", bad.dump(), "application/json")->status == 400);
  }
  SUBCASE("unknown hand") {
    auto res = client().Post("/api/embody", state_body("allegro").dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 404);
  }
  SUBCASE("unknown route") {
    CHECK(client().Get("/api/nothing")->status == 404);
    CHECK(client().Get("/api/embody")->status == 405);
  }
}

TEST_CASE("Mia requests answer within 50 ms") {
  std::vector<double> ms;
  auto c = client();
  for (int i = 0; i < 20; ++i) {
    const std::string body = state_body("mia", 0.05 * i).dump();
    const auto t0 = std::chrono::steady_clock::now();
    auto res = c.Post("/api/embody", body, "application/json");
    ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    REQUIRE(res);
    REQUIRE(res->status == 200);
  }
  std::sort(ms.begin(), ms.end());
  INFO("median " << ms[ms.size() / 2] << " ms, max " << ms.back() << " ms");
  CHECK(ms[ms.size() / 2] < 50.0);
}

TEST_CASE("stream of identical states gives identical responses") {
  Stream stream;
  const std::string msg = state_body("shadow", 0.4).dump();
  const json first = stream.exchange(msg);
  REQUIRE(first.contains("actuated"));
  CHECK(first["actuated"].size() == 20);
  for (int i = 0; i < 4; ++i) CHECK(stream.exchange(msg) == first);

  const json error = stream.exchange(state_body("mia", 0.0, 44).dump());
  CHECK(error["status"] == 400);
  CHECK(stream.exchange(msg) == first);
}

TEST_CASE("stream connections keep separate warm starts") {
  Stream a, b;
  const std::string rest = state_body("mia", 0.0).dump();
  const std::string curled = state_body("mia", 1.2).dump();
  const json cold = a.exchange(rest);
  b.exchange(curled);
  b.exchange(curled);
  CHECK(a.exchange(rest) == cold);
  const json stateless = json::parse(service().embody(curled).body);
  CHECK(stateless["actuated"] == json::parse(service().embody(curled).body)["actuated"]);
}

TEST_CASE("static explorer bundle") {
  auto index = client().Get("/");
  REQUIRE(index);
  CHECK(index->status == 200);
  CHECK(index->body.find("explorer") != std::string::npos);
  CHECK(index->get_header_value("Content-Type").find("text/html") == 0);
  auto js = client().Get("/app.js");
  REQUIRE(js);
  CHECK(js->get_header_value("Content-Type") == "text/javascript");
  CHECK(client().Get("/missing.css")->status == 404);
  CHECK(client().Get("/../secret")->status >= 400);
}

}  // TEST_SUITE
