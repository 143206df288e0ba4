// Live service over loopback: a synchronous Beast client against a server
// running on its own thread.

#include <doctest.h>

#include <functional>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "support.hpp"
#include "teleop/server.hpp"

using namespace teleop;
using io::json;
namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

// At 50 Hz this is ~60 s of snapshots; only reached if something hangs.
constexpr int kMaxFrames = 3000;

class RunningServer {
 public:
  RunningServer() {
    SessionContext ctx;
    ctx.model = std::make_shared<const RobotModel>(test::ur5());
    ctx.libraries.push_back(io::load_grasp_library(TELEOP_DATA_DIR "/cup.json"));
    ctx.libraries.push_back(io::load_grasp_library(TELEOP_DATA_DIR "/box.json"));
    server_ = std::make_unique<TeleopServer>(std::move(ctx), ServerOptions{"127.0.0.1", 0});
    thread_ = std::thread([this] { server_->run(); });
  }
  ~RunningServer() {
    server_->stop();
    thread_.join();
  }
  unsigned short port() const { return server_->port(); }

 private:
  std::unique_ptr<TeleopServer> server_;
  std::thread thread_;
};

class Client {
 public:
  explicit Client(unsigned short port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    asio::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/session");
    welcome = read();
  }

  void send(const json& j) { ws_.write(asio::buffer(j.dump())); }
  void send_raw(const std::string& s) { ws_.write(asio::buffer(s)); }

  json read() {
    beast::flat_buffer buf;
    ws_.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  }

  // Reads frames until one satisfies `pred`.
  json read_until(const std::function<bool(const json&)>& pred) {
    for (int i = 0; i < kMaxFrames; ++i) {
      json j = read();
      if (pred(j)) return j;
    }
    FAIL("expected frame never arrived");
    return {};
  }

  json next_of_type(const std::string& type) {
    return read_until([&](const json& j) { return j.at("type") == type; });
  }

  json welcome;

 private:
  asio::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

json msg(const char* type, std::int64_t seq, json payload = json::object()) {
  return {{"type", type}, {"seq", seq}, {"payload", std::move(payload)}};
}

Pose pose_of(const json& j) { return io::pose_from_json(j); }

}  // namespace

TEST_CASE("health endpoint") {
  RunningServer server;
  asio::io_context ioc;
  tcp::socket sock(ioc);
  tcp::resolver resolver(ioc);
  asio::connect(sock, resolver.resolve("127.0.0.1", std::to_string(server.port())));
  http::request<http::empty_body> req{http::verb::get, "/health", 11};
  req.set(http::field::host, "127.0.0.1");
  http::write(sock, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(sock, buf, res);
  CHECK(res.result() == http::status::ok);
  const json body = json::parse(res.body());
  CHECK(body.at("status") == "ok");
  CHECK(body.at("tick").is_number_integer());
}

TEST_CASE("roles, snapshots and the grip round trip") {
  RunningServer server;
  Client op(server.port());
  CHECK(op.welcome.at("type") == "welcome");
  CHECK(op.welcome.at("payload").at("role") == "operator");
  Client watcher(server.port());
  CHECK(watcher.welcome.at("payload").at("role") == "observer");

  // Observers may not steer.
  watcher.send(msg("toggle_mode", 1));
  const json refused = watcher.next_of_type("error");
  CHECK(refused.at("seq") == 1);

  op.send(msg("hand_pose", 1, {{"p", {0.0, 0.0, 1.0}}, {"q", {1, 0, 0, 0}}}));
  op.send(msg("toggle_mode", 2));
  const json manual = op.read_until([](const json& j) {
    return j.at("type") == "snapshot" && j.at("payload").at("mode") == "manual";
  });
  CHECK(manual.at("payload").at("blending_active").is_boolean());
  // Observers see the same session.
  watcher.read_until([](const json& j) {
    return j.at("type") == "snapshot" && j.at("payload").at("mode") == "manual";
  });

  op.send(msg("toggle_mode", 3));
  op.send(msg("grip", 4));
  const json started = op.read_until([](const json& j) {
    return j.at("type") == "snapshot" && !j.at("payload").at("selected_grasp").is_null();
  });
  const Pose target = pose_of(started.at("payload").at("selected_grasp").at("pose"));
  const json done = op.read_until([](const json& j) {
    return j.at("type") == "snapshot" && !j.at("payload").at("approach_active").get<bool>();
  });
  const Pose final_pose = pose_of(done.at("payload").at("commanded_pose"));
  CHECK(linear_distance(final_pose.position, target.position) <= 1e-9);
  CHECK(rotation_angle_between(final_pose.orientation, target.orientation) <= 1e-9);
}

TEST_CASE("malformed and out-of-order messages get error replies") {
  RunningServer server;
  Client op(server.port());
  op.send_raw("{definitely not json");
  CHECK(op.next_of_type("error").at("payload").at("message").get<std::string>().size() > 0);
  op.send(msg("teleport", 5));
  CHECK(op.next_of_type("error").at("seq") == 5);
  op.send(msg("select_object", 6, {{"object_id", "box"}}));
  op.send(msg("select_object", 6, {{"object_id", "cup"}}));
  CHECK(op.next_of_type("error").at("seq") == 6);
  // The connection is still served.
  const json snap = op.read_until([](const json& j) {
    return j.at("type") == "snapshot" && j.at("payload").at("selected_object") == "box";
  });
  CHECK(snap.at("payload").at("selected_object") == "box");
}

TEST_CASE("model description and operator hand-over") {
  RunningServer server;
  std::optional<Client> first(std::in_place, server.port());
  Client second(server.port());
  second.send(msg("model_description", 1));
  const json desc = second.next_of_type("model_description");
  CHECK(desc.at("payload").at("robot").at("joints").size() == 6);
  CHECK(desc.at("payload").at("objects").size() == 2);

  second.send(msg("claim_operator", 2));
  CHECK(second.next_of_type("error").at("seq") == 2);
  first.reset();  // operator leaves
  for (std::int64_t seq = 3;; ++seq) {
    second.send(msg("claim_operator", seq));
    const json r = second.read_until([](const json& j) { return j.at("type") != "snapshot"; });
    if (r.at("type") == "role") {
      CHECK(r.at("payload").at("role") == "operator");
      break;
    }
    REQUIRE(seq < 200);
  }
}
