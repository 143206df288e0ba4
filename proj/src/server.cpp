#include "teleop/server.hpp"

#include <chrono>
#include <deque>
#include <iostream>
#include <map>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace teleop {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using io::json;

class WsConnection;

struct detail::ServerImpl : std::enable_shared_from_this<detail::ServerImpl> {
  ServerImpl(SessionContext c, ServerOptions o)
      : ctx(std::move(c)), options(std::move(o)), acceptor(ioc), timer(ioc) {
    state = make_session(ctx);
    const tcp::endpoint ep(asio::ip::make_address(options.address), options.port);
    acceptor.open(ep.protocol());
    acceptor.set_option(asio::socket_base::reuse_address(true));
    acceptor.bind(ep);
    acceptor.listen();
  }

  void do_accept();
  void schedule_tick();
  void tick();

  void on_connect(const std::shared_ptr<WsConnection>& c);
  void on_message(const std::shared_ptr<WsConnection>& c, const std::string& text);
  void on_disconnect(int id);
  std::string model_description(std::int64_t seq) const;

  SessionContext ctx;
  ServerOptions options;
  asio::io_context ioc{1};
  tcp::acceptor acceptor;
  asio::steady_timer timer;
  std::chrono::steady_clock::time_point next_tick;

  SessionState state;
  std::vector<InboundMessage> pending;
  std::map<int, std::weak_ptr<WsConnection>> clients;
  std::map<int, std::int64_t> last_seq;
  std::optional<int> operator_id;
  int next_client_id = 1;
};

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket socket, std::shared_ptr<detail::ServerImpl> server)
      : ws_(std::move(socket)), server_(std::move(server)) {}

  int id = 0;

  void start(http::request<http::string_body> req) {
    ws_.text(true);
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->server_->on_connect(self);
      self->do_read();
    });
  }

  void send(std::shared_ptr<const std::string> frame) {
    if (closed_) return;
    if (outbox_.size() >= server_->options.max_queued_frames) {
      close();
      return;
    }
    outbox_.push_back(std::move(frame));
    if (outbox_.size() == 1) do_write();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().close(ec);
    server_->on_disconnect(id);
  }

 private:
  void do_read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->close();
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->server_->on_message(self, text);
      self->do_read();
    });
  }

  void do_write() {
    ws_.async_write(asio::buffer(*outbox_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) {
                        self->close();
                        return;
                      }
                      self->outbox_.pop_front();
                      if (!self->outbox_.empty()) self->do_write();
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<detail::ServerImpl> server_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> outbox_;
  bool closed_ = false;
};

namespace {

std::shared_ptr<const std::string> frame(std::string s) {
  return std::make_shared<const std::string>(std::move(s));
}

std::string reply(const char* type, std::int64_t seq, json payload) {
  return json{{"type", type}, {"seq", seq}, {"payload", std::move(payload)}}.dump();
}

// Reads one HTTP request, then either upgrades to a websocket or answers it.
class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, std::shared_ptr<detail::ServerImpl> server)
      : stream_(std::move(socket)), server_(std::move(server)) {}

  void start() {
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (!ec) self->handle();
                     });
  }

 private:
  void handle() {
    if (websocket::is_upgrade(req_)) {
      if (req_.target() == "/session") {
        std::make_shared<WsConnection>(stream_.release_socket(), server_)->start(std::move(req_));
        return;
      }
      respond(http::status::not_found, json{{"error", "unknown endpoint"}});
      return;
    }
    if (req_.method() == http::verb::get && req_.target() == "/health") {
      respond(http::status::ok, json{{"status", "ok"}, {"tick", server_->state.tick}});
      return;
    }
    respond(http::status::not_found, json{{"error", "unknown endpoint"}});
  }

  void respond(http::status status, const json& body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::content_type, "application/json");
    res->keep_alive(false);
    res->body() = body.dump();
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ec;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
    });
  }

  beast::tcp_stream stream_;
  std::shared_ptr<detail::ServerImpl> server_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

void detail::ServerImpl::do_accept() {
  acceptor.async_accept([self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    std::make_shared<HttpSession>(std::move(socket), self)->start();
    self->do_accept();
  });
}

void detail::ServerImpl::schedule_tick() {
  next_tick += std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / ctx.config.tick_rate));
  timer.expires_at(next_tick);
  timer.async_wait([self = shared_from_this()](beast::error_code ec) {
    if (ec) return;
    self->tick();
    self->schedule_tick();
  });
}

void detail::ServerImpl::tick() {
  std::vector<InboundMessage> batch;
  batch.swap(pending);
  TickResult r = session_tick(ctx, std::move(state), batch);
  state = std::move(r.state);
  for (const auto& e : r.errors) {
    if (auto it = clients.find(e.client_id); it != clients.end()) {
      if (auto c = it->second.lock()) c->send(frame(error_message(e.seq, e.message)));
    }
  }
  const auto snap = frame(snapshot_message(r.snapshot));
  std::vector<std::shared_ptr<WsConnection>> live;
  for (const auto& [id, weak] : clients) {
    if (auto c = weak.lock()) live.push_back(std::move(c));
  }
  for (const auto& c : live) c->send(snap);
}

void detail::ServerImpl::on_connect(const std::shared_ptr<WsConnection>& c) {
  c->id = next_client_id++;
  clients[c->id] = c;
  if (!operator_id) operator_id = c->id;
  c->send(frame(reply("welcome", 0,
                      {{"client_id", c->id},
                       {"role", operator_id == c->id ? "operator" : "observer"}})));
}

void detail::ServerImpl::on_disconnect(int id) {
  clients.erase(id);
  last_seq.erase(id);
  if (operator_id == id) operator_id.reset();
}

std::string detail::ServerImpl::model_description(std::int64_t seq) const {
  json objects = json::array();
  for (const auto& lib : ctx.libraries) objects.push_back(io::grasp_library_to_json(lib));
  return reply("model_description", seq,
               {{"robot", io::robot_model_to_json(*ctx.model)}, {"objects", objects}});
}

void detail::ServerImpl::on_message(const std::shared_ptr<WsConnection>& c, const std::string& text) {
  ParsedMessage m;
  try {
    m = parse_client_message(text);
  } catch (const ParseError& e) {
    std::int64_t seq = -1;
    try {
      const json j = json::parse(text);
      if (j.is_object() && j.contains("seq") && j.at("seq").is_number_integer()) seq = j.at("seq").get<std::int64_t>();
    } catch (const json::exception&) {
    }
    c->send(frame(error_message(seq, e.what())));
    return;
  }
  if (auto it = last_seq.find(c->id); it != last_seq.end() && m.seq <= it->second) {
    c->send(frame(error_message(m.seq, "seq must increase per connection")));
    return;
  }
  last_seq[c->id] = m.seq;

  if (std::holds_alternative<ModelDescriptionMsg>(m.message)) {
    c->send(frame(model_description(m.seq)));
    return;
  }
  if (std::holds_alternative<ClaimOperatorMsg>(m.message)) {
    if (operator_id && *operator_id != c->id) {
      c->send(frame(error_message(m.seq, "operator role is held by another client")));
      return;
    }
    operator_id = c->id;
    c->send(frame(reply("role", m.seq, {{"client_id", c->id}, {"role", "operator"}})));
    return;
  }
  if (operator_id != c->id) {
    c->send(frame(error_message(m.seq, "observers cannot send control messages")));
    return;
  }
  pending.push_back({c->id, m.seq, std::move(m.message)});
}

TeleopServer::TeleopServer(SessionContext ctx, ServerOptions options)
    : impl_(std::make_shared<detail::ServerImpl>(std::move(ctx), std::move(options))) {}

TeleopServer::~TeleopServer() { stop(); }

unsigned short TeleopServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void TeleopServer::run() {
  impl_->do_accept();
  impl_->next_tick = std::chrono::steady_clock::now();
  impl_->schedule_tick();
  impl_->ioc.run();

  // Abort outstanding operations so their handlers release the connections.
  beast::error_code ec;
  impl_->acceptor.close(ec);
  impl_->timer.cancel();
  std::vector<std::shared_ptr<WsConnection>> live;
  for (const auto& [id, weak] : impl_->clients) {
    if (auto c = weak.lock()) live.push_back(std::move(c));
  }
  for (const auto& c : live) c->close();
  impl_->ioc.restart();
  impl_->ioc.run();
}

void TeleopServer::stop() { impl_->ioc.stop(); }

}  // namespace teleop
