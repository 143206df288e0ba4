#pragma once

#include <memory>
#include <string>

#include "teleop/session.hpp"

namespace teleop {

namespace detail {
struct ServerImpl;
}

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  std::size_t max_queued_frames = 1024;  // per client; slower clients are dropped
};

/**
 * Hosts one live session.
 *
 *   GET /health  -> {"status": "ok", "tick": N}
 *   /session     -> websocket; JSON text frames {"type", "seq", "payload"}
 *
 * All session state lives on the single thread that calls run(): the tick
 * timer, message ingress and snapshot egress are serialized there. The first
 * client to connect (or the first to send claim_operator while the role is
 * free) is the operator; control messages from other clients get an error
 * reply and are dropped.
 */
class TeleopServer {
 public:
  TeleopServer(SessionContext ctx, ServerOptions options = {});
  ~TeleopServer();

  TeleopServer(const TeleopServer&) = delete;
  TeleopServer& operator=(const TeleopServer&) = delete;

  /// Port actually bound (useful with port 0).
  unsigned short port() const;

  /// Serves until stop() is called.
  void run();

  /// Safe to call from any thread.
  void stop();

 private:
  std::shared_ptr<detail::ServerImpl> impl_;
};

}  // namespace teleop
