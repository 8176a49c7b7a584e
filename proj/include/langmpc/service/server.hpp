#ifndef LANGMPC_SERVICE_SERVER_HPP_
#define LANGMPC_SERVICE_SERVER_HPP_

#include "langmpc/service/session.hpp"

#include <memory>
#include <string>

namespace langmpc::service {

/**
 * Websocket front end for one Session. Each connection gets a hello frame
 * {type: "hello", proto: 1}, the current SpecFrame, then the live stream,
 * with a gap-free "seq" stamped per connection. Malformed client messages
 * are answered with an error frame; the connection and session stay up.
 * The session must outlive the server.
 */
class WebSocketServer {
 public:
  /// Port 0 picks a free port.
  WebSocketServer(Session& session, std::string address = "127.0.0.1", unsigned short port = 8765);
  ~WebSocketServer();

  WebSocketServer(const WebSocketServer&) = delete;
  WebSocketServer& operator=(const WebSocketServer&) = delete;

  /// Binds and serves on a background thread. Throws std::runtime_error
  /// when the address cannot be bound.
  void start();
  void stop();
  unsigned short port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace langmpc::service

#endif  // LANGMPC_SERVICE_SERVER_HPP_
