#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "ndswarm/api.hpp"

namespace ndswarm {

inline constexpr std::uint16_t kDefaultPort = 8080;

// --port wins, then ND_SWARM_PORT, then the default. Throws
// std::invalid_argument for a value that is not a port number.
std::uint16_t resolve_port(std::optional<int> flag, const char* env_value);

struct ServerOptions {
  std::string address = "0.0.0.0";
  std::uint16_t port = kDefaultPort;  // 0 picks a free port
  double max_push_rate = 60.0;        // WebSocket frames per second
};

// Blocking HTTP/1.1 + WebSocket server, one thread per connection.
// Sockets upgraded on /sessions/{id}/stream receive a frame on connect and
// after every state change, throttled to max_push_rate. Text messages sent by
// the client are dispatched as commands; errors come back as {"error": ...}.
class Server {
 public:
  Server(std::shared_ptr<Api> api, ServerOptions options);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and listens; port() is valid afterwards.
  void start();
  std::uint16_t port() const { return port_; }

  // Accept loop; returns after stop().
  void run();
  // start() + run() on a background thread.
  void run_in_background();
  void stop();

 private:
  struct Impl;

  std::unique_ptr<Impl> impl_;
  std::uint16_t port_ = 0;
  std::thread background_;
};

}  // namespace ndswarm
