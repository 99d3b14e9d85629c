#include "ndswarm/server.hpp"

#include <sys/socket.h>

#include <charconv>
#include <chrono>
#include <iostream>
#include <condition_variable>
#include <mutex>
#include <set>
#include <stdexcept>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace ndswarm {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using Clock = std::chrono::steady_clock;

std::uint16_t resolve_port(std::optional<int> flag, const char* env_value) {
  const auto check = [](long long v, const std::string& what) {
    if (v < 0 || v > 65535) throw std::invalid_argument(what + " is not a valid port");
    return static_cast<std::uint16_t>(v);
  };
  if (flag) return check(*flag, "--port " + std::to_string(*flag));
  if (env_value && *env_value) {
    const std::string_view text(env_value);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw std::invalid_argument("ND_SWARM_PORT='" + std::string(text) + "' is not a valid port");
    }
    return check(v, "ND_SWARM_PORT=" + std::string(text));
  }
  return kDefaultPort;
}

struct Server::Impl {
  std::shared_ptr<Api> api;
  ServerOptions options;
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::atomic<bool> stopping{false};

  std::mutex mu;
  std::condition_variable idle;
  std::set<int> open_fds;
  std::size_t active = 0;  // connection threads still running

  void serve(tcp::socket socket);
  void stream(websocket::stream<tcp::socket>& ws, const std::shared_ptr<Session>& session);

  void track(int fd) {
    std::lock_guard lock(mu);
    open_fds.insert(fd);
  }
  void untrack(int fd) {
    std::lock_guard lock(mu);
    open_fds.erase(fd);
  }
};

namespace {

template <class Body>
void add_common_headers(http::response<Body>& res) {
  res.set(http::field::server, "ndswarm");
  res.set(http::field::access_control_allow_origin, "*");
  res.set(http::field::access_control_allow_headers, "Content-Type");
  res.set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
}

}  // namespace

void Server::Impl::serve(tcp::socket socket) {
  const int fd = socket.native_handle();
  beast::error_code ec;
  beast::flat_buffer buffer;
  for (;;) {
    http::request_parser<http::string_body> parser;
    parser.body_limit(512ull * 1024 * 1024);
    http::read(socket, buffer, parser, ec);
    if (ec) break;
    auto req = parser.release();

    if (websocket::is_upgrade(req)) {
      std::shared_ptr<Session> session;
      const auto id = Api::stream_session(std::string_view(req.target().data(), req.target().size()));
      if (id) {
        try {
          session = api->registry()->get(*id);
        } catch (const ServiceError&) {
        }
      }
      if (!session) {
        http::response<http::string_body> res{http::status::not_found, req.version()};
        add_common_headers(res);
        res.set(http::field::content_type, "application/json");
        res.body() = R"({"error":"unknown stream"})";
        res.prepare_payload();
        http::write(socket, res, ec);
        break;
      }
      websocket::stream<tcp::socket> ws(std::move(socket));
      ws.accept(req, ec);
      if (!ec) stream(ws, session);
      untrack(fd);
      return;
    }

    http::response<http::string_body> res;
    res.version(req.version());
    res.keep_alive(req.keep_alive());
    add_common_headers(res);
    if (req.method() == http::verb::options) {
      res.result(http::status::no_content);
    } else {
      ApiRequest api_req{std::string(req.method_string()), std::string(req.target()), std::move(req.body()),
                         std::string(req[http::field::content_type])};
      const ApiResponse api_res = api->handle(api_req);
      res.result(static_cast<unsigned>(api_res.status));
      res.set(http::field::content_type, api_res.content_type);
      res.body() = api_res.body;
    }
    res.prepare_payload();
    http::write(socket, res, ec);
    if (ec || !res.keep_alive()) break;
  }
  socket.shutdown(tcp::socket::shutdown_send, ec);
  untrack(fd);
}

void Server::Impl::stream(websocket::stream<tcp::socket>& ws, const std::shared_ptr<Session>& session) {
  ws.text(true);
  beast::error_code ec;
  const auto send = [&](const std::string& text) {
    ws.write(asio::buffer(text), ec);
    return !ec;
  };
  const auto push_current = [&]() -> bool {
    try {
      return send(serialize_frame(session->frame()));
    } catch (const ServiceError& e) {
      return send(nlohmann::json{{"error", e.what()}, {"version", session->version()}}.dump());
    }
  };

  const auto min_gap = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(options.max_push_rate > 0 ? 1.0 / options.max_push_rate : 0.0));
  std::uint64_t seen = session->version();
  if (!push_current()) return;
  auto last_push = Clock::now();

  while (!stopping) {
    // Incoming messages are commands.
    if (ws.next_layer().available(ec) > 0 && !ec) {
      beast::flat_buffer in;
      ws.read(in, ec);
      if (ec) return;
      const std::string text = beast::buffers_to_string(in.data());
      try {
        const auto result = session->dispatch(command_from_json(nlohmann::json::parse(text)));
        if (const auto* frame = std::get_if<SceneFrame>(&result.value)) {
          if (!send(serialize_frame(*frame))) return;
        } else if (const auto* report = std::get_if<PcaReport>(&result.value)) {
          if (!send(pca_report_to_json(*report).dump())) return;
        }
      } catch (const ServiceError& e) {
        nlohmann::json err = {{"error", e.what()}};
        if (e.details().is_object()) err.update(e.details());
        if (!send(err.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace))) return;
      } catch (const nlohmann::json::exception& e) {
        if (!send(nlohmann::json{{"error", std::string("malformed JSON: ") + e.what()}}.dump())) return;
      }
      continue;
    }
    if (ec) return;

    const auto changed = session->wait_for_change(seen, std::chrono::milliseconds(20));
    if (!changed) continue;
    const auto due = last_push + min_gap;
    if (Clock::now() < due) std::this_thread::sleep_until(due);
    seen = session->version();
    if (!push_current()) return;
    last_push = Clock::now();
  }
  ws.close(websocket::close_code::going_away, ec);
}

Server::Server(std::shared_ptr<Api> api, ServerOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->api = std::move(api);
  impl_->options = std::move(options);
}

Server::~Server() { stop(); }

void Server::start() {
  const auto address = asio::ip::make_address(impl_->options.address);
  tcp::endpoint endpoint(address, impl_->options.port);
  impl_->acceptor.open(endpoint.protocol());
  impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
  impl_->acceptor.bind(endpoint);
  impl_->acceptor.listen();
  port_ = impl_->acceptor.local_endpoint().port();
}

void Server::run() {
  auto& im = *impl_;
  while (!im.stopping) {
    tcp::socket socket(im.io);
    beast::error_code ec;
    im.acceptor.accept(socket, ec);
    if (im.stopping) break;
    if (ec) continue;
    im.track(socket.native_handle());
    {
      std::lock_guard lock(im.mu);
      ++im.active;
    }
    // Heap-held so the socket is gone before the thread reports itself done.
    auto owned = std::make_unique<tcp::socket>(std::move(socket));
    std::thread([&im, owned = std::move(owned)]() mutable {
      try {
        im.serve(std::move(*owned));
      } catch (const std::exception& e) {
        std::cerr << "connection error: " << e.what() << '\n';
      }
      owned.reset();
      std::lock_guard lock(im.mu);
      --im.active;
      im.idle.notify_all();
    }).detach();
  }
}

void Server::run_in_background() {
  start();
  background_ = std::thread([this] { run(); });
}

void Server::stop() {
  auto& im = *impl_;
  if (im.stopping.exchange(true)) return;
  if (im.acceptor.is_open()) {
    // Wake the blocking accept.
    beast::error_code ec;
    tcp::socket poke(im.io);
    const auto local = im.acceptor.local_endpoint(ec);
    if (!ec) {
      const auto addr = local.address().is_unspecified() ? asio::ip::address(asio::ip::address_v4::loopback())
                                                          : local.address();
      poke.connect(tcp::endpoint(addr, local.port()), ec);
    }
  }
  if (background_.joinable()) background_.join();
  {
    std::unique_lock lock(im.mu);
    for (int fd : im.open_fds) ::shutdown(fd, SHUT_RDWR);
    im.idle.wait(lock, [&] { return im.active == 0; });
  }
  beast::error_code ec;
  im.acceptor.close(ec);
}

}  // namespace ndswarm
