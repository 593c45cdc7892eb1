/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// WebSocket front end for LiveSession. Requires Boost.Beast (header-only)
// and a threads library at link time.

#include <atomic>
#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "rapu/bridge.hpp"
#include "rapu/config.hpp"
#include "rapu/errors.hpp"

namespace rapu {

namespace bridge_detail {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

inline constexpr auto kTick = std::chrono::milliseconds(20);
inline constexpr auto kSnapshotPeriod = std::chrono::milliseconds(100);
inline constexpr std::size_t kMaxQueuedFrames = 512;

using LogFn = std::function<void(const std::string&)>;

/// One connected cockpit. All handlers run on the session strand, so the
/// engine is only ever touched from one logical thread.
class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, const Config& config, LogFn log)
      : ws_(std::move(socket)),
        timer_(ws_.get_executor()),
        live_(config),
        log_(std::move(log)) {}

  void start(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

 private:
  Millis elapsed() const {
    return std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - origin_);
  }

  void on_accept(beast::error_code ec) {
    if (ec) return log("accept: " + ec.message());
    origin_ = std::chrono::steady_clock::now();
    last_snapshot_ = origin_;
    ws_.text(true);
    push(live_.snapshot());
    read();
    tick();
  }

  void read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;
      timer_.cancel();
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    live_.advance_to(elapsed());
    push(live_.handle_frame(text));
    flush_engine_output(false);
    read();
  }

  void tick() {
    timer_.expires_after(kTick);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closed_) return;
      self->live_.advance_to(self->elapsed());
      const bool due = std::chrono::steady_clock::now() - self->last_snapshot_ >= kSnapshotPeriod;
      self->flush_engine_output(due);
      self->tick();
    });
  }

  void flush_engine_output(bool snapshot_due) {
    for (auto& ev : live_.drain_events()) push(std::move(ev));
    if (live_.take_phase_change() || snapshot_due) {
      push(live_.snapshot());
      last_snapshot_ = std::chrono::steady_clock::now();
    }
  }

  void push(const nlohmann::ordered_json& frame) {
    if (closed_) return;
    // Bounded: a client that stops reading loses the oldest frames.
    if (outbox_.size() >= kMaxQueuedFrames) outbox_.pop_front();
    outbox_.push_back(frame.dump());
    if (!writing_) write_next();
  }

  void write_next() {
    if (outbox_.empty() || closed_) {
      writing_ = false;
      return;
    }
    writing_ = true;
    current_ = std::move(outbox_.front());
    outbox_.pop_front();
    ws_.async_write(asio::buffer(current_),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) {
                        self->closed_ = true;
                        self->writing_ = false;
                        self->timer_.cancel();
                        return;
                      }
                      self->write_next();
                    });
  }

  void log(const std::string& msg) {
    if (log_) log_(msg);
  }

  websocket::stream<tcp::socket> ws_;
  asio::steady_timer timer_;
  beast::flat_buffer buffer_;
  LiveSession live_;
  LogFn log_;
  std::chrono::steady_clock::time_point origin_;
  std::chrono::steady_clock::time_point last_snapshot_;
  std::deque<std::string> outbox_;
  std::string current_;
  bool writing_ = false;
  bool closed_ = false;
};

/// Reads the HTTP upgrade request and hands off to WsSession on /session.
class HttpUpgrade : public std::enable_shared_from_this<HttpUpgrade> {
 public:
  HttpUpgrade(tcp::socket socket, const Config& config, LogFn log)
      : stream_(std::move(socket)), config_(config), log_(std::move(log)) {}

  void start() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     beast::bind_front_handler(&HttpUpgrade::on_read, shared_from_this()));
  }

 private:
  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    if (websocket::is_upgrade(req_) && req_.target() == "/session") {
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), config_, log_)->start(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>(http::status::not_found,
                                                                    req_.version());
    res->set(http::field::content_type, "text/plain");
    res->body() = "websocket endpoint is /session\n";
    res->keep_alive(false);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  const Config& config_;
  LogFn log_;
};

}  // namespace bridge_detail

/**
 * Serves one fresh simulator per WebSocket connection on ws://addr:port/session.
 * The constructor binds (BindFailure on error); run() blocks, start() runs
 * the same loop on a background thread.
 */
class BridgeServer {
 public:
  using LogFn = bridge_detail::LogFn;

  BridgeServer(Config config, const std::string& address, unsigned short port, LogFn log = {})
      : config_(std::move(config)), acceptor_(ioc_), log_(std::move(log)) {
    validate(config_);
    namespace asio = boost::asio;
    boost::system::error_code ec;
    const auto ip = asio::ip::make_address(address, ec);
    if (ec) throw BindFailure("bad listen address \"" + address + "\": " + ec.message());
    const asio::ip::tcp::endpoint ep(ip, port);
    acceptor_.open(ep.protocol(), ec);
    if (!ec) acceptor_.set_option(asio::socket_base::reuse_address(true), ec);
    if (!ec) acceptor_.bind(ep, ec);
    if (!ec) acceptor_.listen(asio::socket_base::max_listen_connections, ec);
    if (ec) throw BindFailure("cannot listen on " + address + ":" + std::to_string(port) + ": " +
                              ec.message());
    accept();
  }

  ~BridgeServer() { stop(); }

  BridgeServer(const BridgeServer&) = delete;
  BridgeServer& operator=(const BridgeServer&) = delete;

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  void run() { ioc_.run(); }

  void start() {
    thread_ = std::thread([this] { ioc_.run(); });
  }

  void stop() {
    ioc_.stop();
    if (thread_.joinable()) thread_.join();
  }

 private:
  void accept() {
    acceptor_.async_accept(boost::asio::make_strand(ioc_),
                           [this](boost::system::error_code ec, boost::asio::ip::tcp::socket s) {
                             if (ec == boost::asio::error::operation_aborted) return;
                             if (!ec) {
                               std::make_shared<bridge_detail::HttpUpgrade>(std::move(s), config_,
                                                                            log_)
                                   ->start();
                             }
                             accept();
                           });
  }

  Config config_;
  boost::asio::io_context ioc_;
  boost::asio::ip::tcp::acceptor acceptor_;
  LogFn log_;
  std::thread thread_;
};

}  // namespace rapu
