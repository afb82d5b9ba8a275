#pragma once

// Websocket front end for a Session. Everything runs on one io_context
// thread: receive handlers only buffer client messages into the Session, and
// a fixed-rate timer drives the tick boundaries and broadcasts TickState.
//
//   GET /session  (websocket upgrade)  -> the interactive session
//   GET /<file>                        -> static console assets, if configured
//
// One session at a time; further upgrade requests get 409 Conflict.

#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <string>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "boir/protocol.hpp"
#include "boir/session.hpp"

namespace boir {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

struct ServerOptions {
  unsigned short port{8090};
  /// Directory served for plain HTTP GETs; empty disables static files.
  std::filesystem::path assets;
  std::ostream* diagnostics{&std::cerr};
};

class SessionServer {
 public:
  using SessionFactory = std::function<std::unique_ptr<Session>()>;

  /// Binds immediately; throws boost::system::system_error if the port is taken.
  SessionServer(asio::io_context& ioc, ServerOptions options, SessionFactory factory)
      : ioc_(ioc), options_(std::move(options)), factory_(std::move(factory)), acceptor_(ioc) {
    const tcp::endpoint endpoint(asio::ip::make_address("0.0.0.0"), options_.port);
    acceptor_.open(endpoint.protocol());
    acceptor_.set_option(asio::socket_base::reuse_address(true));
    acceptor_.bind(endpoint);
    acceptor_.listen();
  }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  void start() { accept(); }

  /// Flushes the running session's log and stops accepting. Call on the io thread.
  void stop() {
    stopping_ = true;
    beast::error_code ignored;
    acceptor_.close(ignored);
    if (auto c = active_.lock()) c->shutdown();
  }

 private:
  class Connection;

  class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
   public:
    HttpConnection(SessionServer& server, tcp::socket socket) : server_(server), stream_(std::move(socket)) {}

    void run() {
      http::async_read(stream_, buffer_, request_,
                       [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

   private:
    void on_read(beast::error_code ec) {
      if (ec) return;
      if (websocket::is_upgrade(request_)) {
        if (request_.target() != "/session") return respond(http::status::not_found, "no such endpoint\n");
        if (server_.active_.lock() || server_.stopping_) {
          return respond(http::status::conflict, "a session is already running\n");
        }
        auto conn = std::make_shared<Connection>(server_, stream_.release_socket());
        server_.active_ = conn;
        conn->accept(std::move(request_));
        return;
      }
      serve_file();
    }

    void serve_file() {
      if (server_.options_.assets.empty() || request_.method() != http::verb::get) {
        return respond(http::status::not_found, "not found\n");
      }
      std::string target(request_.target());
      if (target == "/") target = "/index.html";
      if (target.find("..") != std::string::npos) return respond(http::status::bad_request, "bad path\n");
      const auto path = server_.options_.assets / target.substr(1);
      std::string body;
      try {
        body = detail::read_text_file(path);
      } catch (const std::exception&) {
        return respond(http::status::not_found, "not found\n");
      }
      respond(http::status::ok, std::move(body), content_type(path));
    }

    static std::string content_type(const std::filesystem::path& p) {
      const auto ext = p.extension().string();
      if (ext == ".html") return "text/html";
      if (ext == ".js") return "application/javascript";
      if (ext == ".css") return "text/css";
      if (ext == ".json") return "application/json";
      return "application/octet-stream";
    }

    void respond(http::status status, std::string body, std::string type = "text/plain") {
      auto res = std::make_shared<http::response<http::string_body>>(status, request_.version());
      res->set(http::field::content_type, type);
      res->keep_alive(false);
      res->body() = std::move(body);
      res->prepare_payload();
      http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      });
    }

    SessionServer& server_;
    beast::tcp_stream stream_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> request_;
  };

  class Connection : public std::enable_shared_from_this<Connection> {
   public:
    Connection(SessionServer& server, tcp::socket socket)
        : server_(server), ws_(std::move(socket)), timer_(server.ioc_) {}

    void accept(http::request<http::string_body> request) {
      ws_.text(true);
      ws_.async_accept(request, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
    }

    void shutdown() {
      if (closed_) return;
      finish();
      ws_.async_close(websocket::close_code::going_away, [self = shared_from_this()](beast::error_code) {});
    }

   private:
    void on_accept(beast::error_code ec) {
      if (ec) return finish();
      try {
        session_ = server_.factory_();
      } catch (const std::exception& e) {
        *server_.options_.diagnostics << "session setup failed: " << e.what() << '\n';
        return shutdown();
      }
      send(protocol::encode(protocol::ServerMessage{session_->snapshot()}));
      const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(1.0 / session_->log().tick_rate()));
      period_ = period;
      next_tick_ = std::chrono::steady_clock::now() + period_;
      schedule();
      read();
    }

    void read() {
      ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec) {
      if (ec) return finish();
      const std::string frame = beast::buffers_to_string(buffer_.data());
      buffer_.consume(buffer_.size());
      try {
        session_->submit(protocol::decode_client(frame));
      } catch (const protocol::ProtocolError& e) {
        send(protocol::encode(protocol::ServerMessage{protocol::ErrorReply{e.code(), e.what()}}));
      }
      read();
    }

    void schedule() {
      timer_.expires_at(next_tick_);
      timer_.async_wait([self = shared_from_this()](beast::error_code ec) { self->on_timer(ec); });
    }

    // Fixed-timestep accumulator: every elapsed period runs exactly one tick.
    void on_timer(beast::error_code ec) {
      if (ec || closed_) return;
      const auto now = std::chrono::steady_clock::now();
      int ran = 0;
      while (next_tick_ <= now && ran < kMaxCatchUp) {
        for (const auto& msg : session_->tick()) send(protocol::encode(msg));
        next_tick_ += period_;
        ++ran;
      }
      if (next_tick_ <= now) next_tick_ = now + period_;
      schedule();
    }

    void send(std::string frame) {
      if (closed_) return;
      outbox_.push_back(std::move(frame));
      if (outbox_.size() == 1) write_front();
    }

    void write_front() {
      ws_.async_write(asio::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
        if (ec) return self->finish();
        self->outbox_.pop_front();
        if (!self->outbox_.empty()) self->write_front();
      });
    }

    void finish() {
      if (closed_) return;
      closed_ = true;
      timer_.cancel();
      if (session_) {
        try {
          session_->flush();
        } catch (const std::exception& e) {
          *server_.options_.diagnostics << "log flush failed: " << e.what() << '\n';
        }
      }
    }

    static constexpr int kMaxCatchUp = 10;

    SessionServer& server_;
    websocket::stream<beast::tcp_stream> ws_;
    asio::steady_timer timer_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outbox_;
    std::unique_ptr<Session> session_;
    std::chrono::steady_clock::duration period_{};
    std::chrono::steady_clock::time_point next_tick_{};
    bool closed_{false};
  };

  void accept() {
    acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<HttpConnection>(*this, std::move(socket))->run();
      if (!stopping_) accept();
    });
  }

  asio::io_context& ioc_;
  ServerOptions options_;
  SessionFactory factory_;
  tcp::acceptor acceptor_;
  std::weak_ptr<Connection> active_;
  bool stopping_{false};
};

}  // namespace boir
