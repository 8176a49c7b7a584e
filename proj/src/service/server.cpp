#include "langmpc/service/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <fmt/format.h>

#include <deque>
#include <mutex>
#include <set>
#include <thread>

namespace langmpc::service {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

// A slow client that falls this far behind is dropped rather than buffered.
constexpr std::size_t kMaxQueuedFrames = 1024;

// Live subscriptions, so that stopping the server can detach every
// connection from the session before the connections are destroyed.
struct Registry {
  std::mutex mutex;
  std::set<int> sinks;
};

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, Session& session, std::shared_ptr<Registry> registry)
      : ws_(std::move(socket)), session_(session), registry_(std::move(registry)) {}

  ~Connection() { detach(); }

  void run() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(beast::bind_front_handler(&Connection::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) {
      return;
    }
    send(hello_frame(session_.scenario_name()));
    std::weak_ptr<Connection> weak = shared_from_this();
    sink_ = session_.subscribe([weak](const nlohmann::json& frame) {
      if (auto self = weak.lock()) {
        net::post(self->ws_.get_executor(), [self, frame] { self->send(frame); });
      }
    });
    {
      std::lock_guard lock(registry_->mutex);
      registry_->sinks.insert(sink_);
    }
    read();
  }

  void read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&Connection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      detach();
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    try {
      session_.handle(parse_inbound(text));
    } catch (const ProtocolError& e) {
      send(error_frame(e.what()));
    }
    read();
  }

  void send(nlohmann::json frame) {
    if (closed_) {
      return;
    }
    if (queue_.size() >= kMaxQueuedFrames) {
      detach();
      ws_.async_close(websocket::close_code::try_again_later, [self = shared_from_this()](beast::error_code) {});
      return;
    }
    frame["seq"] = seq_++;
    queue_.push_back(frame.dump());
    if (queue_.size() == 1) {
      write();
    }
  }

  void write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()), beast::bind_front_handler(&Connection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      detach();
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) {
      write();
    }
  }

  void detach() {
    closed_ = true;
    if (sink_ >= 0) {
      session_.unsubscribe(sink_);
      std::lock_guard lock(registry_->mutex);
      registry_->sinks.erase(sink_);
      sink_ = -1;
    }
  }

  websocket::stream<beast::tcp_stream> ws_;
  Session& session_;
  std::shared_ptr<Registry> registry_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  std::uint64_t seq_{0};
  int sink_{-1};
  bool closed_{false};
};

}  // namespace

struct WebSocketServer::Impl {
  Impl(Session& s, std::string a, unsigned short p) : session(s), address(std::move(a)), port(p) {}

  void accept() {
    acceptor.async_accept(net::make_strand(io), [this](beast::error_code ec, tcp::socket socket) {
      if (!ec) {
        std::make_shared<Connection>(std::move(socket), session, registry)->run();
      }
      if (acceptor.is_open()) {
        accept();
      }
    });
  }

  Session& session;
  std::shared_ptr<Registry> registry = std::make_shared<Registry>();
  std::string address;
  unsigned short port;
  net::io_context io{1};
  tcp::acceptor acceptor{io};
  std::thread thread;
};

WebSocketServer::WebSocketServer(Session& session, std::string address, unsigned short port)
    : impl_(std::make_unique<Impl>(session, std::move(address), port)) {}

WebSocketServer::~WebSocketServer() { stop(); }

void WebSocketServer::start() {
  if (impl_->thread.joinable()) {
    return;
  }
  try {
    const tcp::endpoint endpoint{net::ip::make_address(impl_->address), impl_->port};
    impl_->acceptor.open(endpoint.protocol());
    impl_->acceptor.set_option(net::socket_base::reuse_address(true));
    impl_->acceptor.bind(endpoint);
    impl_->acceptor.listen(net::socket_base::max_listen_connections);
  } catch (const boost::system::system_error& e) {
    throw std::runtime_error(fmt::format("cannot listen on {}:{}: {}", impl_->address, impl_->port, e.what()));
  }
  impl_->port = impl_->acceptor.local_endpoint().port();
  impl_->accept();
  impl_->thread = std::thread([this] { impl_->io.run(); });
}

void WebSocketServer::stop() {
  if (!impl_->thread.joinable()) {
    return;
  }
  net::post(impl_->io, [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
  });
  impl_->io.stop();
  impl_->thread.join();
  std::lock_guard lock(impl_->registry->mutex);
  for (const int id : impl_->registry->sinks) {
    impl_->session.unsubscribe(id);
  }
  impl_->registry->sinks.clear();
}

unsigned short WebSocketServer::port() const { return impl_->port; }

}  // namespace langmpc::service
