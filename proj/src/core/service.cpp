#include "service.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "error.hpp"
#include "live.hpp"

namespace hf {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

class Client;

} // namespace

struct SimService::Impl {
  Impl(Scenario s, ServiceOptions o) : scenario(std::move(s)), options(o), acceptor(ioc) {}

  void do_accept();
  void add(std::shared_ptr<Client> c);
  void remove(std::uint64_t id);
  void on_message(std::uint64_t id, const std::string &text);
  void send_to(std::uint64_t id, std::string text);
  void broadcast(std::string text);
  void sim_loop();

  Scenario scenario;
  ServiceOptions options;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::optional<net::executor_work_guard<net::io_context::executor_type>> work;
  std::thread io_thread;
  std::thread sim_thread;
  std::atomic<bool> stopping{false};
  std::atomic<bool> started{false};
  std::uint16_t bound_port = 0;

  // io thread only
  std::map<std::uint64_t, std::shared_ptr<Client>> clients;
  std::uint64_t next_id = 1;

  std::mutex inbox_mutex;
  std::deque<std::pair<std::uint64_t, InboundMessage>> inbox;
};

namespace {

json error_reply(std::string_view request, const std::string &reason) {
  return {{"type", "error"}, {"request", request}, {"reason", reason}};
}

class Client : public std::enable_shared_from_this<Client> {
public:
  Client(tcp::socket socket, SimService::Impl &owner, std::uint64_t id)
      : ws_(std::move(socket)), owner_(owner), id_(id) {}

  std::uint64_t id() const { return id_; }

  void run() {
    http::async_read(ws_.next_layer(), buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       self->on_request(ec);
                     });
  }

  void send(std::shared_ptr<const std::string> text) {
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) do_write();
  }

  void close() {
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
    beast::get_lowest_layer(ws_).socket().close(ec);
  }

private:
  void on_request(beast::error_code ec) {
    if (ec) return;
    if (!websocket::is_upgrade(request_) || request_.target() != "/sim") {
      response_.version(request_.version());
      response_.result(http::status::not_found);
      response_.set(http::field::content_type, "text/plain");
      response_.body() = "websocket endpoint is /sim\n";
      response_.prepare_payload();
      http::async_write(ws_.next_layer(), response_,
                        [self = shared_from_this()](beast::error_code, std::size_t) {
                          self->close();
                        });
      return;
    }
    ws_.async_accept(request_, [self = shared_from_this()](beast::error_code ec2) {
      if (ec2) return;
      self->ws_.text(true);
      self->owner_.add(self);
      self->do_read();
    });
  }

  void do_read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->owner_.remove(self->id_);
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->owner_.on_message(self->id_, text);
      self->do_read();
    });
  }

  void do_write() {
    ws_.async_write(net::buffer(*queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) {
                        self->queue_.clear();
                        self->owner_.remove(self->id_);
                        return;
                      }
                      self->queue_.pop_front();
                      if (!self->queue_.empty()) self->do_write();
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
  http::response<http::string_body> response_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  SimService::Impl &owner_;
  std::uint64_t id_;
};

} // namespace

void SimService::Impl::do_accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return; // closed
    std::make_shared<Client>(std::move(socket), *this, next_id++)->run();
    do_accept();
  });
}

void SimService::Impl::add(std::shared_ptr<Client> c) {
  if (stopping) {
    c->close();
    return;
  }
  clients.emplace(c->id(), std::move(c));
}

void SimService::Impl::remove(std::uint64_t id) { clients.erase(id); }

void SimService::Impl::on_message(std::uint64_t id, const std::string &text) {
  std::optional<InboundMessage> msg;
  try {
    msg = parse_inbound(text);
  } catch (const Error &e) {
    send_to(id, error_reply("unknown", e.what()).dump());
    return;
  }
  if (clients.empty() || clients.begin()->first != id) {
    send_to(id, error_reply(message_type(*msg), "observer clients cannot control the simulation")
                    .dump());
    return;
  }
  std::lock_guard lock(inbox_mutex);
  inbox.emplace_back(id, std::move(*msg));
}

void SimService::Impl::send_to(std::uint64_t id, std::string text) {
  auto it = clients.find(id);
  if (it == clients.end()) return;
  it->second->send(std::make_shared<const std::string>(std::move(text)));
}

void SimService::Impl::broadcast(std::string text) {
  auto shared = std::make_shared<const std::string>(std::move(text));
  for (auto &[id, c] : clients) c->send(shared);
}

void SimService::Impl::sim_loop() {
  LiveSession session(scenario);
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(1.0 / scenario.fish.tick_rate));
  const double snapshot_every = 1.0 / options.snapshot_rate;
  double since_snapshot = snapshot_every; // first tick sends one
  auto next = clock::now();

  while (!stopping) {
    std::deque<std::pair<std::uint64_t, InboundMessage>> pending;
    {
      std::lock_guard lock(inbox_mutex);
      pending.swap(inbox);
    }
    for (auto &[id, msg] : pending) {
      const std::string type(message_type(msg));
      std::string reply;
      try {
        session.apply(msg);
        reply = json{{"type", "ack"}, {"request", type}}.dump();
      } catch (const Error &e) {
        reply = error_reply(type, e.what()).dump();
      }
      net::post(ioc, [this, id, reply = std::move(reply)]() mutable {
        send_to(id, std::move(reply));
      });
    }

    try {
      if (session.advance()) {
        since_snapshot += 1.0 / scenario.fish.tick_rate;
        if (since_snapshot >= snapshot_every - 1e-9) {
          since_snapshot -= snapshot_every;
          if (since_snapshot > snapshot_every) since_snapshot = 0.0;
          net::post(ioc, [this, text = session.snapshot().dump()]() mutable {
            broadcast(std::move(text));
          });
        }
      }
    } catch (const Error &e) {
      net::post(ioc, [this, text = error_reply("tick", e.what()).dump()]() mutable {
        broadcast(std::move(text));
      });
    }

    next += period;
    const auto now = clock::now();
    if (next < now - 10 * period) next = now; // fell far behind; do not burst
    std::this_thread::sleep_until(next);
  }
}

SimService::SimService(Scenario scenario, ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(scenario), options)) {
  if (!(options.snapshot_rate > 0.0)) {
    fail(ErrorCode::InvalidArgument, "snapshot rate must be positive");
  }
  impl_->scenario.validate();
}

SimService::~SimService() { stop(); }

void SimService::start() {
  Impl &m = *impl_;
  if (m.started) return;
  try {
    const tcp::endpoint ep(net::ip::make_address(m.options.address), m.options.port);
    m.acceptor.open(ep.protocol());
    m.acceptor.set_option(net::socket_base::reuse_address(true));
    m.acceptor.bind(ep);
    m.acceptor.listen();
    m.bound_port = m.acceptor.local_endpoint().port();
  } catch (const boost::system::system_error &e) {
    fail(ErrorCode::Io, "cannot listen on " + m.options.address + ":" +
                            std::to_string(m.options.port) + ": " + e.code().message());
  }
  m.stopping = false;
  m.work.emplace(net::make_work_guard(m.ioc));
  m.do_accept();
  m.io_thread = std::thread([&m] { m.ioc.run(); });
  m.sim_thread = std::thread([&m] { m.sim_loop(); });
  m.started = true;
}

void SimService::stop() {
  Impl &m = *impl_;
  if (!m.started) return;
  m.stopping = true;
  if (m.sim_thread.joinable()) m.sim_thread.join();
  net::post(m.ioc, [&m] {
    beast::error_code ec;
    m.acceptor.close(ec);
    for (auto &[id, c] : m.clients) c->close();
    m.clients.clear();
  });
  m.work.reset();
  if (m.io_thread.joinable()) m.io_thread.join();
  m.started = false;
}

bool SimService::running() const { return impl_->started; }

std::uint16_t SimService::port() const { return impl_->bound_port; }

} // namespace hf
