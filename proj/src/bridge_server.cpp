#include "tcube/bridge_server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include "tcube/error.hpp"

namespace tcube {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

struct BridgeServer::Impl {
  BridgeOptions options;
  asio::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::unique_ptr<asio::signal_set> signals;
  std::mutex mu;
  std::map<long, tcp::socket*> live;
  std::vector<std::thread> threads;
  long next_id = 0;
  bool stopping = false;

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (!ec) {
        std::lock_guard lock(mu);
        if (!stopping) {
          const long id = ++next_id;
          threads.emplace_back([this, id, s = std::move(socket)]() mutable { serve(id, std::move(s)); });
        }
      }
      if (acceptor.is_open()) accept();
    });
  }

  void serve(long id, tcp::socket socket) {
    BridgeOptions opt = options;
    opt.session_id = id;
    BridgeConnection conn(std::move(opt));
    try {
      websocket::stream<tcp::socket> ws(std::move(socket));
      {
        std::lock_guard lock(mu);
        if (stopping) return;
        live[id] = &ws.next_layer();
      }
      ws.accept();
      ws.text(true);
      for (;;) {
        beast::flat_buffer buf;
        ws.read(buf);
        for (const auto& out : conn.handle(beast::buffers_to_string(buf.data()))) ws.write(asio::buffer(out));
        if (conn.closed()) {
          ws.close(websocket::close_code::policy_error);
          break;
        }
      }
    } catch (const beast::system_error&) {
      // Peer went away or the server is shutting down.
    }
    conn.finish();
    std::lock_guard lock(mu);
    live.erase(id);
  }

  void shutdown() {
    beast::error_code ec;
    acceptor.close(ec);
    if (signals) signals->cancel(ec);
    std::lock_guard lock(mu);
    stopping = true;
    for (auto& [id, s] : live) s->shutdown(tcp::socket::shutdown_both, ec);
  }
};

BridgeServer::BridgeServer(BridgeOptions options, const std::string& address, unsigned short port)
    : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  beast::error_code ec;
  const auto addr = asio::ip::make_address(address, ec);
  if (ec) throw Error(Errc::io, "bad bind address '" + address + "'");
  const tcp::endpoint ep(addr, port);
  impl_->acceptor.open(ep.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(ep, ec);
  if (!ec) impl_->acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw Error(Errc::io, "cannot listen on " + address + ":" + std::to_string(port) + ": " + ec.message());
}

BridgeServer::~BridgeServer() {
  stop();
  for (auto& t : impl_->threads)
    if (t.joinable()) t.join();
}

unsigned short BridgeServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void BridgeServer::run() {
  impl_->accept();
  impl_->ioc.run();
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(impl_->mu);
    threads.swap(impl_->threads);
  }
  for (auto& t : threads) t.join();
}

void BridgeServer::stop() {
  asio::post(impl_->ioc, [impl = impl_.get()] { impl->shutdown(); });
}

void BridgeServer::stop_on_signals() {
  impl_->signals = std::make_unique<asio::signal_set>(impl_->ioc, SIGINT, SIGTERM);
  impl_->signals->async_wait([impl = impl_.get()](beast::error_code ec, int) {
    if (!ec) impl->shutdown();
  });
}

}  // namespace tcube
