#pragma once

// WebSocket transport for BridgeConnection: one text frame per message,
// one session per connection, one thread per connection.

#include <atomic>
#include <memory>
#include <string>

#include "tcube/bridge.hpp"

namespace tcube {

class BridgeServer {
 public:
  /// Binds immediately; throws Error{io} when the address cannot be bound.
  /// Port 0 picks a free port.
  BridgeServer(BridgeOptions options, const std::string& address, unsigned short port);
  ~BridgeServer();

  unsigned short port() const;
  /// Serves until stop() (or SIGINT/SIGTERM when enabled). Open
  /// connections are shut down and their recordings closed before return.
  void run();
  void stop();
  void stop_on_signals();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tcube
