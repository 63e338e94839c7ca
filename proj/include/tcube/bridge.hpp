#pragma once

// Session-per-connection message protocol. One message per frame, text.
//
// client -> server
//   hello version=1 dataset=<ref> rulebook=<ref>
//   sample <canonical sample line>          e.g. "sample pose t=0.04 cube=1 ..."
//   snapshot_request
//   record on | record off
//   reset                                   session-wide reset
//
// server -> client
//   welcome version=1 session=<n> dataset=<name> rulebook=<name>
//     followed by layout, slot and dataset lines
//   report seq=<n>                          then the StepReport lines
//   snapshot                                then the snapshot lines
//   recording state=on|off file=<path> samples=<n>
//   error code=<errc> message=<escaped text>
//
// Protocol violations (anything before hello, a second hello, unknown
// message kinds, unresolvable hello) answer with an error and close the
// connection. A rejected sample answers with an error and the connection
// stays open; the sample is not applied or recorded.

#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tcube/trace.hpp"

namespace tcube {

inline constexpr int kBridgeVersion = 1;

struct BridgeOptions {
  Catalog catalog;
  EngineConfig config;
  std::string record_dir = ".";
  long session_id = 1;  // shown in welcome; names recordings session-<id>-<k>.trace
};

class BridgeConnection {
 public:
  explicit BridgeConnection(BridgeOptions options);
  ~BridgeConnection();

  /// Handles one client message and returns the server messages it
  /// produces, in order.
  std::vector<std::string> handle(std::string_view message);
  /// Stops any recording. Called on disconnect and on shutdown.
  void finish();

  bool closed() const { return closed_; }
  bool started() const { return session_.has_value(); }
  const Session* session() const { return session_ ? &*session_ : nullptr; }
  /// Files written by `record on` so far.
  const std::vector<std::string>& recordings() const { return recordings_; }

 private:
  std::vector<std::string> hello(std::string_view args);
  std::vector<std::string> sample(std::string_view line);
  std::vector<std::string> record(std::string_view arg);
  std::vector<std::string> reset(std::string_view args);
  std::string report(const StepReport& r);
  std::string stop_recording();
  void write(const std::string& line);

  BridgeOptions opt_;
  std::optional<Session> session_;
  TraceHeader header_;
  long seq_ = 0;
  bool closed_ = false;
  std::unique_ptr<std::ofstream> recorder_;
  std::size_t recorded_ = 0;
  std::vector<std::string> recordings_;
};

std::string error_message(Errc code, std::string_view message);
std::string welcome_message(const Session& s, long session_id);

/// Splits a server message into its head line and body lines.
struct WireMessage {
  std::string head;                 // first token
  std::string first_line;
  std::vector<std::string> body;
};
WireMessage parse_wire(std::string_view message);

}  // namespace tcube
