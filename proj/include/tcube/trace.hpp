#pragma once

// Trace files and deterministic replay.
//
//   #! tcube-trace 1
//   #! dataset health_expenditure
//   #! rulebook default
//   #! param recognizer.tap_max_duration = 0.25
//   pose t=0 cube=1 p=... q=...
//   ...
//
// `#! flush no` skips the end-of-trace flush. A `#! reset t=<t>` line in the
// body clears every binding at that point (session-wide reset).

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tcube/session.hpp"

namespace tcube {

struct TraceHeader {
  std::string dataset = "health_expenditure";
  std::string rulebook = "default";
  std::vector<std::pair<std::string, std::string>> params;
  bool flush = true;
  friend bool operator==(const TraceHeader&, const TraceHeader&) = default;
};

struct SessionReset {
  Seconds t = 0.0;
  friend bool operator==(const SessionReset&, const SessionReset&) = default;
};

using TraceEntry = std::variant<InputSample, SessionReset>;

struct TraceFile {
  TraceHeader header;
  std::vector<TraceEntry> body;
  std::vector<int> lines;  // source line of each body entry, when parsed
  friend bool operator==(const TraceFile& a, const TraceFile& b) {
    return a.header == b.header && a.body == b.body;
  }
};

std::string header_text(const TraceHeader& h);
std::string entry_text(const TraceEntry& e);
std::string trace_text(const TraceFile& f);

/// Throws Error{syntax} carrying the 1-based line of the first bad line.
TraceFile parse_trace(std::string_view text);
TraceFile load_trace_file(const std::string& path);

/// Incremental parser: accepts the document in arbitrary byte chunks.
class TraceReader {
 public:
  /// Returns body entries completed by this chunk. The header is available
  /// once the first body line (or the end) has been seen.
  std::vector<TraceEntry> feed(std::string_view chunk);
  std::vector<TraceEntry> finish();
  /// Source line of every entry returned so far.
  const std::vector<int>& entry_lines() const { return entry_lines_; }
  const TraceHeader& header() const { return header_; }
  bool header_done() const { return in_body_; }

 private:
  std::optional<TraceEntry> line(std::string_view text);

  TraceHeader header_;
  std::string pending_;
  std::vector<int> entry_lines_;
  int line_no_ = 0;
  bool seen_magic_ = false;
  bool in_body_ = false;
};

/// Where names in trace headers resolve. A reference containing '/' or
/// ending in the format extension is a path, relative to `base_dir`.
struct Catalog {
  std::string datasets_dir = TCUBE_DATA_DIR "/datasets";
  std::string rulebooks_dir = TCUBE_DATA_DIR "/rulebooks";
  std::string base_dir = ".";
};

/// Throw Error{resolution}.
SpaceTimeCube resolve_dataset(const std::string& ref, const Catalog& cat = {});
RuleBook resolve_rulebook(const std::string& ref, const Catalog& cat = {});
/// Applies header overrides to `base`; Error{syntax} on bad keys.
EngineConfig resolve_config(const TraceHeader& h, EngineConfig base = {});

/// Builds the session a trace header describes.
Session open_session(const TraceHeader& h, const Catalog& cat = {}, const EngineConfig& base = {});

struct ReplayResult {
  std::string log;          // concatenated StepReport text
  SessionSnapshot snapshot;
};

/// Feeds every entry through `session`, then flushes (unless the header
/// says not to). A rejected sample aborts the replay with its error,
/// re-positioned at the sample's source line.
ReplayResult replay(Session& session, const TraceFile& trace);
ReplayResult replay(const TraceFile& trace, const Catalog& cat = {}, const EngineConfig& base = {});
/// Same result, but the document text arrives in chunks of the given sizes
/// (cycled) through a TraceReader.
ReplayResult replay_chunked(std::string_view text, const std::vector<std::size_t>& chunk_sizes,
                            const Catalog& cat = {}, const EngineConfig& base = {});

}  // namespace tcube
