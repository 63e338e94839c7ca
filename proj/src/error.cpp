#include "tcube/error.hpp"

namespace tcube {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::ordering: return "ordering";
    case Errc::malformed_sample: return "malformed-sample";
    case Errc::unknown_subject: return "unknown-subject";
    case Errc::unsupported_configuration: return "unsupported-configuration";
    case Errc::degenerate_configuration: return "degenerate-configuration";
    case Errc::insufficient_history: return "insufficient-history";
    case Errc::mismatched_universe: return "mismatched-universe";
    case Errc::schema: return "schema";
    case Errc::empty_selection: return "empty-selection";
    case Errc::alignment: return "alignment";
    case Errc::invalid_partition: return "invalid-partition";
    case Errc::insufficient_resolution: return "insufficient-resolution";
    case Errc::syntax: return "syntax";
    case Errc::unknown_event: return "unknown-event";
    case Errc::unknown_command: return "unknown-command";
    case Errc::duplicate_pattern: return "duplicate-pattern";
    case Errc::layout: return "layout";
    case Errc::stale_target: return "stale-target";
    case Errc::protocol: return "protocol";
    case Errc::io: return "io";
    case Errc::resolution: return "resolution";
  }
  return "unknown";
}

namespace {
std::string decorate(const std::string& message, int line, int column) {
  if (line <= 0) return message;
  std::string out = "line " + std::to_string(line);
  if (column > 0) out += ", column " + std::to_string(column);
  return out + ": " + message;
}
}  // namespace

Error::Error(Errc code, const std::string& message, int line, int column)
    : std::runtime_error(decorate(message, line, column)),
      code_(code),
      line_(line),
      column_(column) {}

}  // namespace tcube
