#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tcube {

enum class Errc {
  invalid_argument,
  ordering,
  malformed_sample,
  unknown_subject,
  unsupported_configuration,
  degenerate_configuration,
  insufficient_history,
  mismatched_universe,
  schema,
  empty_selection,
  alignment,
  invalid_partition,
  insufficient_resolution,
  syntax,
  unknown_event,
  unknown_command,
  duplicate_pattern,
  layout,
  stale_target,
  protocol,
  io,
  resolution,
};

std::string_view to_string(Errc code);

/// Every failure raised by the engine carries one of the codes above.
/// Parse failures additionally carry a 1-based line/column (0 = unknown).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, int line = 0, int column = 0);

  Errc code() const noexcept { return code_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  Errc code_;
  int line_;
  int column_;
};

}  // namespace tcube
