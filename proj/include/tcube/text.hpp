#pragma once

// Canonical one-line text forms. Fields are space separated `key=value`
// tokens in a fixed order; numbers use the shortest representation that
// round-trips exactly.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tcube/model.hpp"

namespace tcube {

std::string format_number(double v);
std::optional<double> parse_number(std::string_view s);
std::optional<long long> parse_integer(std::string_view s);

std::string to_text(const InputSample& sample);
std::string to_text(const InteractionEvent& event);
std::string to_text(const VisualizationCommand& command);
std::string to_text(const Subject& subject);
std::string to_text(const Target& target);

/// Free text inside a key=value token: space, '%', '=', ',' and newline
/// are percent-encoded; the empty string becomes "-".
std::string escape_value(std::string_view s);
std::string unescape_value(std::string_view s);

/// Parse failures throw Error{syntax} with the 1-based column of the
/// offending token; `line` is attached when the caller knows it.
InputSample parse_sample(std::string_view line, int line_number = 0);
InteractionEvent parse_event(std::string_view line, int line_number = 0);
VisualizationCommand parse_command(std::string_view line, int line_number = 0);

/// Payload alternative index each event/command kind carries.
std::size_t payload_index_for(EventKind kind);
std::size_t params_index_for(CommandKind kind);

/// Splits `key=value` tokens of one canonical line, remembering columns.
class FieldReader {
 public:
  FieldReader(std::string_view line, int line_number);

  /// The leading bare word (record type).
  std::string_view head() const { return head_; }
  bool done() const { return next_ >= tokens_.size(); }
  std::string_view peek_key() const;

  /// Returns the value of the next token, which must have key `key`.
  std::string_view take(std::string_view key);
  std::optional<std::string_view> take_optional(std::string_view key);
  void finish() const;

  [[noreturn]] void fail(const std::string& message) const;
  double number(std::string_view key);
  long long integer(std::string_view key);
  std::uint32_t id(std::string_view key);
  Vec3 vec3(std::string_view key);

 private:
  struct Token {
    std::string_view key;
    std::string_view value;
    int column;
  };
  std::string_view head_;
  std::vector<Token> tokens_;
  std::size_t next_ = 0;
  int line_;
  int current_column_ = 1;
};

std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace tcube
