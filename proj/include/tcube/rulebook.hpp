#pragma once

// Interaction -> command mapping. Text form:
//
//   #! tcube-rulebook 1
//   # name: extended
//   tap -> recolor
//   pinch.edge -> rescale{granularity=step}
//   neighbored@component -> combine{mode=neighbored}
//   double_tap -> overview|detail
//
// A pattern is an event kind with an optional qualifier (pinch: edge,
// surface; rotate: x, y, z; swipe: +u, -u, +v, -v) and an optional subject
// kind (@cube, @component). `a|b` on the command side toggles between two
// command kinds.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tcube/datacube.hpp"
#include "tcube/model.hpp"

namespace tcube {

struct EventPattern {
  EventKind kind = EventKind::tap;
  std::optional<std::string> qualifier;
  std::optional<bool> component;  // nullopt matches either subject kind
  friend bool operator==(const EventPattern&, const EventPattern&) = default;
};

struct CommandTemplate {
  CommandKind kind = CommandKind::recolor;
  std::optional<CommandKind> toggle;            // second kind of an a|b toggle
  std::map<std::string, std::string> params;    // validated at parse time
  friend bool operator==(const CommandTemplate&, const CommandTemplate&) = default;
};

struct Rule {
  EventPattern pattern;
  CommandTemplate command;
  int line = 0;
  friend bool operator==(const Rule&, const Rule&) = default;
};

struct RuleBook {
  std::string name;
  std::string description;
  std::vector<Rule> rules;
};

struct Conflict {
  std::size_t first = 0;   // rule indices
  std::size_t second = 0;
  std::string message;
};

std::string to_text(const EventPattern& p);
std::string to_text(const CommandTemplate& c);
std::string to_text(const RuleBook& book);

/// Throws Error{syntax|unknown_event|unknown_command|duplicate_pattern}
/// with the line and column of the offending token.
RuleBook parse_rulebook(std::string_view text);
RuleBook load_rulebook_file(const std::string& path);

/// Parses one `pattern -> command` line.
Rule parse_rule(std::string_view line, int line_number = 0);
/// Checks a single template against the parameter grammar of its kind.
void check_template(const CommandTemplate& t, int line = 0, int column = 0);

/// Pairs of rules whose patterns overlap. Empty iff every event maps to at
/// most one command kind.
std::vector<Conflict> validate(const RuleBook& book);
bool patterns_overlap(const EventPattern& a, const EventPattern& b);

const RuleBook& default_rulebook();
const RuleBook& extended_rulebook();
const RuleBook& weather_rulebook();
const RuleBook& demographic_rulebook();
/// Built-in rulebook by name, or nullptr.
const RuleBook* builtin_rulebook(std::string_view name);

/// Presentation state of the chart a cube's series lives in; commands whose
/// parameters depend on it (toggles, cycles, steps) read it here.
struct ViewInfo {
  VisType vis = VisType::bar;
  bool detail = false;
  bool initiated = false;
  std::vector<TimeBin> source_bins;
  std::size_t first = 0;       // visible source bin range [first, last)
  std::size_t last = 0;
  long long granularity = 0;   // current bin width
};

class DispatchContext {
 public:
  virtual ~DispatchContext() = default;
  virtual bool is_bound(CubeId cube) const = 0;
  virtual bool in_map_region(CubeId cube) const = 0;
  virtual ViewInfo view(CubeId cube) const = 0;
};

/// Qualifier an event carries, if its kind has one.
std::optional<std::string> qualifier_of(const InteractionEvent& e);

/// First matching rule instantiated against `event`. Events on unbound
/// cubes yield nothing, except PickUp and PutDown; events in the map
/// region yield nothing.
std::optional<VisualizationCommand> dispatch(const RuleBook& book, const InteractionEvent& event,
                                             const DispatchContext& ctx);

}  // namespace tcube
