#include "tcube/rulebook.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tcube/error.hpp"
#include "tcube/text.hpp"

namespace tcube {

namespace {

struct Piece {
  std::string_view text;
  int column;  // 1-based
};

Piece trim(Piece p) {
  while (!p.text.empty() && (p.text.front() == ' ' || p.text.front() == '\t')) {
    p.text.remove_prefix(1);
    ++p.column;
  }
  while (!p.text.empty() &&
         (p.text.back() == ' ' || p.text.back() == '\t' || p.text.back() == '\r'))
    p.text.remove_suffix(1);
  return p;
}

[[noreturn]] void fail(Errc code, const std::string& msg, int line, int column) {
  throw Error(code, msg, line, column);
}

const std::vector<std::string_view>* qualifiers_for(EventKind k) {
  static const std::vector<std::string_view> pinch{"edge", "surface"};
  static const std::vector<std::string_view> rotate{"x", "y", "z"};
  static const std::vector<std::string_view> swipe{"+u", "-u", "+v", "-v"};
  switch (k) {
    case EventKind::pinch: return &pinch;
    case EventKind::rotate: return &rotate;
    case EventKind::swipe: return &swipe;
    default: return nullptr;
  }
}

bool positive_int(std::string_view s) {
  auto v = parse_integer(s);
  return v && *v > 0 && *v < 1000000;
}

bool positive_number(std::string_view s) {
  auto v = parse_number(s);
  return v && std::isfinite(*v) && *v > 0;
}

bool finite_number(std::string_view s) {
  auto v = parse_number(s);
  return v && std::isfinite(*v);
}

bool is_int(std::string_view s) {
  auto v = parse_integer(s);
  return v && *v > -1000000000LL && *v < 1000000000LL;
}

struct ParamSpec {
  std::string_view key;
  bool (*valid)(std::string_view);
  std::string_view fallback;  // empty: optional without default
};

bool valid_granularity(std::string_view s) { return s == "step" || positive_int(s); }
bool valid_vis_list(std::string_view s) {
  for (auto part : split(s, '|'))
    if (!parse_vis_type(part)) return false;
  return true;
}
bool valid_mode(std::string_view s) { return parse_combine_mode(s).has_value(); }
bool valid_key(std::string_view s) { return parse_sort_key(s).has_value(); }
bool valid_axis(std::string_view s) { return parse_data_axis(s).has_value(); }
bool valid_aggregator(std::string_view s) { return parse_aggregator(s).has_value(); }
bool valid_parts(std::string_view s) { return s == "members" || positive_int(s); }
bool valid_factor(std::string_view s) { return s == "ratio" || positive_number(s); }

std::vector<ParamSpec> specs_for(CommandKind k) {
  switch (k) {
    case CommandKind::rescale: return {{"granularity", valid_granularity, "step"}};
    case CommandKind::switch_vis: return {{"vis", valid_vis_list, "bar|line"}};
    case CommandKind::combine: return {{"mode", valid_mode, "neighbored"}};
    case CommandKind::sort: return {{"key", valid_key, "value_desc"}};
    case CommandKind::flatten:
      return {{"axis", valid_axis, "time"}, {"aggregator", valid_aggregator, "sum"}};
    case CommandKind::chop: return {{"axis", valid_axis, "time"}, {"parts", valid_parts, "members"}};
    case CommandKind::adjust_range:
      return {{"axis", valid_axis, "time"}, {"lo", is_int, ""}, {"hi", is_int, ""}};
    case CommandKind::zoom: return {{"factor", valid_factor, "ratio"}};
    case CommandKind::pan: return {{"step", finite_number, "0.1"}};
    default: return {};
  }
}

bool toggleable(CommandKind a, CommandKind b) {
  auto pair = [](CommandKind x, CommandKind y, CommandKind p, CommandKind q) {
    return (x == p && y == q) || (x == q && y == p);
  };
  return pair(a, b, CommandKind::overview, CommandKind::detail) ||
         pair(a, b, CommandKind::initiate, CommandKind::terminate);
}

EventPattern parse_pattern(Piece p, int line) {
  p = trim(p);
  if (p.text.empty()) fail(Errc::syntax, "missing event pattern", line, p.column);
  EventPattern out;
  std::string_view rest = p.text;
  std::optional<Piece> subject, qualifier;
  if (auto at = rest.find('@'); at != std::string_view::npos) {
    subject = Piece{rest.substr(at + 1), p.column + int(at) + 1};
    rest = rest.substr(0, at);
  }
  if (auto dot = rest.find('.'); dot != std::string_view::npos) {
    qualifier = Piece{rest.substr(dot + 1), p.column + int(dot) + 1};
    rest = rest.substr(0, dot);
  }
  auto kind = parse_event_kind(rest);
  if (!kind) fail(Errc::unknown_event, "unknown event '" + std::string(rest) + "'", line, p.column);
  out.kind = *kind;
  if (qualifier) {
    const auto* allowed = qualifiers_for(out.kind);
    if (!allowed || std::find(allowed->begin(), allowed->end(), qualifier->text) == allowed->end())
      fail(Errc::syntax,
           "invalid qualifier '" + std::string(qualifier->text) + "' for " + std::string(rest),
           line, qualifier->column);
    out.qualifier = std::string(qualifier->text);
  }
  if (subject) {
    if (subject->text == "cube")
      out.component = false;
    else if (subject->text == "component")
      out.component = true;
    else
      fail(Errc::syntax, "subject must be @cube or @component", line, subject->column);
  }
  return out;
}

CommandTemplate parse_template(Piece p, int line) {
  p = trim(p);
  if (p.text.empty()) fail(Errc::syntax, "missing command", line, p.column);
  CommandTemplate out;
  std::string_view head = p.text;
  std::optional<Piece> params;
  if (auto brace = head.find('{'); brace != std::string_view::npos) {
    if (head.back() != '}')
      fail(Errc::syntax, "parameter list must end with '}'", line, p.column + int(head.size()) - 1);
    params = Piece{head.substr(brace + 1, head.size() - brace - 2), p.column + int(brace) + 1};
    head = head.substr(0, brace);
  }
  std::string_view first = head, second;
  int second_col = 0;
  if (auto bar = head.find('|'); bar != std::string_view::npos) {
    first = head.substr(0, bar);
    second = head.substr(bar + 1);
    second_col = p.column + int(bar) + 1;
  }
  auto kind = parse_command_kind(first);
  if (!kind)
    fail(Errc::unknown_command, "unknown command '" + std::string(first) + "'", line, p.column);
  out.kind = *kind;
  if (second_col) {
    auto k2 = parse_command_kind(second);
    if (!k2)
      fail(Errc::unknown_command, "unknown command '" + std::string(second) + "'", line, second_col);
    if (!toggleable(*kind, *k2))
      fail(Errc::syntax, "commands " + std::string(first) + " and " + std::string(second) +
                             " do not form a toggle",
           line, p.column);
    out.toggle = *k2;
  }
  if (params && !params->text.empty()) {
    int col = params->column;
    for (auto item : split(params->text, ',')) {
      auto eq = item.find('=');
      if (eq == std::string_view::npos || eq == 0)
        fail(Errc::syntax, "expected key=value in parameter list", line, col);
      std::string key(item.substr(0, eq));
      if (out.params.count(key)) fail(Errc::syntax, "repeated parameter '" + key + "'", line, col);
      out.params[key] = std::string(item.substr(eq + 1));
      col += int(item.size()) + 1;
    }
  }
  check_template(out, line, p.column);
  for (const auto& spec : specs_for(out.kind))
    if (!spec.fallback.empty() && !out.params.count(std::string(spec.key)))
      out.params[std::string(spec.key)] = std::string(spec.fallback);
  return out;
}

}  // namespace

void check_template(const CommandTemplate& t, int line, int column) {
  const auto specs = specs_for(t.kind);
  for (const auto& [key, value] : t.params) {
    auto it = std::find_if(specs.begin(), specs.end(), [&](const ParamSpec& s) { return s.key == key; });
    if (it == specs.end())
      fail(Errc::syntax, "command " + std::string(to_string(t.kind)) + " has no parameter '" + key + "'",
           line, column);
    if (!it->valid(value))
      fail(Errc::syntax, "invalid value '" + value + "' for parameter '" + key + "'", line, column);
  }
  if (t.kind == CommandKind::adjust_range && t.params.count("lo") != t.params.count("hi"))
    fail(Errc::syntax, "adjust_range needs both lo and hi, or neither", line, column);
}

Rule parse_rule(std::string_view line, int line_number) {
  auto arrow = line.find("->");
  if (arrow == std::string_view::npos) fail(Errc::syntax, "expected '->'", line_number, 1);
  Rule r;
  r.line = line_number;
  r.pattern = parse_pattern({line.substr(0, arrow), 1}, line_number);
  r.command = parse_template({line.substr(arrow + 2), int(arrow) + 3}, line_number);
  return r;
}

bool patterns_overlap(const EventPattern& a, const EventPattern& b) {
  if (a.kind != b.kind) return false;
  if (a.qualifier && b.qualifier && *a.qualifier != *b.qualifier) return false;
  if (a.component && b.component && *a.component != *b.component) return false;
  return true;
}

std::vector<Conflict> validate(const RuleBook& book) {
  std::vector<Conflict> out;
  for (std::size_t i = 0; i < book.rules.size(); ++i)
    for (std::size_t j = i + 1; j < book.rules.size(); ++j) {
      const auto& a = book.rules[i];
      const auto& b = book.rules[j];
      if (!patterns_overlap(a.pattern, b.pattern)) continue;
      std::string msg = "'" + to_text(a.pattern) + " -> " + to_text(a.command) + "' and '" +
                        to_text(b.pattern) + " -> " + to_text(b.command) + "' ";
      msg += a.command.kind == b.command.kind ? "repeat the same pattern"
                                              : "map one interaction to two commands";
      out.push_back({i, j, msg});
    }
  return out;
}

RuleBook parse_rulebook(std::string_view text) {
  RuleBook book;
  bool header = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    Piece line = trim({text.substr(pos, end - pos), 1});
    pos = end + 1;
    ++line_no;
    if (!header) {
      if (line.text != "#! tcube-rulebook 1")
        fail(Errc::syntax, "missing '#! tcube-rulebook 1' header", line_no, 1);
      header = true;
    } else if (line.text.starts_with("#")) {
      auto body = trim({line.text.substr(1), line.column + 1}).text;
      if (body.starts_with("name:")) book.name = trim({body.substr(5), 0}).text;
      if (body.starts_with("description:")) book.description = trim({body.substr(12), 0}).text;
    } else if (!line.text.empty()) {
      Rule r = parse_rule(line.text, line_no);
      for (const auto& prev : book.rules)
        if (patterns_overlap(prev.pattern, r.pattern))
          fail(Errc::duplicate_pattern,
               "pattern '" + to_text(r.pattern) + "' overlaps the rule on line " +
                   std::to_string(prev.line),
               line_no, line.column);
      book.rules.push_back(std::move(r));
    }
    if (end == text.size()) break;
  }
  if (!header) fail(Errc::syntax, "empty rulebook", 1, 1);
  return book;
}

RuleBook load_rulebook_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open rulebook '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_rulebook(ss.str());
}

std::string to_text(const EventPattern& p) {
  std::string s(to_string(p.kind));
  if (p.qualifier) s += "." + *p.qualifier;
  if (p.component) s += *p.component ? "@component" : "@cube";
  return s;
}

std::string to_text(const CommandTemplate& c) {
  std::string s(to_string(c.kind));
  if (c.toggle) s += "|" + std::string(to_string(*c.toggle));
  if (!c.params.empty()) {
    s += '{';
    bool first = true;
    for (const auto& spec : specs_for(c.kind)) {
      auto it = c.params.find(std::string(spec.key));
      if (it == c.params.end()) continue;
      s += (first ? "" : ",") + it->first + "=" + it->second;
      first = false;
    }
    s += '}';
  }
  return s;
}

std::string to_text(const RuleBook& book) {
  std::string s = "#! tcube-rulebook 1\n";
  if (!book.name.empty()) s += "# name: " + book.name + "\n";
  if (!book.description.empty()) s += "# description: " + book.description + "\n";
  for (const auto& r : book.rules) s += to_text(r.pattern) + " -> " + to_text(r.command) + "\n";
  return s;
}

// ---------------------------------------------------------------------------
// Built-ins

namespace {

constexpr std::string_view kDefault = R"(#! tcube-rulebook 1
# name: default
# description: curated core mappings
tap -> recolor
neighbored -> combine{mode=neighbored}
stacked -> combine{mode=stacked}
assembled -> combine{mode=structure}
cover -> hide
uncover -> show
shake -> reset
)";

constexpr std::string_view kExtendedRules = R"(pinch.edge -> rescale{granularity=step}
pinch.surface -> zoom{factor=ratio}
rotate -> switch_vis{vis=bar|line}
press -> flatten{axis=time,aggregator=sum}
double_tap -> overview|detail
disassembled -> chop{axis=time,parts=members}
swipe -> adjust_range{axis=time}
pick_up -> initiate
hover_open -> add
hover_fist -> subtract
)";

constexpr std::string_view kWeather = R"(#! tcube-rulebook 1
# name: weather
# description: daily station series; rotation browses, grouping compares
tap -> recolor
rotate.x -> switch_vis{vis=line|pictogram}
rotate.z -> pan{step=0.1}
neighbored -> combine{mode=small_multiples}
assembled -> combine{mode=small_multiples}
stacked -> combine{mode=stacked}
cover -> hide
uncover -> show
shake -> reset
)";

constexpr std::string_view kDemographic = R"(#! tcube-rulebook 1
# name: demographic
# description: population by district
tap -> recolor
neighbored -> combine{mode=small_multiples}
stacked -> combine{mode=stacked}
swipe -> adjust_range{axis=time}
cover -> hide
uncover -> show
shake -> reset
)";

std::string extended_text() {
  std::string s(kDefault);
  s.replace(s.find("# name: default"), 15, "# name: extended");
  s.replace(s.find("# description: curated core mappings"), 36,
            "# description: core mappings plus the full interaction set");
  return s + std::string(kExtendedRules);
}

}  // namespace

const RuleBook& default_rulebook() {
  static const RuleBook book = parse_rulebook(kDefault);
  return book;
}

const RuleBook& extended_rulebook() {
  static const RuleBook book = parse_rulebook(extended_text());
  return book;
}

const RuleBook& weather_rulebook() {
  static const RuleBook book = parse_rulebook(kWeather);
  return book;
}

const RuleBook& demographic_rulebook() {
  static const RuleBook book = parse_rulebook(kDemographic);
  return book;
}

const RuleBook* builtin_rulebook(std::string_view name) {
  if (name == "default") return &default_rulebook();
  if (name == "extended") return &extended_rulebook();
  if (name == "weather") return &weather_rulebook();
  if (name == "demographic") return &demographic_rulebook();
  return nullptr;
}

// ---------------------------------------------------------------------------
// Dispatch

std::optional<std::string> qualifier_of(const InteractionEvent& e) {
  if (auto* p = std::get_if<PinchInfo>(&e.payload)) return std::string(to_string(p->site));
  if (auto* r = std::get_if<RotateInfo>(&e.payload)) return std::string(to_string(r->axis));
  if (auto* s = std::get_if<SwipeInfo>(&e.payload)) return std::string(to_string(s->direction));
  return std::nullopt;
}

namespace {

bool matches(const EventPattern& p, const InteractionEvent& e, const std::optional<std::string>& q) {
  if (p.kind != e.kind) return false;
  if (p.qualifier && p.qualifier != q) return false;
  if (p.component && *p.component != e.subject.component) return false;
  return true;
}

bool state_active(CommandKind k, const ViewInfo& v) {
  switch (k) {
    case CommandKind::detail: return v.detail;
    case CommandKind::overview: return !v.detail;
    case CommandKind::initiate: return v.initiated;
    case CommandKind::terminate: return !v.initiated;
    default: return false;
  }
}

long long rescale_step(const ViewInfo& v, bool coarser) {
  if (v.source_bins.empty()) return v.granularity;
  const long long w = v.source_bins.front().width();
  const long long n = static_cast<long long>(v.source_bins.size());
  std::vector<long long> valid;
  for (long long m = 1; m <= n; ++m)
    if (n % m == 0) valid.push_back(w * m);
  if (coarser) {
    for (long long g : valid)
      if (g > v.granularity) return g;
    return v.granularity * 2;
  }
  for (auto it = valid.rbegin(); it != valid.rend(); ++it)
    if (*it < v.granularity) return *it;
  return std::max(1LL, v.granularity / 2);
}

}  // namespace

std::optional<VisualizationCommand> dispatch(const RuleBook& book, const InteractionEvent& event,
                                             const DispatchContext& ctx) {
  const auto& members = event.subject.members;
  if (members.empty()) return std::nullopt;
  for (CubeId m : members)
    if (ctx.in_map_region(m)) return std::nullopt;
  std::vector<CubeId> bound;
  for (CubeId m : members)
    if (ctx.is_bound(m)) bound.push_back(m);
  const bool free_pass = event.kind == EventKind::pick_up || event.kind == EventKind::put_down;
  if (bound.empty() && !free_pass) return std::nullopt;

  const auto q = qualifier_of(event);
  const Rule* rule = nullptr;
  for (const auto& r : book.rules)
    if (matches(r.pattern, event, q)) {
      rule = &r;
      break;
    }
  if (!rule) return std::nullopt;
  const CommandTemplate& t = rule->command;

  VisualizationCommand cmd;
  cmd.kind = t.kind;
  if (event.subject.component) {
    if (t.kind == CommandKind::combine && bound.size() < 2) return std::nullopt;
    cmd.target = Target::component(bound);
  } else {
    cmd.target = Target::cube(members.front());
  }
  const ViewInfo view = ctx.view(bound.empty() ? members.front() : bound.front());
  if (t.toggle && state_active(t.kind, view)) cmd.kind = *t.toggle;

  auto param = [&](std::string_view key) -> std::string {
    auto it = t.params.find(std::string(key));
    return it == t.params.end() ? std::string() : it->second;
  };

  switch (cmd.kind) {
    case CommandKind::rescale: {
      const std::string g = param("granularity");
      long long value = 0;
      if (g == "step") {
        const auto* p = std::get_if<PinchInfo>(&event.payload);
        value = rescale_step(view, !p || p->scale_ratio < 1.0);
      } else {
        value = *parse_integer(g);
      }
      cmd.params = RescaleParams{static_cast<int>(value)};
      break;
    }
    case CommandKind::switch_vis: {
      std::vector<VisType> cycle;
      for (auto part : split(param("vis"), '|')) cycle.push_back(*parse_vis_type(part));
      auto it = std::find(cycle.begin(), cycle.end(), view.vis);
      VisType next = cycle.front();
      if (it != cycle.end()) next = *(std::next(it) == cycle.end() ? cycle.begin() : std::next(it));
      cmd.params = SwitchVisParams{next};
      break;
    }
    case CommandKind::combine:
      cmd.params = CombineParams{*parse_combine_mode(param("mode"))};
      break;
    case CommandKind::sort:
      cmd.params = SortParams{*parse_sort_key(param("key"))};
      break;
    case CommandKind::flatten:
      cmd.params = FlattenParams{*parse_data_axis(param("axis")), *parse_aggregator(param("aggregator"))};
      break;
    case CommandKind::chop: {
      const DataAxis axis = *parse_data_axis(param("axis"));
      int parts = 1;
      if (param("parts") == "members") {
        parts = static_cast<int>(members.size());
        if (axis == DataAxis::time && view.last > view.first)
          parts = std::min(parts, static_cast<int>(view.last - view.first));
      } else {
        parts = static_cast<int>(*parse_integer(param("parts")));
      }
      cmd.params = ChopParams{axis, parts};
      break;
    }
    case CommandKind::adjust_range: {
      RangeParams rp;
      rp.axis = *parse_data_axis(param("axis"));
      if (!param("lo").empty()) {
        rp.lo = static_cast<int>(*parse_integer(param("lo")));
        rp.hi = static_cast<int>(*parse_integer(param("hi")));
      } else if (!view.source_bins.empty() && view.last > view.first) {
        std::size_t first = view.first, last = view.last;
        if (const auto* s = std::get_if<SwipeInfo>(&event.payload)) {
          switch (s->direction) {
            case SwipeDirection::pos_u: if (last - first > 1) ++first; break;
            case SwipeDirection::neg_u: if (first > 0) --first; break;
            case SwipeDirection::pos_v: if (last - first > 1) --last; break;
            case SwipeDirection::neg_v: if (last < view.source_bins.size()) ++last; break;
          }
        }
        rp.lo = static_cast<int>(view.source_bins[first].start);
        rp.hi = static_cast<int>(view.source_bins[last - 1].end);
      }
      cmd.params = rp;
      break;
    }
    case CommandKind::zoom: {
      double factor = 1.0;
      if (param("factor") == "ratio") {
        if (const auto* p = std::get_if<PinchInfo>(&event.payload)) factor = p->scale_ratio;
      } else {
        factor = *parse_number(param("factor"));
      }
      cmd.params = ZoomParams{factor};
      break;
    }
    case CommandKind::pan: {
      double step = *parse_number(param("step"));
      if (const auto* r = std::get_if<RotateInfo>(&event.payload)) step *= r->quarter_turns;
      cmd.params = PanParams{step, 0.0};
      break;
    }
    default:
      break;
  }
  return cmd;
}

}  // namespace tcube
