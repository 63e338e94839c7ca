#include "tcube/session.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "tcube/error.hpp"
#include "tcube/text.hpp"

namespace tcube {

// ---------------------------------------------------------------------------
// Layout

SessionLayout default_layout(const SpaceTimeCube& data, const EngineConfig& cfg) {
  const auto& s = cfg.session;
  SessionLayout l;
  l.cube_edge = cfg.spatial.cube_edge;
  l.map_region = {0.0, 0.0, s.map_width, s.map_depth};
  l.interaction_region = {s.map_width + s.region_gap, 0.0,
                          s.map_width + s.region_gap + s.interaction_width, s.map_depth};
  l.anchored_anchor = {(l.interaction_region.x0 + l.interaction_region.x1) / 2,
                       s.map_depth + s.anchor_offset, 0.0};
  for (const auto& r : data.regions) l.slots.push_back({r.id, {r.u * s.map_width, r.v * s.map_depth, 0.0}});
  return l;
}

void check_layout(const SessionLayout& l) {
  auto valid = [](const Rect& r) { return r.x1 > r.x0 && r.y1 > r.y0; };
  if (!valid(l.map_region) || !valid(l.interaction_region))
    throw Error(Errc::layout, "regions must have positive extent");
  if (l.map_region.overlaps(l.interaction_region))
    throw Error(Errc::layout, "map and interaction regions overlap");
  for (std::size_t i = 0; i < l.slots.size(); ++i) {
    const auto& a = l.slots[i];
    if (!l.map_region.contains(a.center.x, a.center.y))
      throw Error(Errc::layout, "slot " + a.region_id + " lies outside the map region");
    for (std::size_t j = i + 1; j < l.slots.size(); ++j) {
      const auto& b = l.slots[j];
      if (std::hypot(a.center.x - b.center.x, a.center.y - b.center.y) < l.cube_edge)
        throw Error(Errc::layout, "slots " + a.region_id + " and " + b.region_id + " are closer than one cube edge");
    }
  }
}

// ---------------------------------------------------------------------------
// Text forms

std::string_view to_string(ChartStructure s) {
  switch (s) {
    case ChartStructure::neighbored: return "neighbored";
    case ChartStructure::stacked: return "stacked";
    case ChartStructure::small_multiples: return "small_multiples";
  }
  return "?";
}

namespace {

std::string vec_text(const Vec3& v) {
  return format_number(v.x) + "," + format_number(v.y) + "," + format_number(v.z);
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

std::string color_name(int c) { return std::string(kPalette[((c % kPaletteSize) + kPaletteSize) % kPaletteSize]); }

std::string binding_line(const Binding& b) {
  return "binding cube=" + std::to_string(b.cube.value) + " region=" + b.region_id +
         " color=" + color_name(b.color) + " bound_at=" + format_number(b.bound_at);
}

}  // namespace

std::vector<std::string> chart_lines(const ChartSpec& c) {
  std::ostringstream os;
  os << "chart id=" << c.id << " placement=" << (c.dynamic ? "dynamic" : "anchored")
     << " p=" << vec_text(c.position) << " structure=" << to_string(c.structure)
     << " vis=" << to_string(c.vis) << " level=" << (c.detail ? "detail" : "overview")
     << " initiated=" << yes_no(c.initiated) << " zoom=" << format_number(c.zoom)
     << " pan=" << format_number(c.pan_x) << "," << format_number(c.pan_y) << " bins=";
  for (std::size_t i = 0; i < c.bins.size(); ++i) os << (i ? "," : "") << to_string(c.bins[i]);
  if (c.bins.empty()) os << "-";
  os << " chop=";
  if (c.segments.empty()) {
    os << "-";
  } else {
    os << to_string(c.chop_axis) << ":";
    for (std::size_t i = 0; i < c.segments.size(); ++i) os << (i ? "," : "") << c.segments[i];
  }
  os << " x_label=" << escape_value(c.x_label) << " y_label=" << escape_value(c.y_label)
     << " extent=" << format_number(c.extent_lo) << "," << format_number(c.extent_hi) << " extremes=";
  for (std::size_t i = 0; i < c.extremes.size(); ++i) os << (i ? "," : "") << c.extremes[i];
  if (c.extremes.empty()) os << "-";
  std::vector<std::string> out{os.str()};
  for (const auto& s : c.series) {
    std::string line = "series chart=" + c.id + " region=" + escape_value(s.region_id) + " label=" + escape_value(s.label) +
                       " color=" + color_name(s.color) + " stack=" + std::to_string(s.stack) +
                       " hidden=" + yes_no(s.hidden) + " values=";
    for (std::size_t i = 0; i < s.values.size(); ++i) line += (i ? "," : "") + format_number(s.values[i]);
    if (s.values.empty()) line += "-";
    out.push_back(std::move(line));
  }
  return out;
}

std::string to_text(const Rejection& r) {
  return "reject code=" + std::string(to_string(r.code)) + " kind=" + std::string(to_string(r.command.kind)) +
         " target=" + to_text(r.command.target) + " reason=" + escape_value(r.message);
}

std::string to_text(const ChartDelta& d) {
  switch (d.kind) {
    case ChartDelta::Kind::bind: return "bind " + d.text.substr(d.text.find(' ') + 1);
    case ChartDelta::Kind::unbind: return "unbind cube=" + d.subject;
    case ChartDelta::Kind::chart_remove: return "chart_remove id=" + d.subject;
    case ChartDelta::Kind::chart_upsert: return d.text;
  }
  return {};
}

namespace {
template <class T>
std::vector<T> pick(const std::vector<ReportEntry>& entries) {
  std::vector<T> out;
  for (const auto& e : entries)
    if (auto* p = std::get_if<T>(&e)) out.push_back(*p);
  return out;
}
}  // namespace

std::vector<InteractionEvent> StepReport::events() const { return pick<InteractionEvent>(entries); }
std::vector<VisualizationCommand> StepReport::commands() const { return pick<VisualizationCommand>(entries); }
std::vector<Rejection> StepReport::rejections() const { return pick<Rejection>(entries); }
std::vector<ChartDelta> StepReport::deltas() const { return pick<ChartDelta>(entries); }

std::string StepReport::text() const {
  std::string out;
  for (const auto& e : entries) {
    std::visit([&](const auto& v) { out += to_text(v); }, e);
    out += '\n';
  }
  return out;
}

std::string SessionSnapshot::text() const {
  std::string out;
  for (const auto& l : lines) out += l + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Snapshot diff

namespace {

struct Record {
  std::string key;
  std::vector<std::pair<std::string, std::string>> fields;
  std::string line;
};

std::vector<Record> records(std::string_view doc) {
  std::vector<Record> out;
  for (auto raw : split(doc, '\n')) {
    std::string line(raw);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Record r;
    r.line = line;
    if (line.starts_with("#")) {
      r.key = line;
      out.push_back(r);
      continue;
    }
    auto tokens = split(line, ' ');
    const std::size_t id_tokens = tokens[0] == "series" ? 3 : tokens[0] == "session" || tokens[0] == "recognizer" ? 1 : 2;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i < id_tokens) {
        r.key += (i ? " " : "") + std::string(tokens[i]);
        continue;
      }
      auto eq = tokens[i].find('=');
      if (eq == std::string_view::npos)
        r.fields.emplace_back(std::string(tokens[i]), "");
      else
        r.fields.emplace_back(std::string(tokens[i].substr(0, eq)), std::string(tokens[i].substr(eq + 1)));
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::vector<std::string> diff_snapshots(std::string_view expected, std::string_view actual) {
  const auto want = records(expected);
  const auto got = records(actual);
  std::vector<std::string> out;
  std::vector<bool> used(got.size(), false);
  for (const auto& w : want) {
    auto it = std::find_if(got.begin(), got.end(), [&](const Record& g) {
      return !used[&g - got.data()] && g.key == w.key;
    });
    if (it == got.end()) {
      out.push_back("missing: " + w.line);
      continue;
    }
    used[it - got.begin()] = true;
    const auto& g = *it;
    for (std::size_t i = 0; i < std::max(w.fields.size(), g.fields.size()); ++i) {
      if (i < w.fields.size() && i < g.fields.size() && w.fields[i] == g.fields[i]) continue;
      const std::string name = i < w.fields.size() ? w.fields[i].first : g.fields[i].first;
      const std::string a = i < w.fields.size() ? w.fields[i].second : "<absent>";
      const std::string b = i < g.fields.size() ? g.fields[i].second : "<absent>";
      out.push_back(w.key + ": " + name + " expected " + a + ", got " + b);
    }
  }
  for (std::size_t i = 0; i < got.size(); ++i)
    if (!used[i]) out.push_back("unexpected: " + got[i].line);
  return out;
}

// ---------------------------------------------------------------------------
// Session

class Session::Context : public DispatchContext {
 public:
  explicit Context(const Session& s) : s_(s) {}
  bool is_bound(CubeId cube) const override { return s_.bindings_.count(cube) > 0; }
  bool in_map_region(CubeId cube) const override { return s_.in_map(cube); }
  ViewInfo view(CubeId cube) const override {
    ViewInfo v;
    v.source_bins = s_.data_.bins;
    const Group* g = s_.group_of(cube);
    const View view = g ? g->view : s_.fresh_view();
    v.vis = view.vis;
    v.detail = view.detail;
    v.initiated = view.initiated;
    v.first = view.first;
    v.last = view.last;
    v.granularity = view.granularity ? view.granularity
                                     : (view.first < v.source_bins.size() ? v.source_bins[view.first].width() : 1);
    return v;
  }

 private:
  const Session& s_;
};

Session::Session(SpaceTimeCube data, RuleBook rulebook, EngineConfig cfg)
    : Session(data, std::move(rulebook), default_layout(data, cfg), cfg) {}

Session::Session(SpaceTimeCube data, RuleBook rulebook, SessionLayout layout, EngineConfig cfg)
    : data_(std::move(data)),
      rulebook_(std::move(rulebook)),
      cfg_(cfg),
      layout_(std::move(layout)),
      recognizer_(cfg.recognizer, cfg.spatial) {
  check_layout(layout_);
  if (data_.bins.empty() || data_.regions.empty()) throw Error(Errc::invalid_argument, "dataset is empty");
}

Session::View Session::fresh_view() const {
  View v;
  v.first = 0;
  v.last = data_.bins.size();
  return v;
}

Session::Group* Session::group_of(CubeId id) {
  for (auto& g : groups_)
    if (std::find(g.members.begin(), g.members.end(), id) != g.members.end()) return &g;
  return nullptr;
}

const Session::Group* Session::group_of(CubeId id) const {
  return const_cast<Session*>(this)->group_of(id);
}

bool Session::lifted(CubeId id) const { return recognizer_.tracked(id) && recognizer_.motion(id).lifted(); }

bool Session::any_lifted(const Group& g) const {
  return std::any_of(g.members.begin(), g.members.end(), [&](CubeId m) { return lifted(m); });
}

bool Session::in_map(CubeId id) const {
  if (!recognizer_.tracked(id)) return false;
  const Vec3 p = recognizer_.motion(id).pose().position;
  return layout_.map_region.contains(p.x, p.y);
}

bool Session::in_interaction(CubeId id) const {
  if (!recognizer_.tracked(id)) return false;
  const Vec3 p = recognizer_.motion(id).pose().position;
  return layout_.interaction_region.contains(p.x, p.y);
}

std::optional<Binding> Session::check_binding(CubeId cube) const {
  auto it = bindings_.find(cube);
  if (it == bindings_.end()) return std::nullopt;
  return it->second;
}

ChartSpec Session::render(const Group& g, bool dynamic) const {
  const View& v = g.view;
  std::vector<std::size_t> rows;
  for (CubeId m : g.members) rows.push_back(data_.region_index(bindings_.at(m).region_id));
  DataSlice s = slice(data_, rows, v.first, v.last);
  for (std::size_t r = 0; r < g.members.size(); ++r) {
    auto look = looks_.find(g.members[r]);
    const bool hidden = look != looks_.end() && look->second.hidden;
    for (std::size_t b = 0; b < s.bins.size(); ++b) s.hidden[s.cell(r, b)] = hidden;
  }
  if (v.granularity && !(s.bins.size() && s.bins.front().width() == v.granularity &&
                         std::all_of(s.bins.begin(), s.bins.end(),
                                     [&](const TimeBin& b) { return b.width() == v.granularity; })))
    s = rescale(s, v.granularity);
  if (v.space_range) s = filter_range(s, DataAxis::space, v.space_range->first, v.space_range->second);
  if (v.flatten_time) s = flatten(s, DataAxis::time, *v.flatten_time);
  if (v.arith && s.regions.size() >= 2) {
    DataSlice acc = filter_range(s, DataAxis::space, 0, 1);
    for (std::size_t r = 1; r < s.regions.size(); ++r)
      acc = arith(acc, filter_range(s, DataAxis::space, long(r), long(r) + 1), *v.arith);
    s = acc;
  }
  if (v.flatten_space) s = flatten(s, DataAxis::space, *v.flatten_space);

  ChartSpec c;
  const CubeId lead = g.members.front();
  c.dynamic = dynamic;
  c.id = (dynamic ? "D" : "A") + std::to_string(lead.value);
  if (dynamic) {
    Vec3 sum;
    double top = 0.0;
    int n = 0;
    for (CubeId m : g.members) {
      if (!lifted(m)) continue;
      const Pose& p = recognizer_.motion(m).pose();
      sum = sum + p.position;
      top = std::max(top, top_z(p, layout_.cube_edge));
      ++n;
    }
    c.position = {sum.x / n, sum.y / n, top};
  } else {
    c.position = layout_.anchored_anchor;
  }
  c.structure = g.structure;
  c.vis = v.vis;
  c.detail = v.detail;
  c.initiated = v.initiated;
  c.zoom = v.zoom;
  c.pan_x = v.pan_x;
  c.pan_y = v.pan_y;
  c.bins = s.bins;
  c.x_label = data_.time_unit;
  c.y_label = data_.unit;
  if (v.chop_parts > 1) {
    c.chop_axis = v.chop_axis;
    std::size_t at = 0;
    auto parts = chop(s, v.chop_axis, v.chop_parts);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      at += v.chop_axis == DataAxis::time ? parts[i].bins.size() : parts[i].regions.size();
      c.segments.push_back(at);
    }
  }
  if (v.extremes) {
    try {
      const auto e = extremes(s);
      c.extremes = {"min:" + escape_value(e.min_cell.region_id) + "@" + to_string(e.min_cell.bin),
                    "max:" + escape_value(e.max_cell.region_id) + "@" + to_string(e.max_cell.bin)};
    } catch (const Error&) {
    }
  }

  std::vector<std::size_t> order(s.regions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (v.sort) order = sort_series(s, *v.sort);
  for (std::size_t r : order) {
    SeriesSpec ss;
    ss.region_id = s.regions[r].id;
    ss.label = s.regions[r].label;
    std::size_t member = 0;
    for (std::size_t i = 0; i < g.members.size(); ++i)
      if (bindings_.at(g.members[i]).region_id == ss.region_id) member = i;
    ss.color = bindings_.at(g.members[member]).color;
    ss.stack = g.stacks[member];
    ss.hidden = true;
    for (std::size_t b = 0; b < s.bins.size(); ++b) {
      ss.values.push_back(s.at(r, b));
      ss.hidden = ss.hidden && s.is_hidden(r, b);
    }
    c.series.push_back(std::move(ss));
  }

  // Extent over visible values; stacked series sum per stack.
  std::map<std::pair<int, std::size_t>, std::pair<double, double>> stacks;
  for (const auto& ss : c.series) {
    if (ss.hidden) continue;
    for (std::size_t b = 0; b < ss.values.size(); ++b) {
      const double x = ss.values[b];
      const int key = c.structure == ChartStructure::stacked ? ss.stack : int(&ss - c.series.data());
      auto& [neg, pos] = stacks[{key, b}];
      (x < 0 ? neg : pos) += x;
    }
  }
  for (const auto& [k, np] : stacks) {
    c.extent_lo = std::min(c.extent_lo, np.first);
    c.extent_hi = std::max(c.extent_hi, np.second);
  }
  return c;
}

void Session::refresh_anchored(Group& g) { g.anchored = render(g, false); }

void Session::extract(CubeId id) {
  auto it = std::find_if(groups_.begin(), groups_.end(), [&](const Group& g) {
    return std::find(g.members.begin(), g.members.end(), id) != g.members.end();
  });
  if (it == groups_.end() || it->members.size() == 1) return;
  Group cur = std::move(*it);
  groups_.erase(it);
  while (cur.members.size() > 1) {
    Group next;
    for (auto& part : cur.parts) {
      if (std::find(part.members.begin(), part.members.end(), id) != part.members.end()) {
        next = std::move(part);
      } else {
        if (!any_lifted(part)) refresh_anchored(part);
        groups_.push_back(std::move(part));
      }
    }
    if (next.members.empty()) {
      // Should not happen: a merged group always keeps its parts.
      next.members = {id};
      next.stacks = {0};
      next.view = fresh_view();
    }
    cur = std::move(next);
  }
  if (!any_lifted(cur)) refresh_anchored(cur);
  groups_.push_back(std::move(cur));
}

void Session::remove_binding(CubeId id) {
  extract(id);
  groups_.erase(std::remove_if(groups_.begin(), groups_.end(),
                               [&](const Group& g) { return g.members.size() == 1 && g.members[0] == id; }),
                groups_.end());
  bindings_.erase(id);
  looks_.erase(id);
  dwell_.erase(id);
}

namespace {

[[noreturn]] void stale(CubeId id) {
  throw Error(Errc::stale_target, "cube " + std::to_string(id.value) + " is not bound");
}

}  // namespace

void Session::apply_or_throw(const VisualizationCommand& cmd, const InteractionEvent*) {
  const Target& target = cmd.target;
  if (target.kind == Target::Kind::session) {
    if (cmd.kind != CommandKind::reset)
      throw Error(Errc::invalid_argument, std::string(to_string(cmd.kind)) + " cannot target the session");
    bindings_.clear();
    groups_.clear();
    looks_.clear();
    dwell_.clear();
    return;
  }
  if (target.members.empty()) throw Error(Errc::invalid_argument, "empty target");
  for (CubeId m : target.members)
    if (!bindings_.count(m)) stale(m);

  if (cmd.kind == CommandKind::combine) {
    std::vector<CubeId> t = target.members;
    if (t.size() < 2) throw Error(Errc::invalid_argument, "combine needs at least two bound cubes");
    const std::set<CubeId> tset(t.begin(), t.end());
    for (CubeId m : t) {
      const Group* g = group_of(m);
      if (std::any_of(g->members.begin(), g->members.end(), [&](CubeId x) { return !tset.count(x); }))
        extract(m);
    }
    std::vector<Group> parts;
    for (CubeId m : t) {
      auto it = std::find_if(groups_.begin(), groups_.end(), [&](const Group& g) {
        return std::find(g.members.begin(), g.members.end(), m) != g.members.end();
      });
      if (it == groups_.end()) continue;  // already moved
      parts.push_back(std::move(*it));
      groups_.erase(it);
    }
    Group g;
    if (parts.size() == 1) {
      g = std::move(parts.front());
    } else {
      g.view = parts.front().view;
      g.parts = std::move(parts);
    }
    g.members = t;
    g.stacks.assign(t.size(), 0);
    const CombineMode mode = std::get<CombineParams>(cmd.params).mode;
    switch (mode) {
      case CombineMode::neighbored:
      case CombineMode::small_multiples:
        g.structure = mode == CombineMode::neighbored ? ChartStructure::neighbored : ChartStructure::small_multiples;
        for (std::size_t i = 0; i < t.size(); ++i) g.stacks[i] = int(i);
        break;
      case CombineMode::stacked:
        g.structure = ChartStructure::stacked;
        break;
      case CombineMode::structure: {
        // Vertical lattice neighbours stack; horizontal ones sit side by side.
        std::map<std::pair<int, int>, int> columns;
        std::vector<std::pair<int, int>> col(t.size());
        const Component* comp = recognizer_.configuration().component_of(t.front());
        for (std::size_t i = 0; i < t.size(); ++i) {
          col[i] = {1 << 20, int(i)};
          if (!comp) continue;
          for (std::size_t k = 0; k < comp->members.size(); ++k)
            if (comp->members[k] == t[i]) col[i] = {comp->lattice[k].x, comp->lattice[k].y};
        }
        for (const auto& c : col) columns.emplace(c, 0);
        int next = 0;
        for (auto& [c, idx] : columns) idx = next++;
        for (std::size_t i = 0; i < t.size(); ++i) g.stacks[i] = columns[col[i]];
        g.structure = columns.size() == t.size() ? ChartStructure::neighbored : ChartStructure::stacked;
        break;
      }
    }
    render(g, false);
    refresh_anchored(g);
    groups_.push_back(std::move(g));
    return;
  }

  if (cmd.kind == CommandKind::reset) {
    for (CubeId m : target.members) remove_binding(m);
    return;
  }

  if (cmd.kind == CommandKind::recolor || cmd.kind == CommandKind::hide || cmd.kind == CommandKind::show) {
    for (CubeId m : target.members) {
      if (cmd.kind == CommandKind::recolor)
        bindings_[m].color = (bindings_[m].color + 1) % kPaletteSize;
      else
        looks_[m].hidden = cmd.kind == CommandKind::hide;
    }
    for (auto& g : groups_)
      if (std::any_of(g.members.begin(), g.members.end(),
                      [&](CubeId m) { return std::count(target.members.begin(), target.members.end(), m); }) &&
          !any_lifted(g))
        refresh_anchored(g);
    return;
  }

  if (cmd.kind == CommandKind::ungroup) {
    for (CubeId m : target.members) {
      auto it = std::find_if(groups_.begin(), groups_.end(), [&](const Group& g) {
        return std::find(g.members.begin(), g.members.end(), m) != g.members.end();
      });
      if (it == groups_.end() || it->parts.empty()) continue;
      std::vector<Group> parts = std::move(it->parts);
      groups_.erase(it);
      for (auto& p : parts) {
        if (!any_lifted(p)) refresh_anchored(p);
        groups_.push_back(std::move(p));
      }
    }
    return;
  }

  // View commands act on each distinct group holding a target member.
  std::vector<Group*> targets;
  for (CubeId m : target.members) {
    Group* g = group_of(m);
    if (std::find(targets.begin(), targets.end(), g) == targets.end()) targets.push_back(g);
  }
  for (Group* g : targets) {
    View& v = g->view;
    switch (cmd.kind) {
      case CommandKind::add:
      case CommandKind::subtract: {
        if (g->members.size() < 2)
          throw Error(Errc::invalid_argument, std::string(to_string(cmd.kind)) + " needs at least two series");
        const ArithOp op = cmd.kind == CommandKind::add ? ArithOp::add : ArithOp::subtract;
        v.arith = v.arith == op ? std::nullopt : std::optional<ArithOp>(op);
        break;
      }
      case CommandKind::rescale: {
        const long long gran = std::get<RescaleParams>(cmd.params).granularity;
        if (gran <= 0) throw Error(Errc::invalid_argument, "granularity must be positive");
        v.granularity = gran;
        break;
      }
      case CommandKind::switch_vis: v.vis = std::get<SwitchVisParams>(cmd.params).target; break;
      case CommandKind::sort: v.sort = std::get<SortParams>(cmd.params).key; break;
      case CommandKind::flatten: {
        const auto& p = std::get<FlattenParams>(cmd.params);
        auto& slot = p.axis == DataAxis::time ? v.flatten_time : v.flatten_space;
        slot = slot == p.aggregator ? std::nullopt : std::optional<Aggregator>(p.aggregator);
        break;
      }
      case CommandKind::overview: v.detail = false; break;
      case CommandKind::detail: v.detail = true; break;
      case CommandKind::chop: {
        const auto& p = std::get<ChopParams>(cmd.params);
        v.chop_axis = p.axis;
        v.chop_parts = p.parts;
        break;
      }
      case CommandKind::adjust_range: {
        const auto& p = std::get<RangeParams>(cmd.params);
        if (p.hi <= p.lo) throw Error(Errc::empty_selection, "range is empty");
        if (p.axis == DataAxis::space) {
          v.space_range = std::pair<long long, long long>{p.lo, p.hi};
          break;
        }
        std::size_t first = data_.bins.size(), last = 0;
        for (std::size_t b = 0; b < data_.bins.size(); ++b)
          if (data_.bins[b].end > p.lo && data_.bins[b].start < p.hi) {
            first = std::min(first, b);
            last = b + 1;
          }
        if (last == 0) throw Error(Errc::empty_selection, "range selects no bins");
        v.first = first;
        v.last = last;
        break;
      }
      case CommandKind::identify_extremes: v.extremes = !v.extremes; break;
      case CommandKind::zoom: {
        const double f = std::get<ZoomParams>(cmd.params).factor;
        if (!(f > 0) || !std::isfinite(f)) throw Error(Errc::invalid_argument, "zoom factor must be positive");
        v.zoom *= f;
        break;
      }
      case CommandKind::pan: {
        const auto& p = std::get<PanParams>(cmd.params);
        v.pan_x += p.dx;
        v.pan_y += p.dy;
        break;
      }
      case CommandKind::initiate: v.initiated = true; break;
      case CommandKind::terminate: v.initiated = false; break;
      default: throw Error(Errc::invalid_argument, "unhandled command " + std::string(to_string(cmd.kind)));
    }
    render(*g, false);  // throws for selections the data cannot support
    if (!any_lifted(*g)) refresh_anchored(*g);
  }
}

void Session::apply(const VisualizationCommand& cmd, const InteractionEvent* cause, StepReport& out) {
  auto groups = groups_;
  auto bindings = bindings_;
  auto looks = looks_;
  auto dwell = dwell_;
  try {
    apply_or_throw(cmd, cause);
    out.entries.emplace_back(cmd);
  } catch (const Error& e) {
    groups_ = std::move(groups);
    bindings_ = std::move(bindings);
    looks_ = std::move(looks);
    dwell_ = std::move(dwell);
    out.entries.emplace_back(Rejection{cmd, e.code(), e.what()});
  }
}

void Session::handle_events(const std::vector<InteractionEvent>& events, StepReport& out) {
  for (const auto& e : events) {
    out.entries.emplace_back(e);
    const Context ctx(*this);
    if (auto cmd = dispatch(rulebook_, e, ctx)) apply(*cmd, &e, out);
    if (e.kind == EventKind::put_down) {
      const CubeId id = e.subject.lead();
      if (Group* g = group_of(id); g && in_interaction(id) && !any_lifted(*g)) refresh_anchored(*g);
    }
  }
}

void Session::update_bindings(Seconds t, StepReport&) {
  const double edge = layout_.cube_edge;
  std::set<std::string> taken;
  for (const auto& [id, b] : bindings_) taken.insert(b.region_id);
  for (CubeId id : recognizer_.cubes()) {
    if (bindings_.count(id)) continue;
    const Pose& pose = recognizer_.motion(id).pose();
    const bool resting = !lifted(id) && std::abs(bottom_z(pose, edge)) <= cfg_.session.bind_rest_band;
    std::optional<std::size_t> slot;
    double best = edge / 2;
    for (std::size_t i = 0; i < layout_.slots.size(); ++i) {
      if (taken.count(layout_.slots[i].region_id)) continue;
      const double d = std::hypot(pose.position.x - layout_.slots[i].center.x,
                                  pose.position.y - layout_.slots[i].center.y);
      if (d <= best) {
        best = d;
        slot = i;
      }
    }
    if (!resting || !slot) {
      dwell_.erase(id);
      continue;
    }
    auto it = dwell_.find(id);
    if (it == dwell_.end() || it->second.slot != *slot) {
      dwell_[id] = {*slot, t};
      it = dwell_.find(id);
    }
    if (t - it->second.since < cfg_.session.bind_dwell - 1e-9) continue;

    std::set<int> used;
    for (const auto& [other, b] : bindings_) used.insert(b.color);
    int color = 0;
    while (color < kPaletteSize && used.count(color)) ++color;
    if (color == kPaletteSize) color = int(bindings_.size() % kPaletteSize);
    const std::string region = layout_.slots[*slot].region_id;
    bindings_[id] = Binding{id, region, color, t};
    taken.insert(region);
    dwell_.erase(id);
    Group g;
    g.members = {id};
    g.stacks = {0};
    g.view = fresh_view();
    refresh_anchored(g);
    groups_.push_back(std::move(g));
  }
}

std::map<std::string, std::string> Session::chart_map() const {
  std::map<std::string, std::string> out;
  std::erase_if(binding_text_, [&](const auto& kv) { return !bindings_.count(kv.first); });
  for (const auto& [id, b] : bindings_) {
    auto& [seen, text] = binding_text_[id];
    if (text.empty() || !(seen == b)) {
      seen = b;
      text = binding_line(b);
    }
    out["b" + std::to_string(id.value)] = text;
  }
  // Formatting dominates replay time; most charts are unchanged per step.
  auto join = [this](const ChartSpec& c) {
    auto& [spec, text] = chart_text_[c.id];
    if (spec == c && !text.empty()) return text;
    std::string s;
    for (const auto& l : chart_lines(c)) s += (s.empty() ? "" : "\n") + l;
    spec = c;
    text = s;
    return s;
  };
  for (const auto& g : groups_) {
    out["c" + g.anchored.id] = join(g.anchored);
    if (any_lifted(g)) {
      const ChartSpec d = render(g, true);
      out["c" + d.id] = join(d);
    }
  }
  std::erase_if(chart_text_, [&](const auto& kv) { return !out.count("c" + kv.first); });
  return out;
}

std::map<std::string, std::string> Session::take_published() {
  if (!published_) return chart_map();
  auto m = std::move(*published_);
  published_.reset();
  return m;
}

void Session::emit_chart_deltas(const std::map<std::string, std::string>& before, StepReport& out) {
  auto after = chart_map();
  std::vector<ChartDelta> binds, charts;
  for (const auto& [key, text] : before)
    if (!after.count(key)) {
      const bool bind = key[0] == 'b';
      (bind ? binds : charts)
          .push_back({bind ? ChartDelta::Kind::unbind : ChartDelta::Kind::chart_remove, key.substr(1), ""});
    }
  for (const auto& [key, text] : after) {
    auto it = before.find(key);
    if (it != before.end() && it->second == text) continue;
    const bool bind = key[0] == 'b';
    (bind ? binds : charts)
        .push_back({bind ? ChartDelta::Kind::bind : ChartDelta::Kind::chart_upsert, key.substr(1), text});
  }
  for (auto& d : binds) out.entries.emplace_back(std::move(d));
  for (auto& d : charts) out.entries.emplace_back(std::move(d));
  published_ = std::move(after);
}

StepReport Session::step(const InputSample& sample) {
  const ValidatedSample vs = validate_sample(sample, started_ ? now_ : -1e300);
  const auto before = take_published();
  auto events = recognizer_.ingest(vs);
  now_ = vs.sample.t;
  started_ = true;
  StepReport out;
  handle_events(events, out);
  update_bindings(now_, out);
  emit_chart_deltas(before, out);
  return out;
}

StepReport Session::finish(Seconds t_end) {
  const auto before = take_published();
  auto events = recognizer_.flush(t_end);
  StepReport out;
  handle_events(events, out);
  emit_chart_deltas(before, out);
  return out;
}

StepReport Session::apply_command(const VisualizationCommand& command) {
  const auto before = take_published();
  StepReport out;
  apply(command, nullptr, out);
  emit_chart_deltas(before, out);
  return out;
}

StepReport Session::reset_all() { return apply_command({CommandKind::reset, Target::session(), {}}); }

std::vector<ChartSpec> Session::charts() const {
  std::vector<ChartSpec> out;
  for (const auto& g : groups_) {
    out.push_back(g.anchored);
    if (any_lifted(g)) out.push_back(render(g, true));
  }
  std::sort(out.begin(), out.end(), [](const ChartSpec& a, const ChartSpec& b) { return a.id < b.id; });
  return out;
}

SessionSnapshot Session::snapshot() const {
  SessionSnapshot s;
  s.lines.push_back("#! tcube-snapshot 1");
  s.lines.push_back("session t=" + format_number(now_) + " dataset=" + escape_value(data_.name) +
                    " rulebook=" + escape_value(rulebook_.name));
  std::map<std::string, CubeId> by_region;
  for (const auto& [id, b] : bindings_) by_region[b.region_id] = id;
  for (const auto& slot : layout_.slots) {
    auto it = by_region.find(slot.region_id);
    s.lines.push_back("slot region=" + slot.region_id + " p=" + vec_text(slot.center) +
                      " cube=" + (it == by_region.end() ? "-" : std::to_string(it->second.value)));
  }
  for (const auto& [id, b] : bindings_) s.lines.push_back(binding_line(b));
  for (const auto& c : recognizer_.configuration().components) {
    std::string ids;
    for (CubeId m : c.members) ids += (ids.empty() ? "" : ",") + std::to_string(m.value);
    s.lines.push_back("component members=" + ids + " kind=" + std::string(to_string(c.kind)));
  }
  for (const auto& c : charts())
    for (auto& l : chart_lines(c)) s.lines.push_back(std::move(l));
  s.lines.push_back("recognizer digest=" + recognizer_.digest());
  return s;
}

}  // namespace tcube
