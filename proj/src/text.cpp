#include "tcube/text.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "tcube/error.hpp"

namespace tcube {

std::string escape_value(std::string_view s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (char c : s) {
    if (c == ' ' || c == '%' || c == '=' || c == ',' || c == '\n') {
      out += '%';
      out += hex[(static_cast<unsigned char>(c) >> 4) & 15];
      out += hex[static_cast<unsigned char>(c) & 15];
    } else {
      out += c;
    }
  }
  return out.empty() ? "-" : out;
}

std::string unescape_value(std::string_view s) {
  if (s == "-") return {};
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
      out += static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16));
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // fold -0 into 0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long long> parse_integer(std::string_view s) {
  if (s.empty()) return std::nullopt;
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// ---------------------------------------------------------------------------
// FieldReader

FieldReader::FieldReader(std::string_view line, int line_number) : line_(line_number) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::size_t pos = 0;
  bool first = true;
  while (pos <= line.size()) {
    auto end = line.find(' ', pos);
    if (end == std::string_view::npos) end = line.size();
    std::string_view tok = line.substr(pos, end - pos);
    const int column = static_cast<int>(pos) + 1;
    if (tok.empty()) {
      current_column_ = column;
      fail("empty token (fields are separated by exactly one space)");
    }
    if (first) {
      if (tok.find('=') != std::string_view::npos) {
        current_column_ = column;
        fail("record must start with a type word");
      }
      head_ = tok;
      first = false;
    } else {
      auto eq = tok.find('=');
      if (eq == std::string_view::npos || eq == 0) {
        current_column_ = column;
        fail("expected key=value, got '" + std::string(tok) + "'");
      }
      tokens_.push_back({tok.substr(0, eq), tok.substr(eq + 1), column});
    }
    if (end == line.size()) break;
    pos = end + 1;
  }
}

std::string_view FieldReader::peek_key() const {
  return done() ? std::string_view{} : tokens_[next_].key;
}

void FieldReader::fail(const std::string& message) const {
  throw Error(Errc::syntax, message, line_, current_column_);
}

std::string_view FieldReader::take(std::string_view key) {
  if (done()) fail("missing field '" + std::string(key) + "'");
  const Token& tok = tokens_[next_];
  current_column_ = tok.column;
  if (tok.key != key)
    fail("expected field '" + std::string(key) + "', got '" + std::string(tok.key) + "'");
  ++next_;
  return tok.value;
}

std::optional<std::string_view> FieldReader::take_optional(std::string_view key) {
  if (done() || tokens_[next_].key != key) return std::nullopt;
  return take(key);
}

void FieldReader::finish() const {
  if (!done()) {
    const_cast<FieldReader*>(this)->current_column_ = tokens_[next_].column;
    fail("unexpected field '" + std::string(tokens_[next_].key) + "'");
  }
}

double FieldReader::number(std::string_view key) {
  auto s = take(key);
  auto v = parse_number(s);
  if (!v) fail("field '" + std::string(key) + "' is not a number");
  return *v;
}

long long FieldReader::integer(std::string_view key) {
  auto s = take(key);
  auto v = parse_integer(s);
  if (!v) fail("field '" + std::string(key) + "' is not an integer");
  return *v;
}

std::uint32_t FieldReader::id(std::string_view key) {
  auto v = integer(key);
  if (v < 0 || v > 0xffffffffLL) fail("field '" + std::string(key) + "' is not a valid id");
  return static_cast<std::uint32_t>(v);
}

Vec3 FieldReader::vec3(std::string_view key) {
  auto parts = split(take(key), ',');
  if (parts.size() != 3) fail("field '" + std::string(key) + "' needs 3 components");
  Vec3 out;
  double* dst[3] = {&out.x, &out.y, &out.z};
  for (int i = 0; i < 3; ++i) {
    auto v = parse_number(parts[i]);
    if (!v) fail("field '" + std::string(key) + "' has a non-numeric component");
    *dst[i] = *v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Formatting helpers

namespace {

std::string vec_text(const Vec3& v) {
  return format_number(v.x) + "," + format_number(v.y) + "," + format_number(v.z);
}

std::string ids_text(const std::vector<CubeId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ids[i].value);
  }
  return out;
}

template <class Parser>
auto enum_field(FieldReader& r, std::string_view key, Parser parse) {
  auto s = r.take(key);
  auto v = parse(s);
  if (!v) r.fail("unknown value '" + std::string(s) + "' for field '" + std::string(key) + "'");
  return *v;
}

std::vector<CubeId> parse_ids(FieldReader& r, std::string_view text) {
  std::vector<CubeId> ids;
  for (auto part : split(text, ',')) {
    auto v = parse_integer(part);
    if (!v || *v < 0 || *v > 0xffffffffLL) r.fail("invalid id list '" + std::string(text) + "'");
    ids.push_back(CubeId{static_cast<std::uint32_t>(*v)});
  }
  return ids;
}

}  // namespace

std::string to_text(const Subject& s) {
  return std::string(s.component ? "component:" : "cube:") + ids_text(s.members);
}

std::string to_text(const Target& t) {
  switch (t.kind) {
    case Target::Kind::session: return "session";
    case Target::Kind::cube: return "cube:" + ids_text(t.members);
    case Target::Kind::component: return "component:" + ids_text(t.members);
  }
  return "session";
}

std::string to_text(const InputSample& sample) {
  std::ostringstream os;
  const std::string t = format_number(sample.t);
  if (const auto* p = std::get_if<PoseSample>(&sample.payload)) {
    const auto& q = p->pose.orientation;
    os << "pose t=" << t << " cube=" << p->cube.value << " p=" << vec_text(p->pose.position)
       << " q=" << format_number(q.w) << ',' << format_number(q.x) << ',' << format_number(q.y)
       << ',' << format_number(q.z);
  } else if (const auto* touch = std::get_if<TouchSample>(&sample.payload)) {
    os << "touch t=" << t << " cube=" << touch->cube.value << " contact=" << touch->contact.value
       << " face=" << to_string(touch->face) << " uv=" << format_number(touch->u) << ','
       << format_number(touch->v) << " pressure=" << format_number(touch->pressure)
       << " phase=" << to_string(touch->phase);
  } else if (const auto* hand = std::get_if<HandSample>(&sample.payload)) {
    os << "hand t=" << t << " hand=" << hand->hand.value << " palm=" << vec_text(hand->palm)
       << " shape=" << to_string(hand->shape);
  }
  return os.str();
}

InputSample parse_sample(std::string_view line, int line_number) {
  FieldReader r(line, line_number);
  InputSample out;
  out.t = r.number("t");
  if (r.head() == "pose") {
    PoseSample p;
    p.cube = CubeId{r.id("cube")};
    p.pose.position = r.vec3("p");
    auto parts = split(r.take("q"), ',');
    if (parts.size() != 4) r.fail("field 'q' needs 4 components");
    double q[4];
    for (int i = 0; i < 4; ++i) {
      auto v = parse_number(parts[i]);
      if (!v) r.fail("field 'q' has a non-numeric component");
      q[i] = *v;
    }
    p.pose.orientation = {q[0], q[1], q[2], q[3]};
    out.payload = p;
  } else if (r.head() == "touch") {
    TouchSample s;
    s.cube = CubeId{r.id("cube")};
    s.contact = ContactId{r.id("contact")};
    s.face = enum_field(r, "face", parse_face);
    auto uv = split(r.take("uv"), ',');
    if (uv.size() != 2) r.fail("field 'uv' needs 2 components");
    auto u = parse_number(uv[0]);
    auto v = parse_number(uv[1]);
    if (!u || !v) r.fail("field 'uv' has a non-numeric component");
    s.u = *u;
    s.v = *v;
    s.pressure = r.number("pressure");
    s.phase = enum_field(r, "phase", parse_touch_phase);
    out.payload = s;
  } else if (r.head() == "hand") {
    HandSample h;
    h.hand = HandId{r.id("hand")};
    h.palm = r.vec3("palm");
    h.shape = enum_field(r, "shape", parse_hand_shape);
    out.payload = h;
  } else {
    r.fail("unknown sample type '" + std::string(r.head()) + "'");
  }
  r.finish();
  return out;
}

std::size_t payload_index_for(EventKind kind) {
  using K = EventKind;
  switch (kind) {
    case K::press: return 1;
    case K::pinch: return 2;
    case K::swipe: return 3;
    case K::path: return 4;
    case K::hover_open:
    case K::hover_fist:
    case K::cover:
    case K::uncover: return 5;
    case K::translate: return 6;
    case K::rotate: return 7;
    case K::collide: return 8;
    case K::neighbored: return 9;
    case K::stacked: return 10;
    default: return 0;
  }
}

std::size_t params_index_for(CommandKind kind) {
  using K = CommandKind;
  switch (kind) {
    case K::rescale: return 1;
    case K::switch_vis: return 2;
    case K::combine: return 3;
    case K::sort: return 4;
    case K::flatten: return 5;
    case K::chop: return 6;
    case K::adjust_range: return 7;
    case K::zoom: return 8;
    case K::pan: return 9;
    default: return 0;
  }
}

std::string to_text(const InteractionEvent& e) {
  std::ostringstream os;
  os << "event t=" << format_number(e.t) << " kind=" << to_string(e.kind)
     << " subject=" << to_text(e.subject);
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, PressInfo>) {
          os << " pressure=" << format_number(p.pressure);
        } else if constexpr (std::is_same_v<P, PinchInfo>) {
          os << " site=" << to_string(p.site) << " ratio=" << format_number(p.scale_ratio);
        } else if constexpr (std::is_same_v<P, SwipeInfo>) {
          os << " face=" << to_string(p.face) << " dir=" << to_string(p.direction);
        } else if constexpr (std::is_same_v<P, PathInfo>) {
          os << " faces=";
          for (std::size_t i = 0; i < p.faces.size(); ++i) os << (i ? "," : "") << to_string(p.faces[i]);
          os << " points=";
          for (std::size_t i = 0; i < p.polyline.size(); ++i) {
            const auto& v = p.polyline[i];
            os << (i ? ";" : "") << format_number(v.x) << ':' << format_number(v.y) << ':'
               << format_number(v.z);
          }
        } else if constexpr (std::is_same_v<P, HandInfo>) {
          os << " hand=" << p.hand.value;
        } else if constexpr (std::is_same_v<P, TranslateInfo>) {
          os << " d=" << vec_text(p.displacement);
        } else if constexpr (std::is_same_v<P, RotateInfo>) {
          os << " axis=" << to_string(p.axis) << " turns=" << p.quarter_turns;
        } else if constexpr (std::is_same_v<P, CollideInfo> || std::is_same_v<P, NeighborInfo>) {
          os << " other=" << p.other.value;
        } else if constexpr (std::is_same_v<P, StackInfo>) {
          os << " below=" << p.below.value;
        }
      },
      e.payload);
  return os.str();
}

namespace {

Subject parse_subject(FieldReader& r, std::string_view s) {
  if (s.starts_with("cube:")) {
    auto ids = parse_ids(r, s.substr(5));
    if (ids.size() != 1) r.fail("cube subject needs exactly one id");
    return Subject::cube(ids.front());
  }
  if (s.starts_with("component:")) return {true, parse_ids(r, s.substr(10))};
  r.fail("invalid subject '" + std::string(s) + "'");
}

}  // namespace

InteractionEvent parse_event(std::string_view line, int line_number) {
  FieldReader r(line, line_number);
  if (r.head() != "event") r.fail("expected an event record");
  InteractionEvent e;
  e.t = r.number("t");
  auto kind_text = r.take("kind");
  auto kind = parse_event_kind(kind_text);
  if (!kind) r.fail("unknown event kind '" + std::string(kind_text) + "'");
  e.kind = *kind;
  e.subject = parse_subject(r, r.take("subject"));
  switch (payload_index_for(e.kind)) {
    case 1: e.payload = PressInfo{r.number("pressure")}; break;
    case 2: {
      PinchInfo p;
      p.site = enum_field(r, "site", parse_pinch_site);
      p.scale_ratio = r.number("ratio");
      e.payload = p;
      break;
    }
    case 3: {
      SwipeInfo s;
      s.face = enum_field(r, "face", parse_face);
      s.direction = enum_field(r, "dir", parse_swipe_direction);
      e.payload = s;
      break;
    }
    case 4: {
      PathInfo p;
      for (auto f : split(r.take("faces"), ',')) {
        auto face = parse_face(f);
        if (!face) r.fail("unknown face in path");
        p.faces.push_back(*face);
      }
      auto pts = r.take("points");
      if (!pts.empty()) {
        for (auto pt : split(pts, ';')) {
          auto xyz = split(pt, ':');
          if (xyz.size() != 3) r.fail("path point needs 3 components");
          Vec3 v;
          double* dst[3] = {&v.x, &v.y, &v.z};
          for (int i = 0; i < 3; ++i) {
            auto n = parse_number(xyz[i]);
            if (!n) r.fail("path point has a non-numeric component");
            *dst[i] = *n;
          }
          p.polyline.push_back(v);
        }
      }
      e.payload = p;
      break;
    }
    case 5: e.payload = HandInfo{HandId{r.id("hand")}}; break;
    case 6: e.payload = TranslateInfo{r.vec3("d")}; break;
    case 7: {
      RotateInfo ri;
      ri.axis = enum_field(r, "axis", parse_axis);
      ri.quarter_turns = static_cast<int>(r.integer("turns"));
      e.payload = ri;
      break;
    }
    case 8: e.payload = CollideInfo{CubeId{r.id("other")}}; break;
    case 9: e.payload = NeighborInfo{CubeId{r.id("other")}}; break;
    case 10: e.payload = StackInfo{CubeId{r.id("below")}}; break;
    default: break;
  }
  r.finish();
  return e;
}

std::string to_text(const VisualizationCommand& c) {
  std::ostringstream os;
  os << "command kind=" << to_string(c.kind) << " target=" << to_text(c.target);
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, RescaleParams>) {
          os << " granularity=" << p.granularity;
        } else if constexpr (std::is_same_v<P, SwitchVisParams>) {
          os << " vis=" << to_string(p.target);
        } else if constexpr (std::is_same_v<P, CombineParams>) {
          os << " mode=" << to_string(p.mode);
        } else if constexpr (std::is_same_v<P, SortParams>) {
          os << " key=" << to_string(p.key);
        } else if constexpr (std::is_same_v<P, FlattenParams>) {
          os << " axis=" << to_string(p.axis) << " aggregator=" << to_string(p.aggregator);
        } else if constexpr (std::is_same_v<P, ChopParams>) {
          os << " axis=" << to_string(p.axis) << " parts=" << p.parts;
        } else if constexpr (std::is_same_v<P, RangeParams>) {
          os << " axis=" << to_string(p.axis) << " lo=" << p.lo << " hi=" << p.hi;
        } else if constexpr (std::is_same_v<P, ZoomParams>) {
          os << " factor=" << format_number(p.factor);
        } else if constexpr (std::is_same_v<P, PanParams>) {
          os << " delta=" << format_number(p.dx) << ',' << format_number(p.dy);
        }
      },
      c.params);
  return os.str();
}

VisualizationCommand parse_command(std::string_view line, int line_number) {
  FieldReader r(line, line_number);
  if (r.head() != "command") r.fail("expected a command record");
  VisualizationCommand c;
  auto kind_text = r.take("kind");
  auto kind = parse_command_kind(kind_text);
  if (!kind) r.fail("unknown command kind '" + std::string(kind_text) + "'");
  c.kind = *kind;
  auto target = r.take("target");
  if (target == "session") {
    c.target = Target::session();
  } else if (target.starts_with("cube:")) {
    auto ids = parse_ids(r, target.substr(5));
    if (ids.size() != 1) r.fail("cube target needs exactly one id");
    c.target = Target::cube(ids.front());
  } else if (target.starts_with("component:")) {
    c.target = Target::component(parse_ids(r, target.substr(10)));
  } else {
    r.fail("invalid target '" + std::string(target) + "'");
  }
  switch (params_index_for(c.kind)) {
    case 1: c.params = RescaleParams{static_cast<int>(r.integer("granularity"))}; break;
    case 2: c.params = SwitchVisParams{enum_field(r, "vis", parse_vis_type)}; break;
    case 3: c.params = CombineParams{enum_field(r, "mode", parse_combine_mode)}; break;
    case 4: c.params = SortParams{enum_field(r, "key", parse_sort_key)}; break;
    case 5: {
      FlattenParams f;
      f.axis = enum_field(r, "axis", parse_data_axis);
      f.aggregator = enum_field(r, "aggregator", parse_aggregator);
      c.params = f;
      break;
    }
    case 6: {
      ChopParams ch;
      ch.axis = enum_field(r, "axis", parse_data_axis);
      ch.parts = static_cast<int>(r.integer("parts"));
      c.params = ch;
      break;
    }
    case 7: {
      RangeParams rp;
      rp.axis = enum_field(r, "axis", parse_data_axis);
      rp.lo = static_cast<int>(r.integer("lo"));
      rp.hi = static_cast<int>(r.integer("hi"));
      c.params = rp;
      break;
    }
    case 8: c.params = ZoomParams{r.number("factor")}; break;
    case 9: {
      auto parts = split(r.take("delta"), ',');
      if (parts.size() != 2) r.fail("field 'delta' needs 2 components");
      auto dx = parse_number(parts[0]);
      auto dy = parse_number(parts[1]);
      if (!dx || !dy) r.fail("field 'delta' has a non-numeric component");
      c.params = PanParams{*dx, *dy};
      break;
    }
    default: break;
  }
  r.finish();
  return c;
}

}  // namespace tcube
