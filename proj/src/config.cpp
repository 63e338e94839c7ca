#include "tcube/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "tcube/error.hpp"
#include "tcube/text.hpp"

namespace tcube {

namespace {

struct Field {
  std::string_view key;
  double* (*real)(EngineConfig&);
  int* (*integer)(EngineConfig&);
};

#define TCUBE_REAL(section, name) \
  Field { #section "." #name, [](EngineConfig& c) { return &c.section.name; }, nullptr }
#define TCUBE_INT(section, name) \
  Field { #section "." #name, nullptr, [](EngineConfig& c) { return &c.section.name; } }

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      TCUBE_REAL(recognizer, tap_max_duration),
      TCUBE_REAL(recognizer, tap_max_travel),
      TCUBE_REAL(recognizer, multi_tap_gap),
      TCUBE_REAL(recognizer, press_min_pressure),
      TCUBE_REAL(recognizer, press_min_duration),
      TCUBE_REAL(recognizer, hold_min_duration),
      TCUBE_REAL(recognizer, swipe_min_travel),
      TCUBE_REAL(recognizer, path_max_deviation),
      TCUBE_REAL(recognizer, pinch_edge_band),
      TCUBE_REAL(recognizer, hover_max_height),
      TCUBE_REAL(recognizer, cover_max_height),
      TCUBE_REAL(recognizer, pickup_height),
      TCUBE_REAL(recognizer, rest_band),
      TCUBE_REAL(recognizer, translate_min),
      TCUBE_REAL(recognizer, settle_time),
      TCUBE_REAL(recognizer, settle_eps),
      TCUBE_INT(recognizer, shake_min_reversals),
      TCUBE_REAL(recognizer, shake_window),
      TCUBE_REAL(recognizer, shake_min_amplitude),
      TCUBE_REAL(recognizer, rotate_snap_deg),
      TCUBE_REAL(recognizer, rotate_hysteresis_deg),
      TCUBE_REAL(recognizer, collide_min_speed),
      TCUBE_REAL(recognizer, collide_window),
      TCUBE_REAL(spatial, contact_gap_max),
      TCUBE_REAL(spatial, lateral_offset_max),
      TCUBE_REAL(spatial, antiparallel_max_deg),
      TCUBE_REAL(spatial, lattice_tolerance),
      TCUBE_REAL(spatial, cube_edge),
      TCUBE_REAL(session, bind_dwell),
      TCUBE_REAL(session, bind_rest_band),
      TCUBE_REAL(session, map_width),
      TCUBE_REAL(session, map_depth),
      TCUBE_REAL(session, region_gap),
      TCUBE_REAL(session, interaction_width),
      TCUBE_REAL(session, anchor_offset),
  };
  return table;
}

#undef TCUBE_REAL
#undef TCUBE_INT

const Field& find(std::string_view key) {
  for (const auto& f : fields())
    if (f.key == key) return f;
  throw Error(Errc::syntax, "unknown parameter '" + std::string(key) + "'");
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.emplace_back(f.key);
  return out;
}

void set_config_value(EngineConfig& cfg, std::string_view key, std::string_view value) {
  const Field& f = find(key);
  if (f.integer) {
    auto v = parse_integer(value);
    if (!v || *v < 0 || *v > 1000000)
      throw Error(Errc::syntax, "parameter '" + std::string(key) + "' needs a non-negative integer");
    *f.integer(cfg) = static_cast<int>(*v);
  } else {
    auto v = parse_number(value);
    if (!v || !std::isfinite(*v))
      throw Error(Errc::syntax, "parameter '" + std::string(key) + "' needs a finite number");
    *f.real(cfg) = *v;
  }
}

std::string get_config_value(const EngineConfig& cfg, std::string_view key) {
  const Field& f = find(key);
  auto& c = const_cast<EngineConfig&>(cfg);
  return f.integer ? std::to_string(*f.integer(c)) : format_number(*f.real(c));
}

std::string config_text(const EngineConfig& cfg) {
  std::string s = "#! tcube-config 1\n";
  for (const auto& f : fields()) s += std::string(f.key) + " = " + get_config_value(cfg, f.key) + "\n";
  return s;
}

EngineConfig parse_config(std::string_view text, EngineConfig base) {
  int line_no = 0;
  bool header = false;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    std::string line(raw);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!header) {
      if (line != "#! tcube-config 1") throw Error(Errc::syntax, "missing '#! tcube-config 1' header", line_no, 1);
      header = true;
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(Errc::syntax, "expected 'key = value'", line_no, 1);
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
      return s;
    };
    try {
      set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(Errc::syntax, e.what(), line_no, 1);
    }
  }
  if (!header) throw Error(Errc::syntax, "empty config", 1, 1);
  return base;
}

EngineConfig load_config_file(const std::string& path, EngineConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), base);
}

}  // namespace tcube
