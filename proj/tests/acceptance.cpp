// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Oracles here are written against the geometry and the data directly and do
// not call the code paths they check.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bench.hpp"
#include "tcube/datacube.hpp"
#include "tcube/error.hpp"
#include "tcube/rulebook.hpp"
#include "tcube/scenarios.hpp"
#include "tcube/spatial.hpp"
#include "tcube/trace.hpp"

using namespace tcube;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string field(const std::string& line, const std::string& key) {
  const auto at = line.find(" " + key + "=");
  if (at == std::string::npos) return {};
  const auto start = at + key.size() + 2;
  return line.substr(start, line.find(' ', start) - start);
}

// ---------------------------------------------------------------------------
// Vocabulary coverage

struct Expected {
  std::string kind;
  std::string subject;
};

// The corpus script numbers cubes in the order it creates them; each row is
// performed once, on its own cube or group.
const std::vector<Expected> kCorpusRows = {
    {"tap", "cube:1"},          {"press", "cube:2"},         {"hold", "cube:3"},
    {"double_tap", "cube:4"},   {"triple_tap", "cube:5"},    {"pinch", "cube:6"},
    {"swipe", "cube:7"},        {"path", "cube:8"},          {"hover_open", "cube:9"},
    {"hover_fist", "cube:10"},  {"cover", "cube:11"},        {"pick_up", "cube:12"},
    {"rotate", "cube:13"},      {"translate", "cube:14"},    {"shake", "cube:15"},
    {"neighbored", "component:16,17"}, {"stacked", "component:18,19"},
    {"assembled", "component:20,21,22"}, {"collide", "cube:24"},
};

Outcome vocabulary_coverage() {
  Outcome o;
  std::map<EventKind, VocabularyRow> row_of;
  for (const auto& m : event_vocabulary())
    if (m.row) row_of[m.kind] = *m.row;

  std::vector<std::pair<std::string, TraceFile>> traces;
  traces.emplace_back("shipped", load_trace_file(TCUBE_DATA_DIR "/traces/gesture_corpus.trace"));
  for (std::uint64_t seed = 2; seed <= 5; ++seed)
    traces.emplace_back("seed " + std::to_string(seed), generate_scenario("gesture_corpus", seed));

  int gestures = 0, manipulations = 0;
  for (const auto& [label, trace] : traces) {
    std::vector<Expected> got;
    for (const auto& l : lines_of(replay(trace).log))
      if (l.starts_with("event ")) got.push_back({field(l, "kind"), field(l, "subject")});
    std::map<VocabularyRow, int> hits;
    for (const auto& e : got) {
      const auto k = parse_event_kind(e.kind);
      if (!k || !row_of.count(*k)) {
        o.fail(label + ": spurious " + e.kind + " on " + e.subject);
        continue;
      }
      ++hits[row_of[*k]];
    }
    if (got.size() != kCorpusRows.size())
      o.fail(label + ": " + std::to_string(got.size()) + " events, want " + std::to_string(kCorpusRows.size()));
    for (std::size_t i = 0; i < std::min(got.size(), kCorpusRows.size()); ++i)
      if (got[i].kind != kCorpusRows[i].kind || got[i].subject != kCorpusRows[i].subject)
        o.fail(label + ": event " + std::to_string(i + 1) + " is " + got[i].kind + " " + got[i].subject + ", want " +
               kCorpusRows[i].kind + " " + kCorpusRows[i].subject);
    gestures = manipulations = 0;
    for (const auto& [row, n] : hits) {
      if (n != 1) o.fail(label + ": row " + std::string(to_string(row)) + " seen " + std::to_string(n) + " times");
      (is_gesture_row(row) ? gestures : manipulations) += 1;
    }
    if (gestures != kGestureRowCount || manipulations != kManipulationRowCount)
      o.fail(label + ": rows covered " + std::to_string(gestures) + "+" + std::to_string(manipulations));
  }
  if (o.pass)
    o.detail = std::to_string(gestures) + " gesture rows + " + std::to_string(manipulations) +
               " manipulation rows, 0 spurious, " + std::to_string(traces.size()) + " traces";
  return o;
}

// ---------------------------------------------------------------------------
// Spatial oracle

constexpr double kEdge = 0.033;
constexpr double kGapMax = 0.005;
constexpr double kLateralMax = 0.25;
constexpr double kAngleMaxDeg = 15.0;
// Pairs measured within these bands of a threshold are resampled; the two
// formulations are only required to agree away from the boundary.
constexpr double kGapBand[2] = {0.003, 0.008};
constexpr double kLateralBand[2] = {0.17, 0.33};
constexpr double kAngleBandDeg[2] = {10.0, 20.0};
constexpr double kLatticeTol = 0.30;
constexpr double kLatticeBand[2] = {0.27, 0.33};

const Vec3 kFaceNormals[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};

struct OracleContact {
  bool contact = false;
  bool ambiguous = false;
  bool stacked = false;
  bool a_below = false;
  double gap = 0.0;
  double lateral = 0.0;
};

// Every face of a against every face of b.
OracleContact oracle_pair(const CubeState& a, const CubeState& b) {
  OracleContact out;
  const Vec3 d = b.pose.position - a.pose.position;
  int matches = 0;
  for (const auto& fa : kFaceNormals) {
    const Vec3 na = a.pose.orientation.rotate(fa);
    for (const auto& fb : kFaceNormals) {
      const Vec3 nb = b.pose.orientation.rotate(fb);
      const double angle = std::acos(std::clamp(-na.dot(nb), -1.0, 1.0)) * 180.0 / kPi;
      // Measured along the mean of the two facing normals.
      Vec3 n = na - nb;
      n = n / n.norm();
      const double along = d.dot(n);
      if (along <= 0) continue;
      const double gap = along - kEdge;
      const double lateral = (d - n * along).norm() / kEdge;
      const bool near = angle < kAngleBandDeg[1] + 2 && std::abs(gap) < kGapBand[1] + 0.001 && lateral < kLateralBand[1] + 0.02;
      if (!near) continue;
      const double horiz = std::max(std::abs(n.x), std::abs(n.y));
      if ((angle >= kAngleBandDeg[0] && angle <= kAngleBandDeg[1]) ||
          (std::abs(gap) >= kGapBand[0] && std::abs(gap) <= kGapBand[1]) ||
          (lateral >= kLateralBand[0] && lateral <= kLateralBand[1]) || std::abs(std::abs(n.z) - horiz) < 0.2)
        out.ambiguous = true;
      if (angle <= kAngleMaxDeg && std::abs(gap) <= kGapMax && lateral <= kLateralMax) {
        ++matches;
        out.contact = true;
        out.stacked = std::abs(n.z) > horiz;
        out.a_below = out.stacked && n.z > 0;
        out.gap = gap;
        out.lateral = lateral;
      }
    }
  }
  if (matches > 1) out.ambiguous = true;
  return out;
}

using Contacts = std::map<std::pair<std::uint32_t, std::uint32_t>, OracleContact>;

// Connected components of the oracle's contact pairs.
std::set<std::set<std::uint32_t>> oracle_groups(const std::vector<CubeState>& states, const Contacts& contacts) {
  std::map<std::uint32_t, std::uint32_t> parent;
  for (const auto& s : states) parent[s.id.value] = s.id.value;
  std::function<std::uint32_t(std::uint32_t)> root = [&](std::uint32_t x) {
    return parent[x] == x ? x : parent[x] = root(parent[x]);
  };
  for (const auto& [key, c] : contacts) parent[root(key.first)] = root(key.second);
  std::map<std::uint32_t, std::set<std::uint32_t>> groups;
  for (const auto& s : states) groups[root(s.id.value)].insert(s.id.value);
  std::set<std::set<std::uint32_t>> out;
  for (auto& [r, g] : groups) out.insert(g);
  return out;
}

// Largest per-axis distance of a member from the nearest lattice point, in
// edge units, in the body frame of the lowest id. A repeated lattice point
// counts as infinitely far.
double lattice_deviation(const std::vector<CubeState>& states, const std::set<std::uint32_t>& group) {
  std::map<std::uint32_t, const CubeState*> by_id;
  for (const auto& s : states) by_id[s.id.value] = &s;
  const auto& lead = *by_id.at(*group.begin());
  double worst = 0;
  std::set<std::array<long, 3>> used;
  for (auto id : group) {
    const Vec3 off = (by_id.at(id)->pose.position - lead.pose.position) / kEdge;
    std::array<long, 3> cell{};
    for (int k = 0; k < 3; ++k) {
      const double r = off.dot(lead.pose.orientation.rotate(kFaceNormals[2 * k]));
      cell[k] = std::lround(r);
      worst = std::max(worst, std::abs(r - static_cast<double>(cell[k])));
    }
    if (!used.insert(cell).second) return 1e9;
  }
  return worst;
}

Quat axis_rotation(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> k(0, 3);
  const double q = kPi / 2;
  return Quat::from_axis_angle({0, 0, 1}, q * k(rng)) * Quat::from_axis_angle({0, 1, 0}, q * k(rng)) *
         Quat::from_axis_angle({1, 0, 0}, q * k(rng));
}

Vec3 random_axis(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vec3 v{n(rng), n(rng), n(rng)};
  return v / v.norm();
}

// Cubes on a jittered lattice, some knocked off it, some dropped anywhere.
std::vector<CubeState> random_scene(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = std::uniform_int_distribution<int>(1, 10)(rng);
  const double pitch = kEdge + 0.0015 * u(rng);
  const Quat yaw = Quat::from_axis_angle({0, 0, 1}, 2 * kPi * u(rng));
  const Vec3 origin{u(rng), u(rng), kEdge / 2};

  std::vector<int> cells(4 * 3 * 3);
  std::iota(cells.begin(), cells.end(), 0);
  std::shuffle(cells.begin(), cells.end(), rng);
  std::vector<std::uint32_t> ids(40);
  std::iota(ids.begin(), ids.end(), 1u);
  std::shuffle(ids.begin(), ids.end(), rng);

  std::vector<CubeState> out;
  for (int i = 0; i < n; ++i) {
    CubeState s;
    s.id = CubeId{ids[i]};
    s.edge = kEdge;
    const double mode = u(rng);
    if (mode < 0.85) {
      const int c = cells[i];
      Vec3 local{pitch * (c % 4), pitch * ((c / 4) % 3), pitch * (c / 12)};
      local = local + Vec3{0.002 * u(rng) - 0.001, 0.002 * u(rng) - 0.001, 0.002 * u(rng) - 0.001};
      Quat q = yaw * axis_rotation(rng) * Quat::from_axis_angle(random_axis(rng), deg_to_rad(2.0 * u(rng)));
      if (mode >= 0.7) {
        switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
          case 0: local = local + random_axis(rng) * (0.4 * kEdge); break;
          case 1: q = q * Quat::from_axis_angle(random_axis(rng), deg_to_rad(30.0)); break;
          default: local.z += 0.012; break;
        }
      }
      s.pose.position = origin + yaw.rotate(local);
      s.pose.orientation = q.normalized();
    } else {
      s.pose.position = origin + Vec3{0.25 * u(rng) - 0.05, 0.25 * u(rng) - 0.05, 0.15 * u(rng)};
      s.pose.orientation = Quat::from_axis_angle(random_axis(rng), 2 * kPi * u(rng));
    }
    out.push_back(s);
  }
  return out;
}

Outcome spatial_oracle() {
  Outcome o;
  const SpatialParams params;
  int scenes = 0, resampled = 0, contacts = 0, stacks = 0, assemblies = 0, off_lattice = 0;
  double worst_gap = 0, worst_lateral = 0;
  for (int scene = 0; scene < 1000; ++scene) {
    std::mt19937_64 rng(7000 + scene);
    std::vector<CubeState> states;
    Contacts expected;
    bool degenerate = false;
    for (;;) {
      states = random_scene(rng);
      expected.clear();
      bool ambiguous = false;
      for (const auto& a : states)
        for (const auto& b : states) {
          if (a.id.value >= b.id.value) continue;
          const auto c = oracle_pair(a, b);
          ambiguous |= c.ambiguous;
          if (c.contact) expected[{a.id.value, b.id.value}] = c;
        }
      degenerate = false;
      for (const auto& g : oracle_groups(states, expected)) {
        const double dev = lattice_deviation(states, g);
        ambiguous |= dev >= kLatticeBand[0] && dev <= kLatticeBand[1];
        degenerate |= dev > kLatticeTol;
      }
      if (!ambiguous) break;
      ++resampled;
    }
    ++scenes;
    const std::string where = "scene " + std::to_string(scene);

    const auto graph = build_contact_graph(states, params);
    std::vector<CubeId> nodes;
    for (const auto& s : states) nodes.push_back(s.id);
    std::sort(nodes.begin(), nodes.end());
    if (graph.nodes != nodes) o.fail(where + ": node list");
    if (graph.edges.size() != expected.size())
      o.fail(where + ": " + std::to_string(graph.edges.size()) + " edges, oracle " + std::to_string(expected.size()));
    auto it = expected.begin();
    for (const auto& e : graph.edges) {
      if (it == expected.end()) break;
      const auto& [key, c] = *it++;
      if (e.a.value != key.first || e.b.value != key.second) {
        o.fail(where + ": edge " + std::to_string(e.a.value) + "-" + std::to_string(e.b.value) + " vs oracle " +
               std::to_string(key.first) + "-" + std::to_string(key.second));
        continue;
      }
      if ((e.kind == ContactKind::stacked) != c.stacked || e.a_below != c.a_below) o.fail(where + ": contact kind");
      worst_gap = std::max(worst_gap, std::abs(e.gap - c.gap));
      worst_lateral = std::max(worst_lateral, std::abs(e.lateral_offset - c.lateral));
      ++contacts;
      stacks += c.stacked;
    }

    const auto want = oracle_groups(states, expected);
    ConfigurationSummary summary;
    try {
      summary = classify_components(graph, states, params);
      if (degenerate) o.fail(where + ": off-lattice scene was classified");
    } catch (const Error& e) {
      if (!degenerate || e.code() != Errc::degenerate_configuration) o.fail(where + ": classify threw " + e.what());
      ++off_lattice;
      continue;
    }
    std::set<std::set<std::uint32_t>> have;
    std::size_t covered = 0;
    std::uint32_t last_lead = 0;
    for (const auto& comp : summary.components) {
      std::set<std::uint32_t> m;
      for (auto id : comp.members) m.insert(id.value);
      covered += comp.members.size();
      have.insert(m);
      if (!m.empty() && *m.begin() <= last_lead && last_lead != 0) o.fail(where + ": component order");
      if (!m.empty()) last_lead = *m.begin();

      std::vector<const OracleContact*> inner;
      for (const auto& [key, c] : expected)
        if (m.count(key.first)) inner.push_back(&c);
      const bool all_stacked =
          !inner.empty() && std::all_of(inner.begin(), inner.end(), [](auto* c) { return c->stacked; });
      std::map<std::uint32_t, int> degree;
      for (const auto& [key, c] : expected)
        if (m.count(key.first)) ++degree[key.first], ++degree[key.second];
      const bool chain = inner.size() + 1 == m.size() &&
                         std::all_of(degree.begin(), degree.end(), [](auto& d) { return d.second <= 2; });
      ComponentKind k = ComponentKind::assembly;
      if (m.size() == 1) k = ComponentKind::single;
      else if (all_stacked && chain) k = ComponentKind::column_stack;
      else if (m.size() == 2) k = ComponentKind::pair_neighbor;
      if (comp.kind != k) o.fail(where + ": kind " + std::string(to_string(comp.kind)) + ", want " + std::string(to_string(k)));
      assemblies += comp.kind == ComponentKind::assembly;

      std::set<LatticeCoord> coords(comp.lattice.begin(), comp.lattice.end());
      if (coords.size() != comp.members.size()) o.fail(where + ": lattice coordinates repeat");
      std::map<std::uint32_t, LatticeCoord> at;
      for (std::size_t i = 0; i < comp.members.size() && i < comp.lattice.size(); ++i)
        at[comp.members[i].value] = comp.lattice[i];
      for (const auto& [key, c] : expected) {
        if (!at.count(key.first)) continue;
        const auto p = at[key.first], q = at[key.second];
        if (std::abs(p.x - q.x) + std::abs(p.y - q.y) + std::abs(p.z - q.z) != 1)
          o.fail(where + ": touching cubes are not lattice neighbours");
      }
    }
    if (covered != nodes.size() || have != want) o.fail(where + ": components do not partition the nodes");
  }
  constexpr double kGapTol = 1e-9, kLateralTol = 1e-9;
  if (worst_gap > kGapTol || worst_lateral > kLateralTol) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "measured gap/lateral off by %.2g m / %.2g edge", worst_gap, worst_lateral);
    o.fail(buf);
  }
  if (o.pass) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%d scenes (%d resampled near thresholds, %d off-lattice), %d contacts (%d stacked), %d assemblies, "
                  "gap within %.0e m, lateral within %.0e edge",
                  scenes, resampled, off_lattice, contacts, stacks, assemblies, kGapTol, kLateralTol);
    o.detail = buf;
  }
  return o;
}

// ---------------------------------------------------------------------------
// Scenario goldens

Outcome scenario_goldens() {
  Outcome o;
  std::map<std::string, std::vector<std::string>> snap;
  std::map<std::string, std::vector<std::string>> log;
  for (const std::string name : {"bind_two_neighbor", "stack_two", "cover_hide", "shake_reset", "assemble_2x2x2"}) {
    const std::string golden_path = TCUBE_DATA_DIR "/golden/" + name + ".snapshot";
    const std::string golden = slurp(golden_path);
    if (golden.empty()) {
      o.fail(name + ": no golden");
      continue;
    }
    const auto r = replay(load_trace_file(TCUBE_DATA_DIR "/traces/" + name + ".trace"));
    if (r.snapshot.text() != golden) o.fail(name + ": snapshot differs from golden");
    snap[name] = lines_of(golden);
    log[name] = lines_of(r.log);
  }
  auto any = [](const std::vector<std::string>& ls, auto pred) { return std::any_of(ls.begin(), ls.end(), pred); };

  // Merged neighbored chart: one chart, structure neighbored, series of two regions.
  {
    const auto& s = snap["bind_two_neighbor"];
    std::set<std::string> series_charts;
    for (const auto& l : s)
      if (l.starts_with("series ")) series_charts.insert(field(l, "chart"));
    const bool merged = series_charts.size() == 1 &&
                        any(s, [](auto& l) { return l.starts_with("chart ") && field(l, "structure") == "neighbored"; }) &&
                        std::count_if(s.begin(), s.end(), [](auto& l) { return l.starts_with("series "); }) == 2;
    if (!merged) o.fail("bind_two_neighbor: no merged neighbored chart");
  }
  if (!any(snap["stack_two"], [](auto& l) { return l.starts_with("chart ") && field(l, "structure") == "stacked"; }))
    o.fail("stack_two: no stacked chart");
  {
    // A series goes hidden after hide and visible again after show.
    const auto& l = log["cover_hide"];
    std::string stage = "start";
    for (const auto& line : l) {
      if (stage == "start" && line.starts_with("command kind=hide")) stage = "hide";
      else if (stage == "hide" && line.find("hidden=yes") != std::string::npos) stage = "hidden";
      else if (stage == "hidden" && line.starts_with("command kind=show")) stage = "show";
      else if (stage == "show" && line.find("hidden=no") != std::string::npos) stage = "restored";
    }
    const auto& s = snap["cover_hide"];
    if (stage != "restored" || any(s, [](auto& x) { return x.find("hidden=yes") != std::string::npos; }))
      o.fail("cover_hide: no hidden-then-restored series (reached " + stage + ")");
  }
  {
    // The slot the reset cube was bound to ends empty.
    std::string region;
    bool reset = false;
    for (const auto& line : log["shake_reset"]) {
      if (line.starts_with("command kind=reset")) reset = true;
      if (reset && line.starts_with("unbind ")) {
        const auto cube = field(line, "cube");
        for (const auto& b : log["shake_reset"])
          if (b.starts_with("bind ") && field(b, "cube") == cube) region = field(b, "region");
      }
    }
    const bool freed = !region.empty() && any(snap["shake_reset"], [&](auto& l) {
      return l.starts_with("slot ") && field(l, "region") == region && field(l, "cube") == "-";
    });
    if (!freed) o.fail("shake_reset: no freed slot after reset");
  }
  {
    int eight = 0;
    for (const auto& l : snap["assemble_2x2x2"])
      if (l.starts_with("component ") && field(l, "kind") == "assembly" &&
          std::count(l.begin(), l.end(), ',') == 7)
        ++eight;
    if (eight != 1) o.fail("assemble_2x2x2: " + std::to_string(eight) + " assemblies of 8");
  }
  if (o.pass) o.detail = "5 byte-identical snapshots; neighbored, stacked, hide/show, freed slot, 8-cube assembly";
  return o;
}

// ---------------------------------------------------------------------------
// Data algebra

DataSlice random_slice(std::mt19937_64& rng, std::size_t regions, std::size_t bins, long long width) {
  std::uniform_real_distribution<double> u(-1000.0, 5000.0);
  DataSlice s;
  s.unit = "u";
  for (std::size_t r = 0; r < regions; ++r) s.regions.push_back({"R" + std::to_string(r), "Region " + std::to_string(r), 0.5, 0.5});
  for (std::size_t b = 0; b < bins; ++b)
    s.bins.push_back({1900 + width * static_cast<long long>(b), 1900 + width * static_cast<long long>(b + 1)});
  for (std::size_t i = 0; i < regions * bins; ++i) s.values.push_back(u(rng));
  s.hidden.assign(s.values.size(), false);
  return s;
}

double plain_sum(const DataSlice& s) {
  double acc = 0;
  for (double v : s.values) acc += v;
  return acc;
}

double abs_sum(const DataSlice& s) {
  double acc = 0;
  for (double v : s.values) acc += std::abs(v);
  return acc;
}

// Puts chop pieces back together along the axis.
DataSlice reassemble(const std::vector<DataSlice>& parts, DataAxis axis) {
  DataSlice out = parts.front();
  for (std::size_t p = 1; p < parts.size(); ++p) {
    const auto& q = parts[p];
    if (axis == DataAxis::space) {
      out.regions.insert(out.regions.end(), q.regions.begin(), q.regions.end());
      out.values.insert(out.values.end(), q.values.begin(), q.values.end());
      out.hidden.insert(out.hidden.end(), q.hidden.begin(), q.hidden.end());
    } else {
      DataSlice m = out;
      m.bins.insert(m.bins.end(), q.bins.begin(), q.bins.end());
      m.values.clear();
      m.hidden.clear();
      for (std::size_t r = 0; r < out.regions.size(); ++r) {
        for (std::size_t b = 0; b < out.bins.size(); ++b) {
          m.values.push_back(out.at(r, b));
          m.hidden.push_back(out.is_hidden(r, b));
        }
        for (std::size_t b = 0; b < q.bins.size(); ++b) {
          m.values.push_back(q.at(r, b));
          m.hidden.push_back(q.is_hidden(r, b));
        }
      }
      out = m;
    }
  }
  return out;
}

Outcome data_algebra() {
  Outcome o;
  constexpr double kRel = 1e-9;
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> dim(1, 12);
  double worst_flatten = 0, worst_inverse = 0, worst_rescale = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t nr = dim(rng), nb = dim(rng);
    const long long width = std::uniform_int_distribution<int>(1, 10)(rng);
    const auto s = random_slice(rng, nr, nb, width);
    const auto t = random_slice(rng, nr, nb, width);
    const double scale = std::max(abs_sum(s), 1.0);
    const std::string where = "slice " + std::to_string(i);

    for (auto axis : {DataAxis::time, DataAxis::space}) {
      const double err = std::abs(plain_sum(flatten(s, axis, Aggregator::sum)) - plain_sum(s)) / scale;
      worst_flatten = std::max(worst_flatten, err);
      if (err > kRel) o.fail(where + ": flatten changed the sum");

      const std::size_t extent = axis == DataAxis::time ? nb : nr;
      const int parts = std::uniform_int_distribution<int>(1, static_cast<int>(extent))(rng);
      const auto pieces = chop(s, axis, parts);
      if (static_cast<int>(pieces.size()) != parts || !(reassemble(pieces, axis) == s))
        o.fail(where + ": chop pieces do not reassemble");
    }

    const auto back = arith(arith(s, t, ArithOp::add), t, ArithOp::subtract);
    const auto fwd = arith(arith(s, t, ArithOp::subtract), t, ArithOp::add);
    for (std::size_t k = 0; k < s.values.size(); ++k) {
      const double mag = std::max({std::abs(s.values[k]), std::abs(t.values[k]), 1.0});
      const double err = std::max(std::abs(back.values[k] - s.values[k]), std::abs(fwd.values[k] - s.values[k])) / mag;
      worst_inverse = std::max(worst_inverse, err);
      if (err > kRel) o.fail(where + ": add/subtract not inverse");
    }

    // Coarsen by a divisor of the bin count.
    std::vector<std::size_t> factors;
    for (std::size_t f = 1; f <= nb; ++f)
      if (nb % f == 0) factors.push_back(f);
    const auto f = factors[rng() % factors.size()];
    const auto coarse = rescale(s, width * static_cast<long long>(f));
    if (coarse.bins.size() != nb / f) o.fail(where + ": rescale bin count");
    for (std::size_t r = 0; r < nr; ++r) {
      double fine = 0, rough = 0;
      for (std::size_t b = 0; b < nb; ++b) fine += s.at(r, b);
      for (std::size_t b = 0; b < coarse.bins.size(); ++b) rough += coarse.at(r, b);
      const double err = std::abs(fine - rough) / scale;
      worst_rescale = std::max(worst_rescale, err);
      if (err > kRel) o.fail(where + ": rescale changed a region total");
    }
  }
  if (o.pass) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "200 slices; worst rel. error flatten %.1e, add/sub %.1e, rescale %.1e (tol 1e-9)",
                  worst_flatten, worst_inverse, worst_rescale);
    o.detail = buf;
  }
  return o;
}

// ---------------------------------------------------------------------------
// Rulebook discipline

Outcome rulebook_discipline() {
  Outcome o;
  for (const std::string name : {"default", "extended"}) {
    const auto& builtin = *builtin_rulebook(name);
    if (!validate(builtin).empty()) o.fail(name + ": built-in has conflicts");
    try {
      const auto file = load_rulebook_file(TCUBE_DATA_DIR "/rulebooks/" + name + ".tcr");
      if (!validate(file).empty()) o.fail(name + ": file has conflicts");
      if (file.rules.size() != builtin.rules.size()) o.fail(name + ": file and built-in differ");
    } catch (const Error& e) {
      o.fail(name + ": " + e.what());
    }
  }

  // A second rule for an already-mapped pattern, in text and in a built book.
  int injected = 0, detected = 0;
  for (const auto* book : {&default_rulebook(), &extended_rulebook()}) {
    for (std::size_t i = 0; i < book->rules.size(); ++i) {
      const auto& r = book->rules[i];
      const std::string dup = to_text(r.pattern) + " -> " + (r.command.kind == CommandKind::recolor ? "zoom" : "recolor");
      ++injected;
      try {
        parse_rulebook(to_text(*book) + dup + "\n");
      } catch (const Error& e) {
        detected += e.code() == Errc::duplicate_pattern;
      }
      RuleBook b = *book;
      b.rules.insert(b.rules.begin() + static_cast<long>(i) + 1, parse_rule(dup));
      ++injected;
      detected += !validate(b).empty();
    }
  }
  if (detected != injected) o.fail(std::to_string(injected - detected) + " injected duplicates missed");

  // Fuzz: mutated rule lines, each parsed alone, then all as one document.
  std::mt19937_64 rng(99);
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz_.@|{}=,->+ 0123456789\t#!\r\"\\\x01\xff";
  std::vector<std::string> seeds;
  for (const auto& r : extended_rulebook().rules) seeds.push_back(to_text(r.pattern) + " -> " + to_text(r.command));
  std::string corpus = "#! tcube-rulebook 1\n";
  int accepted = 0, rejected = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string line = seeds[rng() % seeds.size()];
    const int edits = static_cast<int>(rng() % 6);
    for (int k = 0; k < edits; ++k) {
      const std::size_t at = line.empty() ? 0 : rng() % (line.size() + 1);
      switch (rng() % 4) {
        case 0: line.insert(line.begin() + static_cast<long>(at), alphabet[rng() % alphabet.size()]); break;
        case 1: if (at < line.size()) line.erase(at, 1); break;
        case 2: if (at < line.size()) line[at] = alphabet[rng() % alphabet.size()]; break;
        default: line = line.substr(0, at); break;
      }
    }
    corpus += line + "\n";
    try {
      parse_rulebook("#! tcube-rulebook 1\n" + line + "\n");
      ++accepted;
    } catch (const Error&) {
      ++rejected;
    } catch (const std::exception& e) {
      o.fail("fuzz line " + std::to_string(i + 1) + " escaped as " + e.what());
    }
  }
  try {
    parse_rulebook(corpus);
  } catch (const Error&) {
  } catch (const std::exception& e) {
    o.fail(std::string("fuzz corpus escaped as ") + e.what());
  }
  if (o.pass)
    o.detail = "0 conflicts in default/extended; " + std::to_string(detected) + "/" + std::to_string(injected) +
               " duplicates detected; 10000 fuzz lines (" + std::to_string(accepted) + " accepted, " +
               std::to_string(rejected) + " rejected)";
  return o;
}

// ---------------------------------------------------------------------------
// Determinism and chunking

Outcome determinism() {
  Outcome o;
  std::mt19937_64 rng(31337);
  std::size_t bytes = 0;
  for (int i = 0; i < 50; ++i) {
    const auto& name = scenario_names()[i % scenario_names().size()];
    const auto trace = generate_scenario(name, 100 + i);
    const auto text = trace_text(trace);
    bytes += text.size();
    const auto a = replay(trace);
    const auto b = replay(parse_trace(text));
    std::vector<std::size_t> chunks;
    const int n = 1 + static_cast<int>(rng() % 4);
    for (int k = 0; k < n; ++k) chunks.push_back(1 + rng() % (k == 0 ? 64 : 8192));
    const auto c = replay_chunked(text, chunks);
    const std::string where = name + " seed " + std::to_string(100 + i);
    if (a.log != b.log || a.snapshot != b.snapshot) o.fail(where + ": two replays differ");
    if (a.log != c.log || a.snapshot != c.snapshot) o.fail(where + ": chunked replay differs");
    if (a.log.empty()) o.fail(where + ": empty log");
  }
  if (o.pass) o.detail = "50 traces (" + std::to_string(bytes / 1024) + " KiB), 3 replays each, identical";
  return o;
}

// ---------------------------------------------------------------------------
// Hide/show and reset identities

void hand_at(testing::Bench& b, std::uint32_t hand, Vec3 palm) {
  b.log += b.session.step({b.t + 0.01, HandSample{HandId{hand}, palm, HandShape::open}}).text();
}

Outcome identities() {
  Outcome o;
  using testing::Bench;
  std::mt19937_64 rng(2718);
  int covers = 0, resets = 0;
  for (int round = 0; round < 100; ++round) {
    // Cover the cube with an open palm, then lift the hand away.
    Bench b;
    b.bind(1, 0);
    b.bind(2, 1);
    b.bind(3, 2);
    const int n = static_cast<int>(rng() % 10);
    for (int k = 0; k < n; ++k) b.apply(testing::random_command(rng, 1, {2, 3}, false));
    const auto charts = b.session.charts();
    const auto p = b.pos[1];
    const std::size_t mark = b.log.size();
    hand_at(b, 1, {p.x, p.y, p.z + b.session.layout().cube_edge / 2 + 0.015});
    b.frames(0.5);
    hand_at(b, 1, {p.x + 2.0, p.y + 2.0, 0.5});
    b.frames(0.5);
    const auto tail = b.log.substr(mark);
    const auto hide = tail.find("command kind=hide target=cube:1");
    if (hide == std::string::npos || tail.find("command kind=show target=cube:1", hide) == std::string::npos) {
      o.fail("cover round " + std::to_string(round) + ": cover/uncover did not reach hide/show");
      continue;
    }
    if (b.session.charts() != charts) o.fail("cover round " + std::to_string(round) + ": chart spec changed");
    ++covers;
  }
  for (int round = 0; round < 100; ++round) {
    Bench b;
    b.bind(2, 1);
    b.bind(3, 2);
    const int pre = static_cast<int>(rng() % 4);
    for (int k = 0; k < pre; ++k) b.apply(testing::random_command(rng, 2, {3}, true));
    const auto before = testing::visible_state(b.session);
    b.bind(1, 0);
    const int n = 1 + static_cast<int>(rng() % 10);
    for (int k = 0; k < n; ++k) b.apply(testing::random_command(rng, 1, {2, 3}, true, true));
    b.apply(testing::cmd(CommandKind::reset, testing::cube_target(1)));
    if (testing::visible_state(b.session) != before) {
      std::string x, y;
      for (auto& l : before) x += l + "\n";
      for (auto& l : testing::visible_state(b.session)) y += l + "\n";
      const auto d = diff_snapshots(x, y);
      o.fail("reset round " + std::to_string(round) + ": " + (d.empty() ? "state differs" : d.front()));
      continue;
    }
    ++resets;
  }
  if (o.pass)
    o.detail = std::to_string(covers) + " cover/uncover cases restore the chart spec; " + std::to_string(resets) +
               " reset cases restore the pre-binding state";
  return o;
}

struct Criterion {
  const char* name;
  double limit_s;
  Outcome (*run)();
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"vocabulary_coverage", 5.0, vocabulary_coverage},
      {"spatial_oracle", 10.0, spatial_oracle},
      {"scenario_goldens", 5.0, scenario_goldens},
      {"data_algebra", 5.0, data_algebra},
      {"rulebook_discipline", 10.0, rulebook_discipline},
      {"determinism_chunking", 20.0, determinism},
      {"hide_show_reset_identities", 10.0, identities},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.fail(std::string("uncaught: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= c.limit_s) o.fail("too slow");
    std::printf("%s %-28s %6.2f s (limit %.0f s)  %s\n", o.pass ? "PASS" : "FAIL", c.name, secs, c.limit_s,
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
