#include "tcube/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tcube/error.hpp"

namespace tcube {

SceneScript::SceneScript(double rate, double edge) : rate_(rate), edge_(edge) {}

void SceneScript::add_cube(std::uint32_t cube, Vec3 position, Quat q) { poses_[cube] = {position, q}; }

void SceneScript::frame() {
  ++frame_;
  const Seconds t = frame_ / rate_;
  for (const auto& [id, p] : poses_)
    items_.push_back({t, 0, items_.size(), {t, PoseSample{CubeId{id}, p}}});
}

void SceneScript::wait(Seconds s) {
  const long n = std::lround(s * rate_);
  for (long i = 0; i < n; ++i) frame();
}

void SceneScript::move(const std::map<std::uint32_t, Vec3>& targets, Seconds s) {
  const long n = std::max(1L, std::lround(s * rate_));
  std::map<std::uint32_t, Vec3> from;
  for (const auto& [id, to] : targets) from[id] = poses_.at(id).position;
  for (long k = 1; k <= n; ++k) {
    const double a = double(k) / double(n);
    for (const auto& [id, to] : targets) poses_[id].position = from[id] + (to - from[id]) * a;
    frame();
  }
}

void SceneScript::carry(std::uint32_t cube, Vec3 to, double height, double speed) {
  const Vec3 start = poses_.at(cube).position;
  move(cube, {start.x, start.y, height}, 0.25);
  const double d = std::hypot(to.x - start.x, to.y - start.y);
  move(cube, {to.x, to.y, height}, std::max(0.2, d / speed));
  move(cube, to, std::max(0.2, (height - to.z) / 0.12));
}

void SceneScript::rotate(std::uint32_t cube, Quat to, Seconds s) {
  const long n = std::max(1L, std::lround(s * rate_));
  const Quat from = poses_.at(cube).orientation;
  // Relative rotation split into equal angular steps.
  const Quat rel = (to * from.conjugate()).normalized();
  const double angle = 2 * std::acos(std::clamp(rel.w, -1.0, 1.0));
  Vec3 axis{rel.x, rel.y, rel.z};
  const double norm = std::sqrt(axis.x * axis.x + axis.y * axis.y + axis.z * axis.z);
  if (norm > 0) axis = axis / norm;
  for (long k = 1; k <= n; ++k) {
    poses_[cube].orientation =
        k == n ? to : (Quat::from_axis_angle(axis, angle * double(k) / double(n)) * from).normalized();
    frame();
  }
}

void SceneScript::shake(std::uint32_t cube, Vec3 axis, double amplitude, double hz, Seconds s) {
  const long n = std::max(1L, std::lround(s * rate_));
  const Vec3 center = poses_.at(cube).position;
  for (long k = 1; k <= n; ++k) {
    const double phase = 2 * std::numbers::pi * hz * double(k) / rate_;
    poses_[cube].position = k == n ? center : center + axis * (amplitude * std::sin(phase));
    frame();
  }
}

void SceneScript::sample(InputSample s) {
  const Seconds t = s.t;
  items_.push_back({t, 1, items_.size(), std::move(s)});
}

void SceneScript::stroke(std::uint32_t cube, std::uint32_t contact, Face face, Seconds start,
                         Seconds duration, double u0, double v0, double u1, double v1, double pressure,
                         int steps) {
  for (int k = 0; k <= steps; ++k) {
    const double a = double(k) / steps;
    const TouchPhase phase = k == 0 ? TouchPhase::down : (k == steps ? TouchPhase::up : TouchPhase::move);
    sample({start + duration * a,
            TouchSample{CubeId{cube}, ContactId{contact}, face, u0 + (u1 - u0) * a, v0 + (v1 - v0) * a,
                        pressure, phase}});
  }
}

void SceneScript::tap(std::uint32_t cube, std::uint32_t contact, Seconds start, double u, double v) {
  stroke(cube, contact, Face::pos_z, start, 0.08, u, v, u, v, 0.3, 1);
}

void SceneScript::hand(std::uint32_t hand, Seconds t, Vec3 palm, HandShape shape) {
  sample({t, HandSample{HandId{hand}, palm, shape}});
}

std::vector<InputSample> SceneScript::samples() const {
  auto items = items_;
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.priority != b.priority) return a.priority < b.priority;
    return a.seq < b.seq;
  });
  std::vector<InputSample> out;
  for (auto& i : items) out.push_back(i.sample);
  return out;
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

constexpr double kEdge = 0.033;
constexpr double kPitch = 0.0335;  // neighbours sit half a millimetre apart

struct Stage {
  SceneScript script;
  std::mt19937_64 rng;
  SpaceTimeCube data;
  SessionLayout layout;
  std::vector<std::size_t> slot_order;

  explicit Stage(std::uint64_t seed)
      : rng(seed), data(resolve_dataset("health_expenditure")), layout(default_layout(data)) {
    slot_order.resize(layout.slots.size());
    for (std::size_t i = 0; i < slot_order.size(); ++i) slot_order[i] = i;
    std::shuffle(slot_order.begin(), slot_order.end(), rng);
  }

  double jitter(double mag) { return std::uniform_real_distribution<double>(-mag, mag)(rng); }
  Vec3 rest(double x, double y) { return {x, y, script.rest_z()}; }
  Vec3 slot(std::size_t k) {
    const Vec3 c = layout.slots[slot_order[k]].center;
    return rest(c.x, c.y);
  }

  // Cubes start lined up in front of the interaction region.
  void tray(int count) {
    for (int i = 0; i < count; ++i) script.add_cube(std::uint32_t(i + 1), rest(0.66 + 0.055 * i, -0.08));
    script.wait(0.4);
  }

  void bind(std::uint32_t cube, std::size_t k, Vec3 dest) {
    script.carry(cube, slot(k));
    script.wait(0.8 + std::abs(jitter(0.1)));
    script.carry(cube, dest);
    script.wait(0.4);
  }

  TraceFile finish(std::string rulebook = "default") {
    script.wait(1.0);
    TraceFile f;
    f.header.dataset = "health_expenditure";
    f.header.rulebook = std::move(rulebook);
    for (auto& s : script.samples()) f.body.emplace_back(std::move(s));
    return f;
  }
};

// Two bound cubes brought side by side in the interaction region.
void neighbor_pair(Stage& st) {
  st.tray(2);
  const Vec3 a = st.rest(0.80, 0.20);
  st.bind(1, 0, a);
  st.bind(2, 1, st.rest(0.92, 0.20));
  st.script.move(2, st.rest(a.x + kPitch + st.jitter(0.0002), a.y + st.jitter(0.0003)), 0.7);
  st.script.wait(0.8);
}

TraceFile bind_two_neighbor(std::uint64_t seed) {
  Stage st(seed);
  neighbor_pair(st);
  return st.finish();
}

TraceFile stack_two(std::uint64_t seed) {
  Stage st(seed);
  st.tray(2);
  const Vec3 a = st.rest(0.82, 0.20);
  st.bind(1, 0, a);
  st.bind(2, 1, st.rest(0.94, 0.20));
  st.script.carry(2, {a.x + st.jitter(0.0003), a.y + st.jitter(0.0003), a.z + kEdge});
  st.script.wait(0.8);
  return st.finish();
}

TraceFile cover_hide(std::uint64_t seed) {
  Stage st(seed);
  neighbor_pair(st);
  const Pose p = st.script.pose(1);
  const double top = p.position.z + kEdge / 2;
  auto& s = st.script;
  // The hand comes in high, lowers over cube 1, rests, then leaves.
  const Vec3 far{1.3, 0.6, 0.35};
  const Vec3 above{p.position.x, p.position.y, top + 0.25};
  const Vec3 cover{p.position.x, p.position.y, top + 0.015};
  Seconds t = s.now() + 0.04;
  s.hand(1, t, far, HandShape::open);
  for (int k = 1; k <= 10; ++k) s.hand(1, t + 0.04 * k, far + (above - far) * (k / 10.0), HandShape::open);
  t += 0.44;
  for (int k = 1; k <= 12; ++k) s.hand(1, t + 0.04 * k, above + (cover - above) * (k / 12.0), HandShape::open);
  t += 0.52;
  s.wait(t - s.now() + 1.5 + std::abs(st.jitter(0.1)));
  t = s.now() + 0.04;
  for (int k = 1; k <= 12; ++k) s.hand(1, t + 0.04 * k, cover + (above - cover) * (k / 12.0), HandShape::open);
  t += 0.52;
  s.hand(1, t + 0.04, far, HandShape::open);
  s.wait(t - s.now() + 0.5);
  return st.finish();
}

TraceFile shake_reset(std::uint64_t seed) {
  Stage st(seed);
  neighbor_pair(st);
  auto& s = st.script;
  s.tap(2, 1, s.now() + 0.1);
  s.wait(1.0);
  const Vec3 home = s.pose(1).position;
  s.move(1, {home.x, home.y, 0.09}, 0.4);
  s.wait(0.2);
  s.shake(1, {1, 0, 0}, 0.03, 3.0, 1.4 + std::abs(st.jitter(0.1)));
  s.wait(1.4);
  s.carry(1, st.rest(0.70, 0.30), 0.09);
  s.wait(0.6);
  return st.finish();
}

TraceFile assemble_2x2x2(std::uint64_t seed) {
  Stage st(seed);
  st.tray(8);
  const double x0 = 0.84, y0 = 0.18;
  const int order[8][3] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0},
                           {0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}};
  for (int i = 0; i < 8; ++i) {
    const Vec3 dest{x0 + order[i][0] * kPitch + st.jitter(0.0002), y0 + order[i][1] * kPitch + st.jitter(0.0002),
                    st.script.rest_z() + order[i][2] * kEdge};
    st.bind(std::uint32_t(i + 1), std::size_t(i), dest);
  }
  return st.finish();
}

// One instance of every vocabulary row, each on its own cubes, spaced far
// enough apart that instances never interact.
TraceFile gesture_corpus(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto jit = [&] { return std::uniform_real_distribution<double>(0.0, 0.1)(rng); };
  SceneScript s;
  const double z = s.rest_z();
  std::uint32_t next_cube = 1;
  int slot = 0;
  auto place = [&] {
    const int i = slot++;
    return Vec3{1.3 + 0.3 * (i % 5), 0.3 * (i / 5), z};
  };
  auto cube_at = [&](Vec3 p, Quat q = {}) {
    const std::uint32_t id = next_cube++;
    s.add_cube(id, p, q);
    return id;
  };

  const std::uint32_t tap = cube_at(place());
  const std::uint32_t press = cube_at(place());
  const std::uint32_t hold = cube_at(place());
  const std::uint32_t dtap = cube_at(place());
  const std::uint32_t ttap = cube_at(place());
  const std::uint32_t pinch = cube_at(place());
  const std::uint32_t swipe = cube_at(place());
  const std::uint32_t path = cube_at(place());
  const Vec3 hover_open_at = place();
  const std::uint32_t hover_open = cube_at(hover_open_at);
  const Vec3 hover_fist_at = place();
  const std::uint32_t hover_fist = cube_at(hover_fist_at);
  const Vec3 cover_at = place();
  const std::uint32_t cover = cube_at(cover_at);
  const std::uint32_t pickup = cube_at(place());
  const std::uint32_t rotate = cube_at(place());
  const std::uint32_t translate = cube_at(place());
  Vec3 p = place();
  const std::uint32_t shake = cube_at({p.x, p.y, 0.1});
  p = place();
  const std::uint32_t nb_a = cube_at(p);
  const std::uint32_t nb_b = cube_at({p.x + 0.1, p.y, z});
  p = place();
  const std::uint32_t st_a = cube_at(p);
  const std::uint32_t st_b = cube_at({p.x, p.y, 0.1});
  p = place();
  const std::uint32_t as_a = cube_at(p);
  cube_at({p.x + kPitch, p.y, z});
  const std::uint32_t as_c = cube_at({p.x, p.y + 0.1, z});
  p = place();
  const std::uint32_t co_a = cube_at(p);
  const std::uint32_t co_b = cube_at({p.x, p.y - 0.25, z});
  (void)hover_open;
  (void)hover_fist;
  (void)cover;

  s.wait(0.5);
  auto gap = [&] { s.wait(1.5 + jit()); };
  std::uint32_t contact = 1;

  s.tap(tap, contact++, s.now() + 0.1);
  gap();
  s.stroke(press, contact++, Face::pos_z, s.now() + 0.1, 0.4, 0.5, 0.5, 0.5, 0.5, 0.8, 4);
  gap();
  s.stroke(hold, contact++, Face::pos_z, s.now() + 0.1, 1.0, 0.5, 0.5, 0.5, 0.5, 0.3, 5);
  s.wait(1.0);
  gap();
  s.tap(dtap, contact++, s.now() + 0.1);
  s.tap(dtap, contact++, s.now() + 0.3);
  gap();
  s.tap(ttap, contact++, s.now() + 0.1);
  s.tap(ttap, contact++, s.now() + 0.3);
  s.tap(ttap, contact++, s.now() + 0.5);
  gap();
  {
    const Seconds t = s.now() + 0.1;
    s.stroke(pinch, contact++, Face::pos_z, t, 0.3, 0.4, 0.5, 0.2, 0.5, 0.3, 4);
    s.stroke(pinch, contact++, Face::pos_z, t + 0.01, 0.3, 0.6, 0.5, 0.8, 0.5, 0.3, 4);
  }
  gap();
  s.stroke(swipe, contact++, Face::pos_z, s.now() + 0.1, 0.2, 0.1, 0.5, 0.9, 0.5, 0.3, 4);
  gap();
  {
    // Across the top face and down the +X side.
    const Seconds t = s.now() + 0.1;
    const std::uint32_t c = contact++;
    auto pt = [&](Seconds dt, Face f, double u, double v, TouchPhase ph) {
      s.sample({t + dt, TouchSample{CubeId{path}, ContactId{c}, f, u, v, 0.3, ph}});
    };
    pt(0.00, Face::pos_z, 0.3, 0.5, TouchPhase::down);
    pt(0.05, Face::pos_z, 0.6, 0.5, TouchPhase::move);
    pt(0.10, Face::pos_z, 0.95, 0.5, TouchPhase::move);
    pt(0.15, Face::pos_x, 0.5, 0.9, TouchPhase::move);
    pt(0.20, Face::pos_x, 0.5, 0.6, TouchPhase::move);
    pt(0.25, Face::pos_x, 0.5, 0.3, TouchPhase::up);
  }
  gap();
  const Vec3 away{4.0, 4.0, 0.5};
  {
    const double top = z + kEdge / 2;
    Seconds t = s.now() + 0.1;
    s.hand(1, t, {hover_open_at.x, hover_open_at.y, top + 0.08}, HandShape::open);
    s.hand(1, t + 0.5, away, HandShape::open);
    gap();
    t = s.now() + 0.1;
    s.hand(2, t, {hover_fist_at.x, hover_fist_at.y, top + 0.08}, HandShape::fist);
    s.hand(2, t + 0.5, away, HandShape::fist);
    gap();
    t = s.now() + 0.1;
    s.hand(3, t, {cover_at.x, cover_at.y, top + 0.015}, HandShape::open);
    gap();
  }
  {
    const Vec3 c = s.pose(pickup).position;
    s.move(pickup, {c.x, c.y, z + 0.05}, 0.3);
    gap();
  }
  s.rotate(rotate, Quat::from_axis_angle({0, 0, 1}, std::numbers::pi / 2), 0.6);
  gap();
  {
    const Vec3 c = s.pose(translate).position;
    s.move(translate, {c.x + 0.05, c.y, z}, 0.5);
    gap();
  }
  s.shake(shake, {1, 0, 0}, 0.03, 3.0, 1.5);
  s.wait(1.2);
  gap();
  {
    const Vec3 a = s.pose(nb_a).position;
    s.move(nb_b, {a.x + kPitch, a.y, z}, 0.6);
    gap();
  }
  {
    const Vec3 a = s.pose(st_a).position;
    s.move(st_b, {a.x, a.y, z + kEdge}, 0.6);
    gap();
  }
  {
    const Vec3 a = s.pose(as_a).position;
    s.move(as_c, {a.x, a.y + kPitch, z}, 0.6);
    gap();
  }
  {
    const Vec3 a = s.pose(co_a).position;
    s.move(co_b, {a.x, a.y - kPitch, z}, (0.25 - kPitch) / 0.5);
    gap();
  }

  TraceFile f;
  f.header.dataset = "health_expenditure";
  f.header.rulebook = "default";
  for (auto& smp : s.samples()) f.body.emplace_back(std::move(smp));
  return f;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"bind_two_neighbor", "stack_two",      "cover_hide",
                                              "shake_reset",       "assemble_2x2x2", "gesture_corpus"};
  return names;
}

TraceFile generate_scenario(std::string_view name, std::uint64_t seed) {
  if (name == "bind_two_neighbor") return bind_two_neighbor(seed);
  if (name == "stack_two") return stack_two(seed);
  if (name == "cover_hide") return cover_hide(seed);
  if (name == "shake_reset") return shake_reset(seed);
  if (name == "assemble_2x2x2") return assemble_2x2x2(seed);
  if (name == "gesture_corpus") return gesture_corpus(seed);
  throw Error(Errc::invalid_argument, "unknown scenario '" + std::string(name) + "'");
}

}  // namespace tcube
