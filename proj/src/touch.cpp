#include <algorithm>
#include <cmath>
#include <sstream>

#include "tcube/error.hpp"
#include "tcube/recognizer.hpp"
#include "tcube/text.hpp"

namespace tcube {

namespace {

// In-face unit directions of increasing u and v.
std::pair<Vec3, Vec3> face_frame(Face f) {
  switch (f) {
    case Face::pos_x: return {{0, 1, 0}, {0, 0, 1}};
    case Face::neg_x: return {{0, -1, 0}, {0, 0, 1}};
    case Face::pos_y: return {{-1, 0, 0}, {0, 0, 1}};
    case Face::neg_y: return {{1, 0, 0}, {0, 0, 1}};
    case Face::pos_z: return {{1, 0, 0}, {0, 1, 0}};
    case Face::neg_z: return {{1, 0, 0}, {0, -1, 0}};
  }
  return {};
}

InteractionEvent make(Seconds t, EventKind kind, CubeId cube, EventPayload payload = {}) {
  return {t, kind, Subject::cube(cube), std::move(payload)};
}

double segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.dot(ab);
  if (len2 == 0.0) return (p - a).norm();
  const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + ab * s)).norm();
}

// Edges of the cube a face point lies close to, encoded as a bitmask of
// (axis, sign) pairs other than the face's own.
int near_edges(const Vec3& p, double band) {
  int mask = 0;
  for (int axis = 0; axis < 3; ++axis) {
    if (p[axis] >= 0.5 - band) mask |= 1 << (2 * axis);
    if (p[axis] <= -0.5 + band) mask |= 1 << (2 * axis + 1);
  }
  return mask;
}

int face_bit(Face f) {
  switch (f) {
    case Face::pos_x: return 1 << 0;
    case Face::neg_x: return 1 << 1;
    case Face::pos_y: return 1 << 2;
    case Face::neg_y: return 1 << 3;
    case Face::pos_z: return 1 << 4;
    case Face::neg_z: return 1 << 5;
  }
  return 0;
}

Vec3 point_at(const ContactTrace& c, Seconds t) {
  const TouchPoint* p = &c.points.front();
  for (const auto& q : c.points) {
    if (q.t > t) break;
    p = &q;
  }
  return face_point(p->face, p->u, p->v);
}

const TouchPoint& touch_at(const ContactTrace& c, Seconds t) {
  const TouchPoint* p = &c.points.front();
  for (const auto& q : c.points) {
    if (q.t > t) break;
    p = &q;
  }
  return *p;
}

}  // namespace

Vec3 face_point(Face face, double u, double v) {
  const auto [du, dv] = face_frame(face);
  return face_normal(face) * 0.5 + du * (u - 0.5) + dv * (v - 0.5);
}

std::optional<InteractionEvent> classify_contact(const ContactTrace& trace, double edge,
                                                 const RecognizerParams& params) {
  if (trace.points.empty()) return std::nullopt;
  const auto& pts = trace.points;
  const TouchPoint& first = pts.front();
  const TouchPoint& last = pts.back();
  const Seconds duration = last.t - first.t;

  std::vector<Face> faces;
  std::vector<Vec3> local;
  for (const auto& p : pts) {
    if (faces.empty() || faces.back() != p.face) faces.push_back(p.face);
    local.push_back(face_point(p.face, p.u, p.v));
  }
  double travel = 0.0;
  for (const auto& p : local) travel = std::max(travel, (p - local.front()).norm() * edge);
  const double chord = (local.back() - local.front()).norm() * edge;

  if (faces.size() >= 2 || travel >= params.swipe_min_travel) {
    double deviation = 0.0;
    for (const auto& p : local)
      deviation = std::max(deviation, segment_distance(p, local.front(), local.back()) * edge);
    const bool straight = faces.size() == 1 && chord >= params.swipe_min_travel &&
                          deviation <= params.path_max_deviation * chord;
    if (straight) {
      const double du = last.u - first.u;
      const double dv = last.v - first.v;
      SwipeDirection dir;
      if (std::abs(du) >= std::abs(dv))
        dir = du >= 0 ? SwipeDirection::pos_u : SwipeDirection::neg_u;
      else
        dir = dv >= 0 ? SwipeDirection::pos_v : SwipeDirection::neg_v;
      return make(last.t, EventKind::swipe, trace.cube, SwipeInfo{first.face, dir});
    }
    PathInfo path;
    path.faces = faces;
    for (const auto& p : local)
      if (path.polyline.empty() || !(path.polyline.back() == p)) path.polyline.push_back(p);
    return make(last.t, EventKind::path, trace.cube, std::move(path));
  }

  // Longest run at or above the press threshold; a run lasts until the
  // first sample that drops below it, or until release.
  double best_run = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].pressure < params.press_min_pressure) continue;
    std::size_t j = i;
    double run_peak = 0.0;
    while (j < pts.size() && pts[j].pressure >= params.press_min_pressure) {
      run_peak = std::max(run_peak, pts[j].pressure);
      ++j;
    }
    const Seconds end = j < pts.size() ? pts[j].t : pts.back().t;
    if (end - pts[i].t > best_run) {
      best_run = end - pts[i].t;
      peak = run_peak;
    }
    i = j;
  }
  if (best_run >= params.press_min_duration)
    return make(last.t, EventKind::press, trace.cube, PressInfo{peak});
  if (duration >= params.hold_min_duration) return make(last.t, EventKind::hold, trace.cube);
  if (duration <= params.tap_max_duration && travel <= params.tap_max_travel)
    return make(last.t, EventKind::tap, trace.cube);
  return std::nullopt;
}

InteractionEvent classify_pinch(const ContactTrace& first, const ContactTrace& second,
                                double edge, const RecognizerParams& params) {
  const Seconds start = std::max(first.points.front().t, second.points.front().t);
  const Seconds end = std::min(first.points.back().t, second.points.back().t);
  const Vec3 a0 = point_at(first, start), b0 = point_at(second, start);
  const Vec3 a1 = point_at(first, end), b1 = point_at(second, end);
  const double s0 = (a0 - b0).norm() * edge;
  const double s1 = (a1 - b1).norm() * edge;

  const TouchPoint& ta = touch_at(first, start);
  const TouchPoint& tb = touch_at(second, start);
  const int ea = near_edges(a0, params.pinch_edge_band) & ~face_bit(ta.face);
  const int eb = near_edges(b0, params.pinch_edge_band) & ~face_bit(tb.face);
  // Two points share an edge when each lies on one of the edge's faces and
  // near the other: same face and a common near edge, or adjacent faces.
  bool edge_site = false;
  if (ta.face == tb.face)
    edge_site = (ea & eb) != 0;
  else
    edge_site = (ea & face_bit(tb.face)) && (eb & face_bit(ta.face));

  PinchInfo info;
  info.site = edge_site ? PinchSite::edge : PinchSite::surface;
  info.scale_ratio = s0 > 0.0 ? s1 / s0 : 1.0;
  const Seconds t = std::max(first.points.back().t, second.points.back().t);
  return make(t, EventKind::pinch, first.cube, info);
}

// ---------------------------------------------------------------------------

bool TouchTracker::touching(CubeId cube) const {
  auto it = episodes_.find(cube);
  return it != episodes_.end() && !it->second.active.empty();
}

void TouchTracker::check(const TouchSample& s) const {
  bool active = false;
  if (auto it = episodes_.find(s.cube); it != episodes_.end())
    for (const auto& c : it->second.active) active = active || c.contact == s.contact;
  if (s.phase == TouchPhase::down && active)
    throw Error(Errc::malformed_sample,
                "contact " + std::to_string(s.contact.value) + " is already down");
  if (s.phase != TouchPhase::down && !active)
    throw Error(Errc::malformed_sample,
                "contact " + std::to_string(s.contact.value) + " has no down");
}

std::vector<InteractionEvent> TouchTracker::step(Seconds t, const TouchSample& s, double edge,
                                                 const RecognizerParams& params) {
  check(s);
  Episode& ep = episodes_[s.cube];
  const TouchPoint point{t, s.face, s.u, s.v, s.pressure};
  if (s.phase == TouchPhase::down) {
    ep.active.push_back({s.cube, s.contact, {point}});
    return {};
  }
  auto it = std::find_if(ep.active.begin(), ep.active.end(),
                         [&](const ContactTrace& c) { return c.contact == s.contact; });
  it->points.push_back(point);
  if (s.phase == TouchPhase::move) return {};
  ep.ended.push_back(std::move(*it));
  ep.active.erase(it);
  if (!ep.active.empty()) return {};
  Episode done = std::move(ep);
  episodes_.erase(s.cube);
  return finish_episode(s.cube, std::move(done), edge, params);
}

std::vector<InteractionEvent> TouchTracker::finish_episode(CubeId cube, Episode ep, double edge,
                                                           const RecognizerParams& params) {
  std::vector<InteractionEvent> out;
  const Seconds now = ep.ended.back().points.back().t;
  auto resolve_pending = [&] {
    if (auto p = pending_.find(cube); p != pending_.end()) {
      PendingTaps taps = p->second;
      taps.deadline = std::min(taps.deadline, now);
      out.push_back(release(cube, taps));
      pending_.erase(p);
    }
  };

  if (ep.ended.size() >= 2) {
    std::stable_sort(ep.ended.begin(), ep.ended.end(),
                     [](const ContactTrace& a, const ContactTrace& b) {
                       if (a.points.front().t != b.points.front().t)
                         return a.points.front().t < b.points.front().t;
                       return a.contact < b.contact;
                     });
    resolve_pending();
    out.push_back(classify_pinch(ep.ended[0], ep.ended[1], edge, params));
    return out;
  }

  const ContactTrace& c = ep.ended.front();
  auto event = classify_contact(c, edge, params);
  if (event && event->kind == EventKind::tap) {
    auto taps = add_tap(cube, c.points.front().t, c.points.back().t, params);
    out.insert(out.end(), taps.begin(), taps.end());
    return out;
  }
  resolve_pending();
  if (event) out.push_back(std::move(*event));
  return out;
}

std::vector<InteractionEvent> TouchTracker::add_tap(CubeId cube, Seconds down, Seconds up,
                                                    const RecognizerParams& params) {
  std::vector<InteractionEvent> out;
  auto it = pending_.find(cube);
  if (it != pending_.end() && down - it->second.last_up <= params.multi_tap_gap) {
    PendingTaps& p = it->second;
    if (++p.count == 3) {
      out.push_back(make(up, EventKind::triple_tap, cube));
      pending_.erase(it);
      return out;
    }
    p.last_up = up;
    p.deadline = up + params.multi_tap_gap;
    return out;
  }
  if (it != pending_.end()) {
    PendingTaps late = it->second;
    late.deadline = std::min(late.deadline, up);
    out.push_back(release(cube, late));
  }
  pending_[cube] = PendingTaps{1, up, up + params.multi_tap_gap};
  return out;
}

InteractionEvent TouchTracker::release(CubeId cube, const PendingTaps& p) const {
  return make(p.deadline, p.count >= 2 ? EventKind::double_tap : EventKind::tap, cube);
}

bool TouchTracker::blocked(CubeId cube, Seconds deadline) const {
  auto it = episodes_.find(cube);
  if (it == episodes_.end()) return false;
  for (const auto& c : it->second.active)
    if (c.points.front().t <= deadline) return true;
  return false;
}

std::vector<InteractionEvent> TouchTracker::expire(Seconds t) {
  std::vector<InteractionEvent> out;
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (t > it->second.deadline && !blocked(it->first, it->second.deadline)) {
      out.push_back(release(it->first, it->second));
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

std::vector<InteractionEvent> TouchTracker::flush() {
  std::vector<InteractionEvent> out;
  for (const auto& [cube, p] : pending_) out.push_back(release(cube, p));
  pending_.clear();
  return out;
}

std::string TouchTracker::state_text() const {
  std::ostringstream os;
  for (const auto& [cube, ep] : episodes_) {
    os << "touch cube=" << cube.value;
    for (const auto& c : ep.active)
      os << " active=" << c.contact.value << ':' << c.points.size() << ':'
         << format_number(c.points.front().t);
    for (const auto& c : ep.ended) os << " ended=" << c.contact.value << ':' << c.points.size();
    os << '\n';
  }
  for (const auto& [cube, p] : pending_)
    os << "taps cube=" << cube.value << " count=" << p.count
       << " last_up=" << format_number(p.last_up) << " deadline=" << format_number(p.deadline)
       << '\n';
  return os.str();
}

}  // namespace tcube
