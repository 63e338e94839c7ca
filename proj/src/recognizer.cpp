#include "tcube/recognizer.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "tcube/error.hpp"
#include "tcube/text.hpp"

namespace tcube {

namespace {

bool contains(const std::vector<CubeId>& outer, const std::vector<CubeId>& inner) {
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

void sort_bucket(std::vector<InteractionEvent>& v) {
  std::stable_sort(v.begin(), v.end(), [](const InteractionEvent& a, const InteractionEvent& b) {
    return a.subject.lead() < b.subject.lead();
  });
}

Vec3 held(std::span<const TimedPosition> h, Seconds t) {
  Vec3 p = h.front().position;
  for (const auto& s : h) {
    if (s.t > t) break;
    p = s.position;
  }
  return p;
}

}  // namespace

std::vector<InteractionEvent> diff_configurations(const ConfigurationSummary& prev,
                                                  const ConfigurationSummary& next, Seconds t) {
  if (prev.universe() != next.universe())
    throw Error(Errc::mismatched_universe, "configurations cover different cubes");
  std::vector<InteractionEvent> out;
  for (const auto& p : prev.components) {
    if (p.members.size() < 2) continue;
    const bool kept = std::any_of(next.components.begin(), next.components.end(),
                                  [&](const Component& n) { return contains(n.members, p.members); });
    if (!kept) out.push_back({t, EventKind::disassembled, Subject::group(p.members), {}});
  }
  for (const auto& n : next.components) {
    if (n.members.size() < 2) continue;
    bool formed = true;
    for (const auto& p : prev.components) {
      if (!contains(p.members, n.members)) continue;
      formed = p.members == n.members && p.kind != n.kind;
      break;
    }
    if (!formed) continue;
    const Subject subject = Subject::group(n.members);
    switch (n.kind) {
      case ComponentKind::pair_neighbor:
        out.push_back({t, EventKind::neighbored, subject, NeighborInfo{n.members[1]}});
        break;
      case ComponentKind::column_stack: {
        std::size_t low = 0;
        for (std::size_t i = 1; i < n.members.size(); ++i)
          if (n.lattice[i].z < n.lattice[low].z) low = i;
        out.push_back({t, EventKind::stacked, subject, StackInfo{n.members[low]}});
        break;
      }
      case ComponentKind::assembly:
        out.push_back({t, EventKind::assembled, subject, {}});
        break;
      case ComponentKind::single:
        break;
    }
  }
  return out;
}

std::optional<InteractionEvent> detect_collide(CubeId a, std::span<const TimedPosition> hist_a,
                                               CubeId b, std::span<const TimedPosition> hist_b,
                                               Seconds t, const RecognizerParams& params) {
  double speed = 0.0;
  try {
    speed = relative_approach_speed(hist_a, hist_b, params.collide_window);
  } catch (const Error& e) {
    if (e.code() == Errc::insufficient_history) return std::nullopt;
    throw;
  }
  if (speed < params.collide_min_speed - 1e-9) return std::nullopt;
  const Seconds t0 = t - params.collide_window;
  const double move_a = (held(hist_a, t) - held(hist_a, t0)).norm();
  const double move_b = (held(hist_b, t) - held(hist_b, t0)).norm();
  const bool a_moves = move_a >= move_b;
  return InteractionEvent{t, EventKind::collide, Subject::cube(a_moves ? a : b),
                          CollideInfo{a_moves ? b : a}};
}

// ---------------------------------------------------------------------------

Recognizer::Recognizer(RecognizerParams params, SpatialParams spatial)
    : params_(params), spatial_(spatial) {}

std::vector<CubeId> Recognizer::cubes() const {
  std::vector<CubeId> ids;
  for (const auto& [id, m] : motion_) ids.push_back(id);
  return ids;
}

std::vector<CubeState> Recognizer::cube_states() const {
  std::vector<CubeState> out;
  for (const auto& [id, m] : motion_) out.push_back({id, spatial_.cube_edge, m.pose()});
  return out;
}

double Recognizer::support_height(CubeId id, const Pose& pose) const {
  const double edge = spatial_.cube_edge;
  const double bottom = bottom_z(pose, edge);
  double support = 0.0;
  for (const auto& [other, m] : motion_) {
    if (other == id) continue;
    if (planar_distance(m.pose().position, pose.position) > 0.5 * edge) continue;
    const double top = top_z(m.pose(), edge);
    if (top <= bottom + 0.5 * edge) support = std::max(support, top);
  }
  return bottom - support;
}

std::vector<TimedPosition> Recognizer::positions(CubeId id) const {
  std::vector<TimedPosition> out;
  for (const auto& s : motion_.at(id).history()) out.push_back({s.t, s.pose.position});
  return out;
}

std::vector<InteractionEvent> Recognizer::expire(Seconds t) {
  auto out = touch_.expire(t);
  for (auto& [id, m] : motion_) {
    auto ev = m.expire(t, params_);
    out.insert(out.end(), ev.begin(), ev.end());
  }
  return out;
}

std::vector<InteractionEvent> Recognizer::update_configuration(Seconds t, bool new_cube) {
  const auto states = cube_states();
  ContactGraph graph = build_contact_graph(states, spatial_);
  // Same contacts, same components: nothing to classify or report.
  auto same_topology = [](const ContactGraph& a, const ContactGraph& b) {
    return a.nodes == b.nodes && std::equal(a.edges.begin(), a.edges.end(), b.edges.begin(), b.edges.end(),
                                            [](const ContactRelation& x, const ContactRelation& y) {
                                              return x.a == y.a && x.b == y.b && x.kind == y.kind &&
                                                     x.a_below == y.a_below;
                                            });
  };
  if (!new_cube && !graph_.nodes.empty() && same_topology(graph, graph_)) {
    graph_ = std::move(graph);
    return {};
  }
  ConfigurationSummary summary;
  try {
    summary = classify_components(graph, states, spatial_);
  } catch (const Error& e) {
    if (e.code() == Errc::degenerate_configuration) return {};
    throw;
  }
  if (new_cube || summary.universe() != summary_.universe()) {
    summary_ = std::move(summary);
    graph_ = std::move(graph);
    return {};
  }

  auto events = diff_configurations(summary_, summary, t);
  std::set<std::pair<CubeId, CubeId>> old_edges;
  for (const auto& e : graph_.edges) old_edges.insert({e.a, e.b});

  // Stationary cubes have sparse histories; pad with held positions so the
  // approach speed sees both cubes across the whole window.
  auto padded = [&](CubeId id) {
    auto h = positions(id);
    const Seconds t0 = t - params_.collide_window;
    const Vec3 start = held(h, t0);
    std::vector<TimedPosition> out{{t0, start}};
    for (const auto& s : h)
      if (s.t > t0) out.push_back(s);
    if (out.back().t < t) out.push_back({t, out.back().position});
    return out;
  };
  std::vector<InteractionEvent> collides;
  for (const auto& e : graph.edges) {
    if (old_edges.count({e.a, e.b})) continue;
    auto ha = padded(e.a), hb = padded(e.b);
    if (auto c = detect_collide(e.a, ha, e.b, hb, t, params_)) collides.push_back(*c);
  }
  for (const auto& c : collides) {
    auto pair = Subject::group({c.subject.lead(), std::get<CollideInfo>(c.payload).other});
    std::erase_if(events, [&](const InteractionEvent& e) {
      return e.subject.members == pair.members && e.kind != EventKind::disassembled;
    });
  }

  std::vector<InteractionEvent> out;
  for (const auto& e : events)
    if (e.kind == EventKind::disassembled) out.push_back(e);
  out.insert(out.end(), collides.begin(), collides.end());
  for (const auto& e : events)
    if (e.kind != EventKind::disassembled) out.push_back(e);
  for (const auto& e : out) {
    if (e.kind == EventKind::disassembled) continue;
    for (CubeId id : e.subject.members) motion_.at(id).absorb_slide();
    if (auto* c = std::get_if<CollideInfo>(&e.payload)) motion_.at(c->other).absorb_slide();
  }

  summary_ = std::move(summary);
  graph_ = std::move(graph);
  return out;
}

std::vector<InteractionEvent> Recognizer::ingest(const ValidatedSample& vs) {
  const InputSample& s = vs.sample;
  if (started_ && s.t < last_t_)
    throw Error(Errc::ordering, "sample at t=" + format_number(s.t) + " precedes t=" +
                                    format_number(last_t_));
  if (auto* touch = std::get_if<TouchSample>(&s.payload)) {
    if (!tracked(touch->cube))
      throw Error(Errc::unknown_subject,
                  "touch on untracked cube " + std::to_string(touch->cube.value));
    touch_.check(*touch);
  }

  std::vector<InteractionEvent> touch_ev, hand_ev, motion_ev, config_ev;
  {
    auto expired = expire(s.t);
    for (auto& e : expired) {
      const bool is_touch = e.kind <= EventKind::path;
      (is_touch ? touch_ev : motion_ev).push_back(std::move(e));
    }
  }

  if (auto* pose = std::get_if<PoseSample>(&s.payload)) {
    const double height = support_height(pose->cube, pose->pose);
    auto it = motion_.find(pose->cube);
    const bool is_new = it == motion_.end();
    if (is_new) {
      motion_.emplace(pose->cube, MotionTracker(pose->cube, s.t, pose->pose, height, params_));
    } else {
      auto ev = it->second.step(s.t, pose->pose, height, params_);
      motion_ev.insert(motion_ev.end(), ev.begin(), ev.end());
    }
    config_ev = update_configuration(s.t, is_new);
  } else if (auto* touch = std::get_if<TouchSample>(&s.payload)) {
    auto ev = touch_.step(s.t, *touch, spatial_.cube_edge, params_);
    touch_ev.insert(touch_ev.end(), ev.begin(), ev.end());
  } else if (auto* hand = std::get_if<HandSample>(&s.payload)) {
    std::vector<HandTarget> targets;
    for (const auto& c : cube_states()) targets.push_back({c, touch_.touching(c.id)});
    hand_ev = step_hand(hands_[hand->hand], s.t, *hand, targets, params_);
  }

  last_t_ = s.t;
  started_ = true;
  std::vector<InteractionEvent> out;
  for (auto* bucket : {&touch_ev, &hand_ev, &motion_ev, &config_ev}) {
    sort_bucket(*bucket);
    out.insert(out.end(), bucket->begin(), bucket->end());
  }
  return out;
}

std::vector<InteractionEvent> Recognizer::flush(Seconds t_end) {
  auto touch_ev = touch_.flush();
  std::vector<InteractionEvent> motion_ev;
  for (auto& [id, m] : motion_) {
    auto ev = m.flush(t_end, params_);
    motion_ev.insert(motion_ev.end(), ev.begin(), ev.end());
  }
  sort_bucket(touch_ev);
  sort_bucket(motion_ev);
  touch_ev.insert(touch_ev.end(), motion_ev.begin(), motion_ev.end());
  return touch_ev;
}

std::string Recognizer::state_text() const {
  std::ostringstream os;
  os << "t=" << format_number(last_t_) << '\n';
  for (const auto& [id, m] : motion_) {
    const Pose& p = m.pose();
    os << "pose cube=" << id.value << " p=" << format_number(p.position.x) << ','
       << format_number(p.position.y) << ',' << format_number(p.position.z) << '\n';
    os << m.state_text();
  }
  os << touch_.state_text();
  for (const auto& [id, h] : hands_)
    os << "hand id=" << id.value << " mode=" << static_cast<int>(h.mode)
       << " cube=" << h.cube.value << " shape=" << to_string(h.shape) << '\n';
  for (const auto& c : summary_.components) {
    os << "component kind=" << to_string(c.kind) << " members=";
    for (std::size_t i = 0; i < c.members.size(); ++i)
      os << (i ? "," : "") << c.members[i].value << '@' << c.lattice[i].x << ':'
         << c.lattice[i].y << ':' << c.lattice[i].z;
    os << '\n';
  }
  return os.str();
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string Recognizer::digest() const { return fnv1a_hex(state_text()); }

}  // namespace tcube
