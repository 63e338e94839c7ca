#include "tcube/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "tcube/error.hpp"

namespace tcube {

std::string_view to_string(ComponentKind k) {
  switch (k) {
    case ComponentKind::single: return "single";
    case ComponentKind::pair_neighbor: return "pair_neighbor";
    case ComponentKind::column_stack: return "column_stack";
    case ComponentKind::assembly: return "assembly";
  }
  return "?";
}

const Component* ConfigurationSummary::component_of(CubeId id) const {
  for (const auto& c : components)
    if (std::binary_search(c.members.begin(), c.members.end(), id)) return &c;
  return nullptr;
}

std::vector<CubeId> ConfigurationSummary::universe() const {
  std::vector<CubeId> ids;
  for (const auto& c : components) ids.insert(ids.end(), c.members.begin(), c.members.end());
  std::sort(ids.begin(), ids.end());
  return ids;
}

Face dominant_face(const Pose& pose) {
  constexpr double kTie = 1e-9;
  double best = -2.0;
  for (Face f : kAllFaces) best = std::max(best, pose.orientation.rotate(face_normal(f)).z);
  for (Face f : kAllFaces)
    if (pose.orientation.rotate(face_normal(f)).z >= best - kTie) return f;
  return Face::pos_z;
}

namespace {

// Face of `cube` whose world normal best points along `dir`.
Vec3 facing_normal(const Quat& q, const Vec3& dir) {
  Vec3 best{};
  double best_dot = -2.0;
  for (Face f : kAllFaces) {
    const Vec3 n = q.rotate(face_normal(f));
    const double d = n.dot(dir);
    if (d > best_dot + 1e-12) {
      best_dot = d;
      best = n;
    }
  }
  return best;
}

}  // namespace

std::optional<ContactRelation> contact_relation(const CubeState& a, const CubeState& b,
                                                const SpatialParams& params) {
  if (std::abs(a.edge - b.edge) > 1e-9)
    throw Error(Errc::unsupported_configuration, "contact test needs equal edge lengths");
  const double edge = a.edge;
  const Vec3 d = b.pose.position - a.pose.position;
  // Any accepted pair satisfies this bound; most pairs in a scene fail it.
  const double reach_along = edge + params.contact_gap_max;
  const double reach_side = params.lateral_offset_max * edge;
  if (d.dot(d) > (reach_along * reach_along + reach_side * reach_side) * (1.0 + 1e-9)) return std::nullopt;
  const Vec3 na = facing_normal(a.pose.orientation, d);
  const Vec3 nb = facing_normal(b.pose.orientation, -d);

  const double cos_limit = std::cos(deg_to_rad(params.antiparallel_max_deg));
  if (-na.dot(nb) < cos_limit) return std::nullopt;

  Vec3 n = na - nb;
  n = n / n.norm();
  const double along = d.dot(n);
  const double gap = along - edge;
  if (gap > params.contact_gap_max || gap < -params.contact_gap_max) return std::nullopt;
  const double lateral = (d - n * along).norm() / edge;
  if (lateral > params.lateral_offset_max) return std::nullopt;

  ContactRelation rel;
  rel.a = a.id;
  rel.b = b.id;
  rel.gap = gap;
  rel.lateral_offset = lateral;
  const bool vertical = std::abs(n.z) > std::max(std::abs(n.x), std::abs(n.y));
  rel.kind = vertical ? ContactKind::stacked : ContactKind::neighbor;
  rel.a_below = vertical && n.z > 0.0;
  return rel;
}

ContactGraph build_contact_graph(std::span<const CubeState> states, const SpatialParams& params) {
  std::vector<const CubeState*> order;
  order.reserve(states.size());
  for (const auto& s : states) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](auto* l, auto* r) { return l->id < r->id; });
  ContactGraph g;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0 && order[i]->id == order[i - 1]->id)
      throw Error(Errc::invalid_argument, "duplicate cube id " + std::to_string(order[i]->id.value));
    g.nodes.push_back(order[i]->id);
  }
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j)
      if (auto rel = contact_relation(*order[i], *order[j], params)) g.edges.push_back(*rel);
  return g;
}

ConfigurationSummary classify_components(const ContactGraph& graph,
                                         std::span<const CubeState> states,
                                         const SpatialParams& params) {
  std::map<CubeId, const CubeState*> by_id;
  for (const auto& s : states) by_id[s.id] = &s;
  for (CubeId id : graph.nodes)
    if (!by_id.count(id))
      throw Error(Errc::invalid_argument, "no state for cube " + std::to_string(id.value));

  // Union-find over node indices.
  std::map<CubeId, std::size_t> index;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) index[graph.nodes[i]] = i;
  std::vector<std::size_t> parent(graph.nodes.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : graph.edges) {
    auto ra = find(index.at(e.a)), rb = find(index.at(e.b));
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }

  std::map<std::size_t, std::vector<CubeId>> groups;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) groups[find(i)].push_back(graph.nodes[i]);

  ConfigurationSummary out;
  for (auto& [root, members] : groups) {
    Component c;
    c.members = members;
    std::vector<const ContactRelation*> edges;
    for (const auto& e : graph.edges)
      if (std::binary_search(members.begin(), members.end(), e.a)) edges.push_back(&e);

    if (members.size() == 1) {
      c.kind = ComponentKind::single;
    } else {
      std::map<CubeId, int> degree;
      bool all_stacked = true;
      for (auto* e : edges) {
        ++degree[e->a];
        ++degree[e->b];
        all_stacked = all_stacked && e->kind == ContactKind::stacked;
      }
      const bool chain = edges.size() == members.size() - 1 &&
                         std::all_of(degree.begin(), degree.end(),
                                     [](const auto& kv) { return kv.second <= 2; });
      if (all_stacked && chain)
        c.kind = ComponentKind::column_stack;
      else if (members.size() == 2)
        c.kind = ComponentKind::pair_neighbor;
      else
        c.kind = ComponentKind::assembly;
    }

    // Lead body axes, permuted so the one closest to world up becomes z.
    const CubeState& lead = *by_id.at(members.front());
    const Mat3 b = basis(lead.pose.orientation);
    std::size_t k = 0;
    for (std::size_t i = 1; i < 3; ++i)
      if (std::abs(b[i].z) > std::abs(b[k].z) + 1e-9) k = i;
    const double s = b[k].z < 0.0 ? -1.0 : 1.0;
    const Vec3 ax = b[(k + 1) % 3] * s, ay = b[(k + 2) % 3], az = b[k] * s;
    std::set<LatticeCoord> seen;
    for (CubeId id : members) {
      const Vec3 off = (by_id.at(id)->pose.position - lead.pose.position) / lead.edge;
      const Vec3 rel{off.dot(ax), off.dot(ay), off.dot(az)};
      LatticeCoord lc{static_cast<int>(std::lround(rel.x)), static_cast<int>(std::lround(rel.y)),
                      static_cast<int>(std::lround(rel.z))};
      const double dev = std::max({std::abs(rel.x - lc.x), std::abs(rel.y - lc.y),
                                   std::abs(rel.z - lc.z)});
      if (dev > params.lattice_tolerance || !seen.insert(lc).second)
        throw Error(Errc::degenerate_configuration,
                    "cube " + std::to_string(id.value) + " is not on the component lattice");
      c.lattice.push_back(lc);
    }
    out.components.push_back(std::move(c));
  }
  return out;
}

namespace {

Vec3 held_position(std::span<const TimedPosition> hist, Seconds t) {
  Vec3 p = hist.front().position;
  for (const auto& s : hist) {
    if (s.t > t) break;
    p = s.position;
  }
  return p;
}

}  // namespace

double relative_approach_speed(std::span<const TimedPosition> hist_a,
                               std::span<const TimedPosition> hist_b, Seconds window) {
  if (hist_a.empty() || hist_b.empty())
    throw Error(Errc::insufficient_history, "empty pose history");
  const Seconds t_end = std::max(hist_a.back().t, hist_b.back().t);
  const Seconds t_start = t_end - window;
  auto in_window = [&](std::span<const TimedPosition> h) {
    std::size_t first = 0;
    while (first < h.size() && h[first].t < t_start) ++first;
    return h.subspan(first);
  };
  auto wa = in_window(hist_a);
  auto wb = in_window(hist_b);
  if (wa.size() < 2 || wb.size() < 2)
    throw Error(Errc::insufficient_history, "need two samples per cube inside the window");

  std::vector<Seconds> times;
  for (const auto& s : wa) times.push_back(s.t);
  for (const auto& s : wb) times.push_back(s.t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  if (times.size() < 2) return 0.0;

  double mean_t = 0.0, mean_d = 0.0;
  std::vector<double> dist;
  for (Seconds t : times) {
    dist.push_back((held_position(wa, t) - held_position(wb, t)).norm());
    mean_t += t;
    mean_d += dist.back();
  }
  mean_t /= static_cast<double>(times.size());
  mean_d /= static_cast<double>(times.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    sxy += (times[i] - mean_t) * (dist[i] - mean_d);
    sxx += (times[i] - mean_t) * (times[i] - mean_t);
  }
  if (sxx == 0.0) return 0.0;
  return -sxy / sxx;
}

namespace {
double half_height(const Quat& q, double edge) {
  const Mat3 b = basis(q);
  return 0.5 * edge * (std::abs(b[0].z) + std::abs(b[1].z) + std::abs(b[2].z));
}
}  // namespace

double bottom_z(const Pose& pose, double edge) {
  return pose.position.z - half_height(pose.orientation, edge);
}

double top_z(const Pose& pose, double edge) {
  return pose.position.z + half_height(pose.orientation, edge);
}

}  // namespace tcube
