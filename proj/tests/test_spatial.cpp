#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "support.hpp"
#include "tcube/spatial.hpp"

using namespace tcube;

namespace {

constexpr double kEdge = 0.033;

CubeState cube(std::uint32_t id, Vec3 p, Quat q = {}) { return {CubeId{id}, kEdge, {p, q}}; }

std::vector<CubeState> lattice(const std::vector<LatticeCoord>& coords, Vec3 origin = {0.3, 0.2, kEdge / 2}) {
  std::vector<CubeState> out;
  std::uint32_t id = 1;
  for (const auto& c : coords)
    out.push_back(cube(id++, origin + Vec3{double(c.x), double(c.y), double(c.z)} * kEdge));
  return out;
}

// Independent oracle: face adjacency on an ideal lattice.
std::set<std::pair<std::uint32_t, std::uint32_t>> lattice_edges(const std::vector<LatticeCoord>& c) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> out;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j)
      if (std::abs(c[i].x - c[j].x) + std::abs(c[i].y - c[j].y) + std::abs(c[i].z - c[j].z) == 1)
        out.insert({std::uint32_t(i + 1), std::uint32_t(j + 1)});
  return out;
}

std::set<std::pair<std::uint32_t, std::uint32_t>> edge_set(const ContactGraph& g) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> out;
  for (const auto& e : g.edges) out.insert({e.a.value, e.b.value});
  return out;
}

}  // namespace

TEST_CASE("side by side cubes are neighbors") {
  SpatialParams p;
  auto rel = contact_relation(cube(1, {0, 0, 0}), cube(2, {kEdge + 0.002, 0, 0}), p);
  REQUIRE(rel);
  CHECK(rel->kind == ContactKind::neighbor);
  CHECK(rel->gap == doctest::Approx(0.002));
  CHECK_FALSE(contact_relation(cube(1, {0, 0, 0}), cube(2, {kEdge + 0.006, 0, 0}), p));
}

TEST_CASE("lateral offset and misalignment limits") {
  SpatialParams p;
  CHECK(contact_relation(cube(1, {}), cube(2, {kEdge, 0.24 * kEdge, 0}), p));
  CHECK_FALSE(contact_relation(cube(1, {}), cube(2, {kEdge, 0.26 * kEdge, 0}), p));
  const Quat tilt10 = Quat::from_axis_angle({0, 0, 1}, deg_to_rad(10));
  const Quat tilt20 = Quat::from_axis_angle({0, 0, 1}, deg_to_rad(20));
  CHECK(contact_relation(cube(1, {}), cube(2, {kEdge, 0, 0}, tilt10), p));
  CHECK_FALSE(contact_relation(cube(1, {}), cube(2, {kEdge + 0.004, 0, 0}, tilt20), p));
}

TEST_CASE("vertical contact is a stack") {
  SpatialParams p;
  auto rel = contact_relation(cube(1, {0, 0, kEdge / 2}), cube(2, {0, 0, 1.5 * kEdge}), p);
  REQUIRE(rel);
  CHECK(rel->kind == ContactKind::stacked);
  CHECK(rel->a_below);
  auto rev = contact_relation(cube(2, {0, 0, 1.5 * kEdge}), cube(1, {0, 0, kEdge / 2}), p);
  REQUIRE(rev);
  CHECK_FALSE(rev->a_below);
}

TEST_CASE("different edge lengths are unsupported") {
  CubeState big{CubeId{2}, 0.1, {{0.1, 0, 0}, {}}};
  CHECK_ERRC(contact_relation(cube(1, {}), big, SpatialParams{}), Errc::unsupported_configuration);
}

TEST_CASE("duplicate ids are rejected") {
  std::vector<CubeState> s{cube(1, {}), cube(1, {1, 0, 0})};
  CHECK_ERRC(build_contact_graph(s, SpatialParams{}), Errc::invalid_argument);
}

TEST_CASE("2x2x2 block has twelve contacts") {
  std::vector<LatticeCoord> coords;
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 2; ++x) coords.push_back({x, y, z});
  const auto states = lattice(coords);
  const auto g = build_contact_graph(states, SpatialParams{});
  CHECK(lattice_edges(coords).size() == 12);
  CHECK(edge_set(g) == lattice_edges(coords));
  const auto summary = classify_components(g, states, SpatialParams{});
  REQUIRE(summary.components.size() == 1);
  CHECK(summary.components[0].kind == ComponentKind::assembly);
  std::set<LatticeCoord> seen(summary.components[0].lattice.begin(),
                              summary.components[0].lattice.end());
  CHECK(seen.size() == 8);
}

TEST_CASE("component kinds") {
  SpatialParams p;
  auto kind_of = [&](const std::vector<LatticeCoord>& c) {
    const auto s = lattice(c);
    const auto summary = classify_components(build_contact_graph(s, p), s, p);
    REQUIRE(summary.components.size() == 1);
    return summary.components[0].kind;
  };
  CHECK(kind_of({{0, 0, 0}}) == ComponentKind::single);
  CHECK(kind_of({{0, 0, 0}, {1, 0, 0}}) == ComponentKind::pair_neighbor);
  CHECK(kind_of({{0, 0, 0}, {0, 0, 1}}) == ComponentKind::column_stack);
  CHECK(kind_of({{0, 0, 0}, {0, 0, 1}, {0, 0, 2}}) == ComponentKind::column_stack);
  CHECK(kind_of({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}) == ComponentKind::assembly);
  CHECK(kind_of({{0, 0, 0}, {1, 0, 0}, {1, 0, 1}}) == ComponentKind::assembly);
}

TEST_CASE("separate clusters are separate components in lead order") {
  SpatialParams p;
  std::vector<CubeState> s{cube(4, {0, 0, 0}), cube(2, {kEdge, 0, 0}), cube(3, {0.5, 0, 0}),
                           cube(1, {0.8, 0, 0})};
  const auto summary = classify_components(build_contact_graph(s, p), s, p);
  REQUIRE(summary.components.size() == 3);
  CHECK(summary.components[0].members == std::vector<CubeId>{CubeId{1}});
  CHECK(summary.components[1].members == std::vector<CubeId>{CubeId{2}, CubeId{4}});
  CHECK(summary.components[2].members == std::vector<CubeId>{CubeId{3}});
}

TEST_CASE("accumulated offsets leave the lattice") {
  SpatialParams p;
  std::vector<CubeState> s{cube(1, {0, 0, 0}), cube(2, {kEdge, 0.247 * kEdge, 0}),
                           cube(3, {2 * kEdge, 0.494 * kEdge, 0})};
  const auto g = build_contact_graph(s, p);
  CHECK(g.edges.size() == 2);
  CHECK_ERRC(classify_components(g, s, p), Errc::degenerate_configuration);
}

TEST_CASE("lattice z follows world up for tipped leads") {
  SpatialParams p;
  const Quat tipped = Quat::from_axis_angle({1, 0, 0}, kPi / 2);
  std::vector<CubeState> s{cube(1, {0, 0, kEdge / 2}, tipped), cube(2, {0, 0, 1.5 * kEdge})};
  const auto summary = classify_components(build_contact_graph(s, p), s, p);
  REQUIRE(summary.components.size() == 1);
  CHECK(summary.components[0].kind == ComponentKind::column_stack);
  CHECK(summary.components[0].lattice[1].z == 1);
}

TEST_CASE("contact test is symmetric and rigid-motion invariant on random scenes") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> jitter(-0.0015, 0.0015), ang(-3.0, 3.0), u(0, 1);
  SpatialParams p;
  for (int scene = 0; scene < 60; ++scene) {
    std::vector<LatticeCoord> coords;
    std::set<LatticeCoord> used;
    while (coords.size() < 6) {
      LatticeCoord c{int(u(rng) * 3), int(u(rng) * 3), int(u(rng) * 2)};
      if (used.insert(c).second) coords.push_back(c);
    }
    auto states = lattice(coords);
    for (auto& s : states) {
      s.pose.position = s.pose.position + Vec3{jitter(rng), jitter(rng), jitter(rng)};
      const Vec3 axis = Vec3{u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5};
      s.pose.orientation = Quat::from_axis_angle(axis / axis.norm(), deg_to_rad(ang(rng)));
    }
    // Sparse cubes far from the cluster.
    states.push_back(cube(20, {1.0 + u(rng), 1.0, kEdge / 2}, testing::random_rotation(rng)));
    states.push_back(cube(21, {-1.0, -1.0 - u(rng), kEdge / 2}, testing::random_rotation(rng)));

    const auto g = build_contact_graph(states, p);
    CHECK(edge_set(g) == lattice_edges(coords));
    for (std::size_t i = 0; i < states.size(); ++i)
      for (std::size_t j = 0; j < states.size(); ++j) {
        if (i == j) continue;
        auto ab = contact_relation(states[i], states[j], p);
        auto ba = contact_relation(states[j], states[i], p);
        REQUIRE(ab.has_value() == ba.has_value());
        if (ab) {
          CHECK(ab->kind == ba->kind);
          if (ab->kind == ContactKind::stacked) CHECK(ab->a_below != ba->a_below);
        }
      }

    const Quat spin = Quat::from_axis_angle({0, 0, 1}, u(rng) * 2 * kPi);
    const Vec3 shift{u(rng), u(rng), 0};
    auto moved = states;
    for (auto& s : moved) {
      s.pose.position = spin.rotate(s.pose.position) + shift;
      s.pose.orientation = spin * s.pose.orientation;
    }
    const auto g2 = build_contact_graph(moved, p);
    REQUIRE(g2.edges.size() == g.edges.size());
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
      CHECK(g2.edges[k].a == g.edges[k].a);
      CHECK(g2.edges[k].b == g.edges[k].b);
      CHECK(g2.edges[k].kind == g.edges[k].kind);
    }
  }
}

TEST_CASE("dominant face and tie order") {
  CHECK(dominant_face({}) == Face::pos_z);
  CHECK(dominant_face({{}, Quat::from_axis_angle({1, 0, 0}, kPi)}) == Face::neg_z);
  CHECK(dominant_face({{}, Quat::from_axis_angle({0, 1, 0}, kPi / 2)}) == Face::neg_x);
  CHECK(dominant_face({{}, Quat::from_axis_angle({1, 0, 0}, kPi / 4)}) == Face::pos_z);
}

TEST_CASE("approach speed of a linear approach") {
  std::vector<TimedPosition> a, b;
  for (int i = 0; i <= 20; ++i) {
    const double t = i * 0.02;
    a.push_back({t, {0, 0, 0}});
    b.push_back({t, {0.5 - 0.5 * t, 0, 0}});
  }
  CHECK(relative_approach_speed(a, b, 0.2) == doctest::Approx(0.5));
  CHECK(relative_approach_speed(b, a, 0.2) == doctest::Approx(0.5));
  std::vector<TimedPosition> one{{0.4, {}}};
  CHECK_ERRC(relative_approach_speed(one, b, 0.2), Errc::insufficient_history);
}

TEST_CASE("bottom and top of tilted cubes") {
  const Pose flat{{0, 0, kEdge / 2}, {}};
  CHECK(bottom_z(flat, kEdge) == doctest::Approx(0.0));
  CHECK(top_z(flat, kEdge) == doctest::Approx(kEdge));
  const Pose tilted{{0, 0, 0.1}, Quat::from_axis_angle({1, 0, 0}, kPi / 4)};
  CHECK(top_z(tilted, kEdge) - bottom_z(tilted, kEdge) == doctest::Approx(kEdge * std::sqrt(2.0)));
}
