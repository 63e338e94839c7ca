#include <algorithm>
#include <random>

#include "bench.hpp"
#include "doctest.h"
#include "support.hpp"
#include "tcube/session.hpp"

using namespace tcube;
using testing::Bench;
using testing::cmd;
using testing::cube_target;
using testing::group_target;

namespace {

std::vector<std::string> series_regions(const ChartSpec& c) {
  std::vector<std::string> out;
  for (const auto& s : c.series) out.push_back(s.region_id);
  return out;
}

const SeriesSpec* series_of(const ChartSpec* c, const std::string& region) {
  if (!c) return nullptr;
  for (const auto& s : c->series)
    if (s.region_id == region) return &s;
  return nullptr;
}

}  // namespace

TEST_CASE("default layout has one slot per region inside the map region") {
  const auto data = testing::health();
  const auto l = default_layout(data);
  REQUIRE(l.slots.size() == 9);
  CHECK_FALSE(l.map_region.overlaps(l.interaction_region));
  for (const auto& s : l.slots) CHECK(l.map_region.contains(s.center.x, s.center.y));
  CHECK_NOTHROW(check_layout(l));
}

TEST_CASE("layout checks") {
  const auto base = default_layout(testing::health());
  auto l = base;
  l.interaction_region = l.map_region;
  CHECK_ERRC(check_layout(l), Errc::layout);
  l = base;
  l.slots[0].center = {5, 5, 0};
  CHECK_ERRC(check_layout(l), Errc::layout);
  l = base;
  l.slots[1].center = l.slots[0].center;
  CHECK_ERRC(check_layout(l), Errc::layout);
}

TEST_CASE("binding needs a resting dwell on a free slot") {
  Bench b;
  b.put(1, b.slot(0));
  b.frames(0.3);
  CHECK_FALSE(b.session.check_binding(CubeId{1}));
  b.frames(0.3);
  auto bound = b.session.check_binding(CubeId{1});
  REQUIRE(bound);
  CHECK(bound->region_id == b.session.layout().slots[0].region_id);
  CHECK(kPalette[bound->color] == "yellow");
  CHECK(bound->bound_at == doctest::Approx(0.04 + 0.5).epsilon(0.1));

  SUBCASE("second cube on the occupied slot stays unbound") {
    b.put(1, b.park(1));
    b.put(2, b.slot(0));
    b.frames(1.0);
    CHECK_FALSE(b.session.check_binding(CubeId{2}));
  }
  SUBCASE("next binding takes the next free color") {
    b.bind(2, 3);
    REQUIRE(b.session.check_binding(CubeId{2}));
    CHECK(kPalette[b.session.check_binding(CubeId{2})->color] == "purple");
  }
}

TEST_CASE("hovering over a slot does not bind") {
  Bench b;
  auto p = b.slot(2);
  p.z += 0.05;
  b.put(1, p);
  b.frames(1.5);
  CHECK_FALSE(b.session.check_binding(CubeId{1}));
}

TEST_CASE("tap recolors a bound cube in the interaction region") {
  Bench b;
  b.bind(1, 0);
  const std::string region = b.session.layout().slots[0].region_id;
  b.tap(1);
  CHECK(b.log.find("command kind=recolor target=cube:1") != std::string::npos);
  CHECK(kPalette[b.session.check_binding(CubeId{1})->color] == "purple");
  const auto* s = series_of(b.chart("A1"), region);
  REQUIRE(s);
  CHECK(kPalette[s->color] == "purple");
}

TEST_CASE("taps on unbound cubes and in the map region do not dispatch") {
  Bench b;
  b.put(5, b.park(5));
  b.frames(0.2);
  b.tap(5);
  CHECK(b.log.find("kind=tap subject=cube:5") != std::string::npos);
  CHECK(b.log.find("command") == std::string::npos);

  b.bind(1, 0);
  b.put(1, b.slot(0));
  b.frames(0.3);
  b.log.clear();
  b.tap(1);
  CHECK(b.log.find("kind=tap") != std::string::npos);
  CHECK(b.log.find("command") == std::string::npos);
}

TEST_CASE("commands on missing targets are rejected and leave the session intact") {
  Bench b;
  b.bind(1, 0);
  const auto before = b.session.snapshot();
  const auto r = b.apply(cmd(CommandKind::recolor, cube_target(9)));
  REQUIRE(r.rejections().size() == 1);
  CHECK(r.rejections()[0].code == Errc::stale_target);
  CHECK(r.commands().empty());
  CHECK(b.session.snapshot() == before);
  CHECK(to_text(r.rejections()[0]).starts_with("reject code=stale-target kind=recolor target=cube:9"));

  const auto bad = b.apply(cmd(CommandKind::zoom, cube_target(1), ZoomParams{-1}));
  REQUIRE(bad.rejections().size() == 1);
  CHECK(b.session.snapshot() == before);
}

TEST_CASE("reset frees the slot and later taps do nothing") {
  Bench b;
  b.bind(1, 0);
  b.bind(2, 1);
  b.apply(cmd(CommandKind::combine, group_target({1, 2}), CombineParams{CombineMode::neighbored}));
  const auto r = b.apply(cmd(CommandKind::reset, cube_target(2)));
  CHECK(r.rejections().empty());
  CHECK_FALSE(b.session.check_binding(CubeId{2}));
  const auto snap = b.session.snapshot().text();
  CHECK(snap.find("slot region=" + b.session.layout().slots[1].region_id) != std::string::npos);
  REQUIRE(b.chart("A1"));
  CHECK(series_regions(*b.chart("A1")) == std::vector<std::string>{b.session.layout().slots[0].region_id});
  b.log.clear();
  b.tap(2);
  CHECK(b.log.find("command") == std::string::npos);
}

TEST_CASE("combine keeps component member order") {
  Bench b;
  b.bind(1, 0);
  b.bind(2, 4);
  b.bind(3, 7);
  const auto& slots = b.session.layout().slots;
  b.apply(cmd(CommandKind::combine, group_target({3, 1, 2}), CombineParams{CombineMode::neighbored}));
  const auto* c = b.chart("A3");
  REQUIRE(c);
  CHECK(series_regions(*c) == std::vector<std::string>{slots[7].region_id, slots[0].region_id, slots[4].region_id});
  CHECK(c->structure == ChartStructure::neighbored);
  // Distinct stacks side by side.
  CHECK(c->series[0].stack != c->series[1].stack);

  b.apply(cmd(CommandKind::combine, group_target({3, 1, 2}), CombineParams{CombineMode::stacked}));
  c = b.chart("A3");
  REQUIRE(c);
  CHECK(c->structure == ChartStructure::stacked);
  CHECK(c->series[0].stack == c->series[2].stack);
}

TEST_CASE("hide removes one series from view and show brings it back") {
  Bench b;
  b.bind(1, 0);
  b.bind(2, 1);
  b.apply(cmd(CommandKind::combine, group_target({1, 2}), CombineParams{CombineMode::neighbored}));
  const ChartSpec before = *b.chart("A1");
  b.apply(cmd(CommandKind::hide, cube_target(2)));
  const auto* c = b.chart("A1");
  REQUIRE(c);
  CHECK_FALSE(c->series[0].hidden);
  CHECK(c->series[1].hidden);
  b.apply(cmd(CommandKind::show, cube_target(2)));
  CHECK(*b.chart("A1") == before);
}

TEST_CASE("lifted groups show a dynamic chart; the anchored one catches up on return") {
  Bench b;
  b.bind(1, 0);
  const std::string region = b.session.layout().slots[0].region_id;
  auto p = b.park(1);
  b.put(1, {p.x, p.y, 0.1});
  b.frames(0.5);
  const auto* d = b.chart("D1");
  REQUIRE(d);
  CHECK(d->dynamic);
  CHECK(d->position.x == doctest::Approx(p.x));
  CHECK(d->position.z == doctest::Approx(0.1 + b.session.layout().cube_edge / 2));

  b.apply(cmd(CommandKind::recolor, cube_target(1)));
  CHECK(kPalette[series_of(b.chart("D1"), region)->color] == "purple");
  CHECK(kPalette[series_of(b.chart("A1"), region)->color] == "yellow");
  const ChartSpec last_dynamic = *b.chart("D1");

  b.put(1, p);
  b.frames(0.5);
  CHECK_FALSE(b.chart("D1"));
  const auto* a = b.chart("A1");
  REQUIRE(a);
  REQUIRE(a->series.size() == last_dynamic.series.size());
  for (std::size_t i = 0; i < a->series.size(); ++i) CHECK(a->series[i] == last_dynamic.series[i]);
}

TEST_CASE("view commands reach the chart spec") {
  Bench b;
  b.bind(1, 0);
  b.apply(cmd(CommandKind::switch_vis, cube_target(1), SwitchVisParams{VisType::line}));
  CHECK(b.chart("A1")->vis == VisType::line);
  b.apply(cmd(CommandKind::rescale, cube_target(1), RescaleParams{30}));
  CHECK(b.chart("A1")->bins.size() == 1);
  CHECK(b.chart("A1")->series[0].values.size() == 1);
  b.apply(cmd(CommandKind::rescale, cube_target(1), RescaleParams{10}));
  b.apply(cmd(CommandKind::adjust_range, cube_target(1), RangeParams{DataAxis::time, 2000, 2020}));
  CHECK(b.chart("A1")->bins.size() == 2);
  const auto r = b.apply(cmd(CommandKind::adjust_range, cube_target(1), RangeParams{DataAxis::time, 1950, 1960}));
  REQUIRE(r.rejections().size() == 1);
  CHECK(r.rejections()[0].code == Errc::empty_selection);
  b.apply(cmd(CommandKind::zoom, cube_target(1), ZoomParams{2}));
  b.apply(cmd(CommandKind::pan, cube_target(1), PanParams{0.1, 0}));
  CHECK(b.chart("A1")->zoom == 2);
  CHECK(b.chart("A1")->pan_x == doctest::Approx(0.1));
  b.apply(cmd(CommandKind::detail, cube_target(1)));
  CHECK(b.chart("A1")->detail);
}

TEST_CASE("snapshots are deterministic and change with bindings") {
  Bench a, b;
  CHECK(a.session.snapshot() == b.session.snapshot());
  for (Bench* x : {&a, &b}) {
    x->bind(1, 0);
    x->bind(2, 5);
  }
  CHECK(a.session.snapshot().text() == b.session.snapshot().text());
  const auto before = a.session.snapshot().text();
  a.apply(cmd(CommandKind::recolor, cube_target(2)));
  const auto diff = diff_snapshots(before, a.session.snapshot().text());
  REQUIRE_FALSE(diff.empty());
  CHECK(diff[0] == "binding cube=2: color expected purple, got teal");
  CHECK(diff_snapshots(before, before).empty());
}

TEST_CASE("diff reports missing and unexpected records") {
  const std::string a = "#! tcube-snapshot 1\nbinding cube=1 region=CHN color=yellow\n";
  const std::string b = "#! tcube-snapshot 1\nbinding cube=2 region=CHN color=yellow\n";
  const auto d = diff_snapshots(a, b);
  REQUIRE(d.size() == 2);
  CHECK(d[0].starts_with("missing: binding cube=1"));
  CHECK(d[1].starts_with("unexpected: binding cube=2"));
}

// Properties over random command sequences; the acceptance binary runs
// the larger counts.
TEST_CASE("hide then show restores the chart spec") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 10; ++round) {
    Bench b;
    b.bind(1, 0);
    b.bind(2, 1);
    b.bind(3, 2);
    for (int k = 0; k < 8; ++k) b.apply(testing::random_command(rng, 1, {2, 3}, false));
    const auto charts = b.session.charts();
    b.apply(cmd(CommandKind::hide, cube_target(1)));
    b.apply(cmd(CommandKind::show, cube_target(1)));
    CHECK(b.session.charts() == charts);
  }
}

TEST_CASE("reset restores the pre-binding state") {
  std::mt19937_64 rng(12);
  for (int round = 0; round < 10; ++round) {
    Bench b;
    b.bind(2, 1);
    b.bind(3, 2);
    const auto before = testing::visible_state(b.session);
    b.bind(1, 0);
    for (int k = 0; k < 8; ++k) b.apply(testing::random_command(rng, 1, {2, 3}, true));
    b.apply(cmd(CommandKind::reset, cube_target(1)));
    const auto after = testing::visible_state(b.session);
    if (after != before) {
      std::string x, y;
      for (auto& l : before) x += l + "\n";
      for (auto& l : after) y += l + "\n";
      for (auto& d : diff_snapshots(x, y)) MESSAGE(d);
    }
    CHECK(testing::visible_state(b.session) == before);
  }
}

TEST_CASE("session reset clears every binding") {
  Bench b;
  b.bind(1, 0);
  b.bind(2, 1);
  const auto r = b.session.reset_all();
  CHECK(b.session.bindings().empty());
  CHECK(b.session.charts().empty());
  CHECK(r.text().find("unbind cube=1") != std::string::npos);
}
