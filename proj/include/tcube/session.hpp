#pragma once

// The engine proper: samples in, recognized events through the rulebook,
// commands applied to bindings and chart specs.

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tcube/config.hpp"
#include "tcube/datacube.hpp"
#include "tcube/error.hpp"
#include "tcube/recognizer.hpp"
#include "tcube/rulebook.hpp"

namespace tcube {

struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  bool overlaps(const Rect& o) const { return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1; }
};

struct Slot {
  std::string region_id;
  Vec3 center;
};

struct SessionLayout {
  Rect map_region;
  Rect interaction_region;
  Vec3 anchored_anchor;
  std::vector<Slot> slots;  // dataset region order
  double cube_edge = 0.033;
};

/// Map region at the origin, slots at the region anchors, interaction
/// region to its right, anchored charts behind it.
SessionLayout default_layout(const SpaceTimeCube& data, const EngineConfig& cfg = {});
/// Throws Error{layout} when the regions overlap, a slot lies outside the
/// map region, or two slots are closer than one cube edge.
void check_layout(const SessionLayout& layout);

inline constexpr std::string_view kPalette[] = {"yellow", "purple", "teal", "orange",
                                                "blue",   "red",    "green", "pink"};
inline constexpr int kPaletteSize = 8;

struct Binding {
  CubeId cube;
  std::string region_id;
  int color = 0;
  Seconds bound_at = 0.0;
  friend bool operator==(const Binding&, const Binding&) = default;
};

enum class ChartStructure : std::uint8_t { neighbored, stacked, small_multiples };
std::string_view to_string(ChartStructure s);

struct SeriesSpec {
  std::string region_id;
  std::string label;
  int color = 0;
  int stack = 0;                  // series sharing a stack index stack up
  std::vector<double> values;     // per visible bin
  bool hidden = false;
  friend bool operator==(const SeriesSpec&, const SeriesSpec&) = default;
};

struct ChartSpec {
  std::string id;                 // A<lead> anchored, D<lead> dynamic
  bool dynamic = false;
  Vec3 position;                  // dynamic: midpoint of lifted members' tops
  ChartStructure structure = ChartStructure::neighbored;
  VisType vis = VisType::bar;
  bool detail = false;
  bool initiated = false;
  double zoom = 1.0;
  double pan_x = 0.0, pan_y = 0.0;
  std::vector<TimeBin> bins;
  DataAxis chop_axis = DataAxis::time;
  std::vector<std::size_t> segments;  // chop boundaries along chop_axis
  std::string x_label, y_label;
  double extent_lo = 0.0, extent_hi = 0.0;
  std::vector<SeriesSpec> series;
  std::vector<std::string> extremes;  // min/max cell, when requested
  friend bool operator==(const ChartSpec&, const ChartSpec&) = default;
};

/// One canonical line for the chart header plus one per series.
std::vector<std::string> chart_lines(const ChartSpec& c);

struct ChartDelta {
  enum class Kind : std::uint8_t { bind, unbind, chart_upsert, chart_remove };
  Kind kind = Kind::bind;
  std::string subject;   // cube id or chart id
  std::string text;      // canonical lines of the new state
  friend bool operator==(const ChartDelta&, const ChartDelta&) = default;
};

struct Rejection {
  VisualizationCommand command;
  Errc code = Errc::stale_target;
  std::string message;
  friend bool operator==(const Rejection&, const Rejection&) = default;
};

using ReportEntry = std::variant<InteractionEvent, VisualizationCommand, Rejection, ChartDelta>;

/// Everything one step produced, in production order: each event followed
/// by its command or rejection, then binding and chart deltas.
struct StepReport {
  std::vector<ReportEntry> entries;

  std::vector<InteractionEvent> events() const;
  std::vector<VisualizationCommand> commands() const;
  std::vector<Rejection> rejections() const;
  std::vector<ChartDelta> deltas() const;
  bool empty() const { return entries.empty(); }
  /// One canonical line per entry (chart deltas may span several).
  std::string text() const;
};

std::string to_text(const Rejection& r);
std::string to_text(const ChartDelta& d);

struct SessionSnapshot {
  std::vector<std::string> lines;
  std::string text() const;
  friend bool operator==(const SessionSnapshot&, const SessionSnapshot&) = default;
};

/// Field-level differences between two snapshot documents; records are
/// matched by their leading identity tokens.
std::vector<std::string> diff_snapshots(std::string_view expected, std::string_view actual);

class Session {
 public:
  Session(SpaceTimeCube data, RuleBook rulebook, EngineConfig cfg = {});
  Session(SpaceTimeCube data, RuleBook rulebook, SessionLayout layout, EngineConfig cfg);

  /// Validates, recognizes, dispatches and applies. Throws the validation
  /// and recognizer errors; the session is unchanged when it throws.
  StepReport step(const InputSample& sample);
  /// Drains pending recognizer state (multi-tap windows, open slides).
  StepReport finish(Seconds t_end);

  std::optional<Binding> check_binding(CubeId cube) const;
  /// Applies one command directly. Stale or inapplicable commands become a
  /// Rejection entry; nothing else changes.
  StepReport apply_command(const VisualizationCommand& command);
  /// Clears every binding and chart; the recognizer keeps tracking.
  StepReport reset_all();

  SessionSnapshot snapshot() const;
  std::vector<ChartSpec> charts() const;

  const SpaceTimeCube& data() const { return data_; }
  const RuleBook& rulebook() const { return rulebook_; }
  const SessionLayout& layout() const { return layout_; }
  const EngineConfig& config() const { return cfg_; }
  const Recognizer& recognizer() const { return recognizer_; }
  const std::map<CubeId, Binding>& bindings() const { return bindings_; }
  Seconds now() const { return now_; }

 private:
  struct View {
    VisType vis = VisType::bar;
    bool detail = false;
    bool initiated = false;
    std::size_t first = 0, last = 0;
    long long granularity = 0;
    std::optional<Aggregator> flatten_time;
    std::optional<Aggregator> flatten_space;
    std::optional<std::pair<long long, long long>> space_range;
    int chop_parts = 1;
    DataAxis chop_axis = DataAxis::time;
    std::optional<ArithOp> arith;
    std::optional<SortKey> sort;
    bool extremes = false;
    double zoom = 1.0, pan_x = 0.0, pan_y = 0.0;
  };
  struct Group {
    std::vector<CubeId> members;
    ChartStructure structure = ChartStructure::neighbored;
    std::vector<int> stacks;       // parallel to members
    View view;
    std::vector<Group> parts;      // pre-merge states, restored on removal
    ChartSpec anchored;
  };
  struct Dwell {
    std::size_t slot = 0;
    Seconds since = 0.0;
  };
  struct CubeLook {
    bool hidden = false;
  };

  class Context;

  Group* group_of(CubeId id);
  const Group* group_of(CubeId id) const;
  bool lifted(CubeId id) const;
  bool any_lifted(const Group& g) const;
  bool in_map(CubeId id) const;
  bool in_interaction(CubeId id) const;
  ChartSpec render(const Group& g, bool dynamic) const;
  void refresh_anchored(Group& g);
  void extract(CubeId id);
  void remove_binding(CubeId id);
  void apply(const VisualizationCommand& cmd, const InteractionEvent* cause, StepReport& out);
  void apply_or_throw(const VisualizationCommand& cmd, const InteractionEvent* cause);
  void handle_events(const std::vector<InteractionEvent>& events, StepReport& out);
  void update_bindings(Seconds t, StepReport& out);
  std::map<std::string, std::string> chart_map() const;
  // Last published chart_map(), or a fresh one when nothing is cached (the
  // cache is dropped while a mutation is in flight).
  std::map<std::string, std::string> take_published();
  void emit_chart_deltas(const std::map<std::string, std::string>& before, StepReport& out);
  View fresh_view() const;

  SpaceTimeCube data_;
  RuleBook rulebook_;
  EngineConfig cfg_;
  SessionLayout layout_;
  Recognizer recognizer_;
  Seconds now_ = 0.0;
  bool started_ = false;
  std::map<CubeId, Binding> bindings_;
  std::map<CubeId, CubeLook> looks_;
  std::map<CubeId, Dwell> dwell_;
  std::vector<Group> groups_;
  std::optional<std::map<std::string, std::string>> published_;
  mutable std::map<std::string, std::pair<ChartSpec, std::string>> chart_text_;  // by chart id
  mutable std::map<CubeId, std::pair<Binding, std::string>> binding_text_;
};

}  // namespace tcube
