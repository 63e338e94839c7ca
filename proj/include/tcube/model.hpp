#pragma once

// Shared vocabulary of the engine: identifiers, poses, input samples,
// recognized interaction events and visualization commands.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tcube/geometry.hpp"

namespace tcube {

using Seconds = double;

template <class Tag>
struct Id {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(Id, Id) = default;
};

using CubeId = Id<struct CubeTag>;
using HandId = Id<struct HandTag>;
using ContactId = Id<struct ContactTag>;

/// Cube faces. The enumerator order is the tie-break order used by
/// dominant_face: +Z, -Z, +X, -X, +Y, -Y.
enum class Face : std::uint8_t { pos_z, neg_z, pos_x, neg_x, pos_y, neg_y };
inline constexpr Face kAllFaces[] = {Face::pos_z, Face::neg_z, Face::pos_x,
                                     Face::neg_x, Face::pos_y, Face::neg_y};

/// Outward normal of a face in the cube's body frame.
Vec3 face_normal(Face f);

/// Position and orientation in the tabletop frame (right-handed, z-up,
/// meters, table plane at z = 0).
struct Pose {
  Vec3 position;
  Quat orientation;
  friend bool operator==(const Pose&, const Pose&) = default;
};

// ---------------------------------------------------------------------------
// Input samples

enum class TouchPhase : std::uint8_t { down, move, up };
enum class HandShape : std::uint8_t { open, fist, none };

struct PoseSample {
  CubeId cube;
  Pose pose;
  friend bool operator==(const PoseSample&, const PoseSample&) = default;
};

struct TouchSample {
  CubeId cube;
  ContactId contact;
  Face face = Face::pos_z;
  double u = 0.5;
  double v = 0.5;
  double pressure = 0.0;
  TouchPhase phase = TouchPhase::down;
  friend bool operator==(const TouchSample&, const TouchSample&) = default;
};

struct HandSample {
  HandId hand;
  Vec3 palm;
  HandShape shape = HandShape::open;
  friend bool operator==(const HandSample&, const HandSample&) = default;
};

struct InputSample {
  Seconds t = 0.0;
  std::variant<PoseSample, TouchSample, HandSample> payload;
  friend bool operator==(const InputSample&, const InputSample&) = default;
};

/// A sample that passed validate_sample; quaternions are unit length.
struct ValidatedSample {
  InputSample sample;
};

/// Accepts `sample` iff it is not older than `prev_t` and every field
/// invariant holds. Quaternions within 1e-3 of unit norm are renormalized.
/// Throws Error{ordering} or Error{malformed_sample}.
ValidatedSample validate_sample(const InputSample& sample, Seconds prev_t);

// ---------------------------------------------------------------------------
// Size taxonomy

enum class SizeClass : std::uint8_t { small, medium, large };

struct SizeInfo {
  SizeClass size_class;
  double edge_length;
};

/// small iff edge <= 0.05 m, medium iff edge <= 0.15 m, large otherwise.
SizeInfo classify_size(double edge_length);

enum class InteractionSpace : std::uint8_t { orientation, translation, combination, surface };
enum class VisualizationSpace : std::uint8_t { overlay, above, side, display, inside, around };
enum class Multiplicity : std::uint8_t { single, multiple };

// ---------------------------------------------------------------------------
// Interaction events

enum class EventKind : std::uint8_t {
  tap,
  double_tap,
  triple_tap,
  press,
  hold,
  pinch,
  swipe,
  path,
  hover_open,
  hover_fist,
  cover,
  uncover,
  pick_up,
  put_down,
  translate,
  rotate,
  shake,
  collide,
  neighbored,
  stacked,
  assembled,
  disassembled,
};
inline constexpr int kEventKindCount = 22;

enum class PinchSite : std::uint8_t { surface, edge };
enum class SwipeDirection : std::uint8_t { pos_u, neg_u, pos_v, neg_v };
enum class Axis : std::uint8_t { x, y, z };

struct PressInfo {
  double pressure = 0.0;
  friend bool operator==(const PressInfo&, const PressInfo&) = default;
};
struct PinchInfo {
  PinchSite site = PinchSite::surface;
  double scale_ratio = 1.0;
  friend bool operator==(const PinchInfo&, const PinchInfo&) = default;
};
struct SwipeInfo {
  Face face = Face::pos_z;
  SwipeDirection direction = SwipeDirection::pos_u;
  friend bool operator==(const SwipeInfo&, const SwipeInfo&) = default;
};
/// Polyline points are in the cube's body frame, in units of edge length.
struct PathInfo {
  std::vector<Face> faces;
  std::vector<Vec3> polyline;
  friend bool operator==(const PathInfo&, const PathInfo&) = default;
};
struct HandInfo {
  HandId hand;
  friend bool operator==(const HandInfo&, const HandInfo&) = default;
};
struct TranslateInfo {
  Vec3 displacement;
  friend bool operator==(const TranslateInfo&, const TranslateInfo&) = default;
};
struct RotateInfo {
  Axis axis = Axis::z;
  int quarter_turns = 0;
  friend bool operator==(const RotateInfo&, const RotateInfo&) = default;
};
struct CollideInfo {
  CubeId other;
  friend bool operator==(const CollideInfo&, const CollideInfo&) = default;
};
struct NeighborInfo {
  CubeId other;
  friend bool operator==(const NeighborInfo&, const NeighborInfo&) = default;
};
struct StackInfo {
  CubeId below;
  friend bool operator==(const StackInfo&, const StackInfo&) = default;
};

using EventPayload = std::variant<std::monostate, PressInfo, PinchInfo, SwipeInfo, PathInfo,
                                  HandInfo, TranslateInfo, RotateInfo, CollideInfo,
                                  NeighborInfo, StackInfo>;

/// A single cube, or a connected component given by its members in
/// ascending id order.
struct Subject {
  bool component = false;
  std::vector<CubeId> members;

  static Subject cube(CubeId id) { return {false, {id}}; }
  static Subject group(std::vector<CubeId> ids);
  CubeId lead() const { return members.front(); }
  friend bool operator==(const Subject&, const Subject&) = default;
};

struct InteractionEvent {
  Seconds t = 0.0;
  EventKind kind = EventKind::tap;
  Subject subject;
  EventPayload payload;
  friend bool operator==(const InteractionEvent&, const InteractionEvent&) = default;
};

/// Vocabulary rows of the interaction design space. Every event kind is
/// either a row or the inverse transition of one.
enum class VocabularyRow : std::uint8_t {
  tap,
  press,
  hold,
  double_tap,
  triple_tap,
  pinch,
  swipe,
  path,
  open_palm_hover,
  closed_fist_hover,
  cover,
  pick_up,
  rotate,
  translate,
  shake,
  neighbor,
  stack,
  assemble,
  collide,
};
inline constexpr int kGestureRowCount = 11;
inline constexpr int kManipulationRowCount = 8;

struct RowMapping {
  EventKind kind;
  std::optional<VocabularyRow> row;      // set when the kind is a vocabulary row
  std::optional<EventKind> inverse_of;   // set for transition-back kinds
};
const std::vector<RowMapping>& event_vocabulary();
bool is_gesture_row(VocabularyRow row);

// ---------------------------------------------------------------------------
// Visualization commands

enum class CommandKind : std::uint8_t {
  add,
  subtract,
  rescale,
  recolor,
  switch_vis,
  combine,
  ungroup,
  sort,
  flatten,
  overview,
  detail,
  chop,
  adjust_range,
  identify_extremes,
  hide,
  show,
  zoom,
  pan,
  initiate,
  terminate,
  reset,
};
inline constexpr int kCommandKindCount = 21;

enum class CombineMode : std::uint8_t { neighbored, stacked, small_multiples, structure };
enum class VisType : std::uint8_t { bar, line, pictogram };
enum class SortKey : std::uint8_t { value_asc, value_desc, label };
enum class DataAxis : std::uint8_t { time, space };
enum class Aggregator : std::uint8_t { sum, mean };

struct RescaleParams {
  int granularity = 0;
  friend bool operator==(const RescaleParams&, const RescaleParams&) = default;
};
struct SwitchVisParams {
  VisType target = VisType::bar;
  friend bool operator==(const SwitchVisParams&, const SwitchVisParams&) = default;
};
struct CombineParams {
  CombineMode mode = CombineMode::neighbored;
  friend bool operator==(const CombineParams&, const CombineParams&) = default;
};
struct SortParams {
  SortKey key = SortKey::value_desc;
  friend bool operator==(const SortParams&, const SortParams&) = default;
};
struct FlattenParams {
  DataAxis axis = DataAxis::time;
  Aggregator aggregator = Aggregator::sum;
  friend bool operator==(const FlattenParams&, const FlattenParams&) = default;
};
struct ChopParams {
  DataAxis axis = DataAxis::time;
  int parts = 1;
  friend bool operator==(const ChopParams&, const ChopParams&) = default;
};
struct RangeParams {
  DataAxis axis = DataAxis::time;
  int lo = 0;
  int hi = 0;
  friend bool operator==(const RangeParams&, const RangeParams&) = default;
};
struct ZoomParams {
  double factor = 1.0;
  friend bool operator==(const ZoomParams&, const ZoomParams&) = default;
};
struct PanParams {
  double dx = 0.0;
  double dy = 0.0;
  friend bool operator==(const PanParams&, const PanParams&) = default;
};

using CommandParams = std::variant<std::monostate, RescaleParams, SwitchVisParams, CombineParams,
                                   SortParams, FlattenParams, ChopParams, RangeParams, ZoomParams,
                                   PanParams>;

struct Target {
  enum class Kind : std::uint8_t { cube, component, session };
  Kind kind = Kind::session;
  std::vector<CubeId> members;

  static Target session() { return {}; }
  static Target cube(CubeId id) { return {Kind::cube, {id}}; }
  static Target component(std::vector<CubeId> ids) { return {Kind::component, std::move(ids)}; }
  friend bool operator==(const Target&, const Target&) = default;
};

struct VisualizationCommand {
  CommandKind kind = CommandKind::reset;
  Target target;
  CommandParams params;
  friend bool operator==(const VisualizationCommand&, const VisualizationCommand&) = default;
};

// ---------------------------------------------------------------------------
// Names used by every text format.

std::string_view to_string(Face f);
std::string_view to_string(TouchPhase p);
std::string_view to_string(HandShape s);
std::string_view to_string(SizeClass c);
std::string_view to_string(EventKind k);
std::string_view to_string(PinchSite s);
std::string_view to_string(SwipeDirection d);
std::string_view to_string(Axis a);
std::string_view to_string(CommandKind k);
std::string_view to_string(CombineMode m);
std::string_view to_string(VisType v);
std::string_view to_string(SortKey k);
std::string_view to_string(DataAxis a);
std::string_view to_string(Aggregator a);
std::string_view to_string(VocabularyRow r);

std::optional<Face> parse_face(std::string_view s);
std::optional<TouchPhase> parse_touch_phase(std::string_view s);
std::optional<HandShape> parse_hand_shape(std::string_view s);
std::optional<EventKind> parse_event_kind(std::string_view s);
std::optional<PinchSite> parse_pinch_site(std::string_view s);
std::optional<SwipeDirection> parse_swipe_direction(std::string_view s);
std::optional<Axis> parse_axis(std::string_view s);
std::optional<CommandKind> parse_command_kind(std::string_view s);
std::optional<CombineMode> parse_combine_mode(std::string_view s);
std::optional<VisType> parse_vis_type(std::string_view s);
std::optional<SortKey> parse_sort_key(std::string_view s);
std::optional<DataAxis> parse_data_axis(std::string_view s);
std::optional<Aggregator> parse_aggregator(std::string_view s);

}  // namespace tcube
