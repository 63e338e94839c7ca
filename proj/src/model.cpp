#include "tcube/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "tcube/error.hpp"

namespace tcube {

namespace {

template <class E, std::size_t N>
std::string_view name_of(const std::array<std::string_view, N>& names, E value) {
  const auto i = static_cast<std::size_t>(value);
  return i < N ? names[i] : std::string_view{"?"};
}

template <class E, std::size_t N>
std::optional<E> parse_name(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s) return static_cast<E>(i);
  return std::nullopt;
}

constexpr std::array<std::string_view, 6> kFaceNames{"+Z", "-Z", "+X", "-X", "+Y", "-Y"};
constexpr std::array<std::string_view, 3> kPhaseNames{"down", "move", "up"};
constexpr std::array<std::string_view, 3> kShapeNames{"open", "fist", "none"};
constexpr std::array<std::string_view, 3> kSizeNames{"small", "medium", "large"};
constexpr std::array<std::string_view, kEventKindCount> kEventNames{
    "tap",        "double_tap", "triple_tap", "press",     "hold",      "pinch",
    "swipe",      "path",       "hover_open", "hover_fist", "cover",    "uncover",
    "pick_up",    "put_down",   "translate",  "rotate",    "shake",     "collide",
    "neighbored", "stacked",    "assembled",  "disassembled"};
constexpr std::array<std::string_view, 2> kSiteNames{"surface", "edge"};
constexpr std::array<std::string_view, 4> kDirectionNames{"+u", "-u", "+v", "-v"};
constexpr std::array<std::string_view, 3> kAxisNames{"x", "y", "z"};
constexpr std::array<std::string_view, kCommandKindCount> kCommandNames{
    "add",     "subtract", "rescale",  "recolor",      "switch_vis",        "combine",
    "ungroup", "sort",     "flatten",  "overview",     "detail",            "chop",
    "adjust_range", "identify_extremes", "hide", "show", "zoom", "pan", "initiate",
    "terminate", "reset"};
constexpr std::array<std::string_view, 4> kModeNames{"neighbored", "stacked", "small_multiples",
                                                  "structure"};
constexpr std::array<std::string_view, 3> kVisNames{"bar", "line", "pictogram"};
constexpr std::array<std::string_view, 3> kSortNames{"value_asc", "value_desc", "label"};
constexpr std::array<std::string_view, 2> kDataAxisNames{"time", "space"};
constexpr std::array<std::string_view, 2> kAggregatorNames{"sum", "mean"};
constexpr std::array<std::string_view, 19> kRowNames{
    "tap",     "press",  "hold",      "double_tap", "triple_tap", "pinch",  "swipe",
    "path",    "open_palm_hover",     "closed_fist_hover",        "cover",  "pick_up",
    "rotate",  "translate", "shake",  "neighbor",   "stack",      "assemble", "collide"};

void check_finite(double v, const char* field) {
  if (!std::isfinite(v))
    throw Error(Errc::malformed_sample, std::string("non-finite field '") + field + "'");
}

void check_unit_interval(double v, const char* field) {
  check_finite(v, field);
  if (v < 0.0 || v > 1.0)
    throw Error(Errc::malformed_sample, std::string("field '") + field + "' outside [0,1]");
}

Quat checked_unit(const Quat& q) {
  if (!q.finite()) throw Error(Errc::malformed_sample, "non-finite quaternion");
  const double n = q.norm();
  if (std::abs(n - 1.0) > 1e-3)
    throw Error(Errc::malformed_sample, "quaternion norm deviates from 1 by more than 1e-3");
  return q.normalized();
}

}  // namespace

Vec3 face_normal(Face f) {
  switch (f) {
    case Face::pos_x: return {1, 0, 0};
    case Face::neg_x: return {-1, 0, 0};
    case Face::pos_y: return {0, 1, 0};
    case Face::neg_y: return {0, -1, 0};
    case Face::pos_z: return {0, 0, 1};
    case Face::neg_z: return {0, 0, -1};
  }
  return {0, 0, 1};
}

ValidatedSample validate_sample(const InputSample& sample, Seconds prev_t) {
  check_finite(sample.t, "t");
  if (sample.t < prev_t)
    throw Error(Errc::ordering, "sample time " + std::to_string(sample.t) +
                                    " precedes previous time " + std::to_string(prev_t));
  ValidatedSample out{sample};
  if (auto* p = std::get_if<PoseSample>(&out.sample.payload)) {
    if (!p->pose.position.finite()) throw Error(Errc::malformed_sample, "non-finite position");
    p->pose.orientation = checked_unit(p->pose.orientation);
  } else if (auto* touch = std::get_if<TouchSample>(&out.sample.payload)) {
    check_unit_interval(touch->u, "u");
    check_unit_interval(touch->v, "v");
    check_unit_interval(touch->pressure, "pressure");
  } else if (auto* hand = std::get_if<HandSample>(&out.sample.payload)) {
    if (!hand->palm.finite()) throw Error(Errc::malformed_sample, "non-finite palm position");
  }
  return out;
}

SizeInfo classify_size(double edge_length) {
  if (!std::isfinite(edge_length) || edge_length <= 0.0)
    throw Error(Errc::invalid_argument, "edge length must be positive and finite");
  if (edge_length <= 0.05) return {SizeClass::small, edge_length};
  if (edge_length <= 0.15) return {SizeClass::medium, edge_length};
  return {SizeClass::large, edge_length};
}

Subject Subject::group(std::vector<CubeId> ids) {
  std::sort(ids.begin(), ids.end());
  return {true, std::move(ids)};
}

const std::vector<RowMapping>& event_vocabulary() {
  using K = EventKind;
  using R = VocabularyRow;
  static const std::vector<RowMapping> table{
      {K::tap, R::tap, {}},
      {K::double_tap, R::double_tap, {}},
      {K::triple_tap, R::triple_tap, {}},
      {K::press, R::press, {}},
      {K::hold, R::hold, {}},
      {K::pinch, R::pinch, {}},
      {K::swipe, R::swipe, {}},
      {K::path, R::path, {}},
      {K::hover_open, R::open_palm_hover, {}},
      {K::hover_fist, R::closed_fist_hover, {}},
      {K::cover, R::cover, {}},
      {K::uncover, {}, K::cover},
      {K::pick_up, R::pick_up, {}},
      {K::put_down, {}, K::pick_up},
      {K::translate, R::translate, {}},
      {K::rotate, R::rotate, {}},
      {K::shake, R::shake, {}},
      {K::collide, R::collide, {}},
      {K::neighbored, R::neighbor, {}},
      {K::stacked, R::stack, {}},
      {K::assembled, R::assemble, {}},
      {K::disassembled, {}, K::assembled},
  };
  return table;
}

bool is_gesture_row(VocabularyRow row) {
  return static_cast<int>(row) < kGestureRowCount;
}

std::string_view to_string(Face f) { return name_of(kFaceNames, f); }
std::string_view to_string(TouchPhase p) { return name_of(kPhaseNames, p); }
std::string_view to_string(HandShape s) { return name_of(kShapeNames, s); }
std::string_view to_string(SizeClass c) { return name_of(kSizeNames, c); }
std::string_view to_string(EventKind k) { return name_of(kEventNames, k); }
std::string_view to_string(PinchSite s) { return name_of(kSiteNames, s); }
std::string_view to_string(SwipeDirection d) { return name_of(kDirectionNames, d); }
std::string_view to_string(Axis a) { return name_of(kAxisNames, a); }
std::string_view to_string(CommandKind k) { return name_of(kCommandNames, k); }
std::string_view to_string(CombineMode m) { return name_of(kModeNames, m); }
std::string_view to_string(VisType v) { return name_of(kVisNames, v); }
std::string_view to_string(SortKey k) { return name_of(kSortNames, k); }
std::string_view to_string(DataAxis a) { return name_of(kDataAxisNames, a); }
std::string_view to_string(Aggregator a) { return name_of(kAggregatorNames, a); }
std::string_view to_string(VocabularyRow r) { return name_of(kRowNames, r); }

std::optional<Face> parse_face(std::string_view s) { return parse_name<Face>(kFaceNames, s); }
std::optional<TouchPhase> parse_touch_phase(std::string_view s) {
  return parse_name<TouchPhase>(kPhaseNames, s);
}
std::optional<HandShape> parse_hand_shape(std::string_view s) {
  return parse_name<HandShape>(kShapeNames, s);
}
std::optional<EventKind> parse_event_kind(std::string_view s) {
  return parse_name<EventKind>(kEventNames, s);
}
std::optional<PinchSite> parse_pinch_site(std::string_view s) {
  return parse_name<PinchSite>(kSiteNames, s);
}
std::optional<SwipeDirection> parse_swipe_direction(std::string_view s) {
  return parse_name<SwipeDirection>(kDirectionNames, s);
}
std::optional<Axis> parse_axis(std::string_view s) { return parse_name<Axis>(kAxisNames, s); }
std::optional<CommandKind> parse_command_kind(std::string_view s) {
  return parse_name<CommandKind>(kCommandNames, s);
}
std::optional<CombineMode> parse_combine_mode(std::string_view s) {
  return parse_name<CombineMode>(kModeNames, s);
}
std::optional<VisType> parse_vis_type(std::string_view s) {
  return parse_name<VisType>(kVisNames, s);
}
std::optional<SortKey> parse_sort_key(std::string_view s) {
  return parse_name<SortKey>(kSortNames, s);
}
std::optional<DataAxis> parse_data_axis(std::string_view s) {
  return parse_name<DataAxis>(kDataAxisNames, s);
}
std::optional<Aggregator> parse_aggregator(std::string_view s) {
  return parse_name<Aggregator>(kAggregatorNames, s);
}

}  // namespace tcube
