#pragma once

// Deterministic recognition of gestures, manipulations and configuration
// changes from a validated sample stream.

#include <array>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tcube/model.hpp"
#include "tcube/spatial.hpp"

namespace tcube {

struct RecognizerParams {
  double tap_max_duration = 0.3;
  double tap_max_travel = 0.005;
  double multi_tap_gap = 0.4;
  double press_min_pressure = 0.5;
  double press_min_duration = 0.2;
  double hold_min_duration = 0.8;
  double swipe_min_travel = 0.02;
  double path_max_deviation = 0.2;   // fraction of the chord
  double pinch_edge_band = 0.2;      // uv distance from a shared edge
  double hover_max_height = 0.15;
  double cover_max_height = 0.03;    // hover band starts above this
  double pickup_height = 0.02;
  double rest_band = 0.003;          // back to resting below this height
  double translate_min = 0.01;
  double settle_time = 0.15;         // stillness that ends a slide
  double settle_eps = 0.001;
  int shake_min_reversals = 3;
  double shake_window = 1.0;
  double shake_min_amplitude = 0.02;
  double rotate_snap_deg = 90.0;
  double rotate_hysteresis_deg = 20.0;
  double collide_min_speed = 0.3;
  double collide_window = 0.2;
};

// ---------------------------------------------------------------------------
// Touch stage

struct TouchPoint {
  Seconds t = 0.0;
  Face face = Face::pos_z;
  double u = 0.5;
  double v = 0.5;
  double pressure = 0.0;
};

/// One contact lifetime from down to up.
struct ContactTrace {
  CubeId cube;
  ContactId contact;
  std::vector<TouchPoint> points;
};

/// Body-frame point of a face coordinate, in units of edge length.
Vec3 face_point(Face face, double u, double v);

/// Classification of a single-contact lifetime, before multi-tap grouping.
/// Returns kind tap for tap candidates, or nothing when no gesture applies.
std::optional<InteractionEvent> classify_contact(const ContactTrace& trace, double edge,
                                                 const RecognizerParams& params);

/// Two concurrent contacts on the same cube.
InteractionEvent classify_pinch(const ContactTrace& first, const ContactTrace& second,
                                double edge, const RecognizerParams& params);

struct PendingTaps {
  int count = 0;
  Seconds last_up = 0.0;
  Seconds deadline = 0.0;
};

class TouchTracker {
 public:
  /// Touch events whose recognition completes at `sample`.
  std::vector<InteractionEvent> step(Seconds t, const TouchSample& sample, double edge,
                                     const RecognizerParams& params);
  /// Releases multi-tap windows that closed strictly before `t`.
  std::vector<InteractionEvent> expire(Seconds t);
  /// Resolves every pending multi-tap window.
  std::vector<InteractionEvent> flush();

  bool touching(CubeId cube) const;
  void check(const TouchSample& sample) const;
  std::string state_text() const;

 private:
  struct Episode {
    std::vector<ContactTrace> active;
    std::vector<ContactTrace> ended;
  };
  std::vector<InteractionEvent> finish_episode(CubeId cube, Episode episode, double edge,
                                               const RecognizerParams& params);
  std::vector<InteractionEvent> add_tap(CubeId cube, Seconds down, Seconds up,
                                        const RecognizerParams& params);
  InteractionEvent release(CubeId cube, const PendingTaps& p) const;
  bool blocked(CubeId cube, Seconds deadline) const;

  std::map<CubeId, Episode> episodes_;
  std::map<CubeId, PendingTaps> pending_;
};

// ---------------------------------------------------------------------------
// Hand stage

struct HandState {
  enum class Mode : std::uint8_t { idle, hovering, covering };
  Mode mode = Mode::idle;
  CubeId cube;
  HandShape shape = HandShape::none;
  friend bool operator==(const HandState&, const HandState&) = default;
};

struct HandTarget {
  CubeState cube;
  bool touched = false;
};

/// Advances one hand and returns Cover/Uncover/HoverOpen/HoverFist events.
std::vector<InteractionEvent> step_hand(HandState& state, Seconds t, const HandSample& sample,
                                        const std::vector<HandTarget>& cubes,
                                        const RecognizerParams& params);

// ---------------------------------------------------------------------------
// Motion stage

enum class MotionMode : std::uint8_t { resting, lifted, shaking };
std::string_view to_string(MotionMode m);

struct TimedPose {
  Seconds t = 0.0;
  Pose pose;
};

class MotionTracker {
 public:
  MotionTracker(CubeId id, Seconds t, const Pose& pose, double height,
                const RecognizerParams& params);

  std::vector<InteractionEvent> step(Seconds t, const Pose& pose, double height,
                                     const RecognizerParams& params);
  std::vector<InteractionEvent> expire(Seconds t, const RecognizerParams& params);
  std::vector<InteractionEvent> flush(Seconds t_end, const RecognizerParams& params);

  /// The slide in progress ends in a configuration change, which is
  /// reported instead of a Translate.
  void absorb_slide() {
    if (sliding_) slide_absorbed_ = true;
  }

  MotionMode mode() const;
  bool lifted() const { return lifted_; }
  const Pose& pose() const { return history_.back().pose; }
  const std::deque<TimedPose>& history() const { return history_; }
  std::string state_text() const;

 private:
  struct Reversals {
    int dir = 0;
    double extreme = 0.0;
  };
  void end_slide(Seconds t, std::vector<InteractionEvent>& out, const RecognizerParams& params);
  void reset_reference(const Pose& pose);

  CubeId id_;
  std::deque<TimedPose> history_;
  bool lifted_ = false;
  bool pickup_emitted_ = false;
  bool shaking_ = false;
  bool lifted_at_shake_ = false;
  Seconds last_reversal_ = 0.0;
  std::array<Reversals, 3> axes_{};
  std::array<std::deque<Seconds>, 3> reversal_times_;  // per axis
  Quat reference_;
  Vec3 anchor_;
  Vec3 still_ref_;
  Seconds still_since_ = 0.0;
  bool sliding_ = false;
  bool slide_absorbed_ = false;
};

// ---------------------------------------------------------------------------
// Configuration stage

/// Neighbored/Stacked/Assembled for components that formed, grew or
/// changed kind; Disassembled for components whose members split.
/// Throws Error{mismatched_universe} when the cube sets differ.
std::vector<InteractionEvent> diff_configurations(const ConfigurationSummary& prev,
                                                  const ConfigurationSummary& next, Seconds t);

/// Collide when the two cubes approached at >= collide_min_speed over the
/// trailing collide_window; insufficient history counts as no collision.
std::optional<InteractionEvent> detect_collide(CubeId a, std::span<const TimedPosition> hist_a,
                                               CubeId b, std::span<const TimedPosition> hist_b,
                                               Seconds t, const RecognizerParams& params);

// ---------------------------------------------------------------------------

class Recognizer {
 public:
  explicit Recognizer(RecognizerParams params = {}, SpatialParams spatial = {});

  /// Events completed by this sample, ordered touch, hand, motion,
  /// configuration; ties by subject id. Throws Error{unknown_subject} for
  /// touches on untracked cubes and Error{malformed_sample} for phase
  /// violations; the state is unchanged on error.
  std::vector<InteractionEvent> ingest(const ValidatedSample& sample);

  /// Resolves pending multi-tap windows and unfinished slides.
  std::vector<InteractionEvent> flush(Seconds t_end);

  const RecognizerParams& params() const { return params_; }
  const SpatialParams& spatial_params() const { return spatial_; }
  Seconds last_t() const { return last_t_; }

  bool tracked(CubeId id) const { return motion_.count(id) > 0; }
  std::vector<CubeId> cubes() const;
  std::vector<CubeState> cube_states() const;
  const MotionTracker& motion(CubeId id) const { return motion_.at(id); }
  const ConfigurationSummary& configuration() const { return summary_; }

  /// Canonical dump of every state machine.
  std::string state_text() const;
  /// 64-bit FNV-1a of state_text, as 16 hex digits.
  std::string digest() const;

 private:
  double support_height(CubeId id, const Pose& pose) const;
  std::vector<InteractionEvent> expire(Seconds t);
  std::vector<InteractionEvent> update_configuration(Seconds t, bool new_cube);
  std::vector<TimedPosition> positions(CubeId id) const;

  RecognizerParams params_;
  SpatialParams spatial_;
  Seconds last_t_ = 0.0;
  bool started_ = false;
  TouchTracker touch_;
  std::map<HandId, HandState> hands_;
  std::map<CubeId, MotionTracker> motion_;
  ConfigurationSummary summary_;
  ContactGraph graph_;
};

std::string fnv1a_hex(std::string_view text);

}  // namespace tcube
