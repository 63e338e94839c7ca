#include <cmath>
#include <limits>
#include <sstream>

#include "tcube/recognizer.hpp"
#include "tcube/text.hpp"

namespace tcube {

std::string_view to_string(MotionMode m) {
  switch (m) {
    case MotionMode::resting: return "resting";
    case MotionMode::lifted: return "lifted";
    case MotionMode::shaking: return "shaking";
  }
  return "?";
}

MotionTracker::MotionTracker(CubeId id, Seconds t, const Pose& pose, double height,
                             const RecognizerParams& params)
    : id_(id), lifted_(height >= params.pickup_height) {
  history_.push_back({t, pose});
  reset_reference(pose);
  still_since_ = t;
}

void MotionTracker::reset_reference(const Pose& pose) {
  reference_ = pose.orientation;
  anchor_ = pose.position;
  still_ref_ = pose.position;
  sliding_ = false;
  slide_absorbed_ = false;
  axes_ = {};
  for (int i = 0; i < 3; ++i) axes_[i].extreme = pose.position[i];
  for (auto& q : reversal_times_) q.clear();
}

MotionMode MotionTracker::mode() const {
  if (shaking_) return MotionMode::shaking;
  return lifted_ ? MotionMode::lifted : MotionMode::resting;
}

std::vector<InteractionEvent> MotionTracker::step(Seconds t, const Pose& pose, double height,
                                                  const RecognizerParams& params) {
  std::vector<InteractionEvent> out;
  const Subject self = Subject::cube(id_);
  history_.push_back({t, pose});
  const Seconds keep = std::max(params.shake_window, params.collide_window) + 0.5;
  while (history_.size() > 2 && history_.front().t < t - keep) history_.pop_front();

  // Turning points per axis; a reversal needs a retreat of at least the
  // amplitude from the running extreme.
  const double amp = params.shake_min_amplitude;
  for (int i = 0; i < 3; ++i) {
    Reversals& r = axes_[i];
    const double x = pose.position[i];
    if (r.dir == 0) {
      if (x - r.extreme >= amp) r = {1, x};
      else if (r.extreme - x >= amp) r = {-1, x};
    } else if (r.dir * (x - r.extreme) > 0.0) {
      r.extreme = x;
    } else if (r.dir * (r.extreme - x) >= amp) {
      r = {-r.dir, x};
      reversal_times_[i].push_back(t);
      last_reversal_ = t;
    }
  }
  // Shaking is back-and-forth along one axis; a carry (up, across, down)
  // reverses on several axes but rarely twice on the same one.
  std::size_t most = 0;
  for (auto& q : reversal_times_) {
    while (!q.empty() && q.front() < t - params.shake_window) q.pop_front();
    most = std::max(most, q.size());
  }
  if (!shaking_ && static_cast<int>(most) >= params.shake_min_reversals) {
    shaking_ = true;
    lifted_at_shake_ = lifted_;
    sliding_ = false;
    out.push_back({t, EventKind::shake, self, {}});
  }

  if (!lifted_ && height >= params.pickup_height) {
    lifted_ = true;
    sliding_ = false;
    slide_absorbed_ = false;
    if (!shaking_) {
      pickup_emitted_ = true;
      out.push_back({t, EventKind::pick_up, self, {}});
    }
  } else if (lifted_ && height <= params.rest_band) {
    lifted_ = false;
    anchor_ = still_ref_ = pose.position;
    still_since_ = t;
    sliding_ = false;
    if (!shaking_ && pickup_emitted_) {
      pickup_emitted_ = false;
      out.push_back({t, EventKind::put_down, self, {}});
    }
  }

  if (!shaking_) {
    const Quat rel = pose.orientation * reference_.conjugate();
    const double theta = rel.angle();
    if (theta >= deg_to_rad(params.rotate_snap_deg - params.rotate_hysteresis_deg)) {
      const Vec3 axis = rel.axis();
      int k = 0;
      for (int i = 1; i < 3; ++i)
        if (std::abs(axis[i]) > std::abs(axis[k]) + 1e-9) k = i;
      const double snap = deg_to_rad(params.rotate_snap_deg);
      const int turns = static_cast<int>(std::lround(theta / snap)) * (axis[k] < 0 ? -1 : 1);
      Vec3 unit{};
      if (k == 0) unit.x = 1;
      if (k == 1) unit.y = 1;
      if (k == 2) unit.z = 1;
      reference_ = (Quat::from_axis_angle(unit, turns * snap) * reference_).normalized();
      if (sliding_) slide_absorbed_ = true;
      out.push_back({t, EventKind::rotate, self, RotateInfo{static_cast<Axis>(k), turns}});
    }
  }

  if (!lifted_ && !shaking_ && (pose.position - still_ref_).norm() > params.settle_eps) {
    still_ref_ = pose.position;
    still_since_ = t;
    if (planar_distance(pose.position, anchor_) > params.settle_eps) sliding_ = true;
  }
  return out;
}

void MotionTracker::end_slide(Seconds t, std::vector<InteractionEvent>& out,
                              const RecognizerParams& params) {
  const Vec3 d = still_ref_ - anchor_;
  if (std::hypot(d.x, d.y) >= params.translate_min && !slide_absorbed_)
    out.push_back({t, EventKind::translate, Subject::cube(id_), TranslateInfo{{d.x, d.y, 0.0}}});
  anchor_ = still_ref_;
  sliding_ = false;
  slide_absorbed_ = false;
}

std::vector<InteractionEvent> MotionTracker::expire(Seconds t, const RecognizerParams& params) {
  std::vector<InteractionEvent> out;
  if (shaking_ && t - last_reversal_ > params.shake_window) {
    const Seconds te = last_reversal_ + params.shake_window;
    shaking_ = false;
    reset_reference(pose());
    still_since_ = te;
    if (lifted_ != lifted_at_shake_) {
      if (lifted_) {
        pickup_emitted_ = true;
        out.push_back({te, EventKind::pick_up, Subject::cube(id_), {}});
      } else if (pickup_emitted_) {
        pickup_emitted_ = false;
        out.push_back({te, EventKind::put_down, Subject::cube(id_), {}});
      }
    }
  }
  if (sliding_ && !lifted_ && !shaking_ && t - still_since_ >= params.settle_time)
    end_slide(still_since_ + params.settle_time, out, params);
  return out;
}

std::vector<InteractionEvent> MotionTracker::flush(Seconds t_end, const RecognizerParams& params) {
  auto out = expire(std::numeric_limits<double>::infinity(), params);
  for (auto& e : out) e.t = std::min(e.t, t_end);
  if (sliding_ && !lifted_ && !shaking_) end_slide(t_end, out, params);
  return out;
}

std::string MotionTracker::state_text() const {
  std::ostringstream os;
  os << "motion cube=" << id_.value << " mode=" << to_string(mode())
     << " lifted=" << lifted_ << " pickup=" << pickup_emitted_
     << " anchor=" << format_number(anchor_.x) << ',' << format_number(anchor_.y)
     << " sliding=" << sliding_ << " absorbed=" << slide_absorbed_
     << " ref=" << format_number(reference_.w) << ',' << format_number(reference_.x) << ','
     << format_number(reference_.y) << ',' << format_number(reference_.z)
     << " reversals=" << reversal_times_[0].size() << "," << reversal_times_[1].size() << "," << reversal_times_[2].size() << '\n';
  return os.str();
}

}  // namespace tcube
