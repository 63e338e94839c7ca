#include <cmath>

#include "tcube/recognizer.hpp"

namespace tcube {

std::vector<InteractionEvent> step_hand(HandState& state, Seconds t, const HandSample& sample,
                                        const std::vector<HandTarget>& cubes,
                                        const RecognizerParams& params) {
  HandState next;
  if (sample.shape != HandShape::none) {
    // The cube directly under the palm with the highest top face.
    const HandTarget* best = nullptr;
    double best_top = 0.0, best_lateral = 0.0;
    for (const auto& c : cubes) {
      const double top = top_z(c.cube.pose, c.cube.edge);
      const double height = sample.palm.z - top;
      const double lateral = planar_distance(sample.palm, c.cube.pose.position);
      if (lateral > 0.5 * c.cube.edge || height < 0.0 || height > params.hover_max_height)
        continue;
      if (!best || top > best_top + 1e-9 ||
          (std::abs(top - best_top) <= 1e-9 && lateral < best_lateral)) {
        best = &c;
        best_top = top;
        best_lateral = lateral;
      }
    }
    if (best) {
      const double height = sample.palm.z - best_top;
      if (height <= params.cover_max_height) {
        if (!best->touched) next = {HandState::Mode::covering, best->cube.id, sample.shape};
      } else {
        next = {HandState::Mode::hovering, best->cube.id, sample.shape};
      }
    }
  }

  std::vector<InteractionEvent> out;
  const HandInfo info{sample.hand};
  const bool was_cover = state.mode == HandState::Mode::covering;
  const bool is_cover = next.mode == HandState::Mode::covering;
  if (was_cover && !(is_cover && next.cube == state.cube))
    out.push_back({t, EventKind::uncover, Subject::cube(state.cube), info});
  if (is_cover && !(was_cover && next.cube == state.cube))
    out.push_back({t, EventKind::cover, Subject::cube(next.cube), info});
  if (next.mode == HandState::Mode::hovering) {
    const bool same = state.mode == HandState::Mode::hovering && state.cube == next.cube &&
                      state.shape == next.shape;
    if (!same)
      out.push_back({t, next.shape == HandShape::fist ? EventKind::hover_fist : EventKind::hover_open,
                     Subject::cube(next.cube), info});
  }
  state = next;
  return out;
}

}  // namespace tcube
