#pragma once

// Synthetic scene scripts and the shipped scenario catalog.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tcube/trace.hpp"

namespace tcube {

/// Builds a sample stream the way a tracker would report it: every `rate`
/// Hz a frame carries the pose of every cube; touch and hand samples are
/// interleaved at their own times.
class SceneScript {
 public:
  explicit SceneScript(double rate = 25.0, double edge = 0.033);

  double rest_z() const { return edge_ / 2; }
  double edge() const { return edge_; }
  Seconds now() const { return frame_ / rate_; }
  Pose pose(std::uint32_t cube) const { return poses_.at(cube); }

  /// The cube appears in the next frame.
  void add_cube(std::uint32_t cube, Vec3 position, Quat q = {});
  void wait(Seconds s);
  /// Linear motion of several cubes at once.
  void move(const std::map<std::uint32_t, Vec3>& targets, Seconds s);
  void move(std::uint32_t cube, Vec3 to, Seconds s) { move({{cube, to}}, s); }
  /// Lift to `height` (center z), travel, lower onto `to`.
  void carry(std::uint32_t cube, Vec3 to, double height = 0.12, double speed = 0.6);
  void rotate(std::uint32_t cube, Quat to, Seconds s);
  /// Sinusoidal displacement along `axis` around the current position.
  void shake(std::uint32_t cube, Vec3 axis, double amplitude, double hz, Seconds s);

  /// Single contact from (u0,v0) to (u1,v1) on one face, starting now.
  /// Does not advance time.
  void stroke(std::uint32_t cube, std::uint32_t contact, Face face, Seconds start, Seconds duration,
              double u0, double v0, double u1, double v1, double pressure = 0.3, int steps = 4);
  void tap(std::uint32_t cube, std::uint32_t contact, Seconds start, double u = 0.5, double v = 0.5);
  void hand(std::uint32_t hand, Seconds t, Vec3 palm, HandShape shape);
  void sample(InputSample s);

  std::vector<InputSample> samples() const;

 private:
  struct Item {
    Seconds t;
    int priority;  // frames first on equal time
    std::size_t seq;
    InputSample sample;
  };
  void frame();

  double rate_;
  double edge_;
  long frame_ = 0;
  std::map<std::uint32_t, Pose> poses_;
  std::vector<Item> items_;
};

const std::vector<std::string>& scenario_names();
/// Deterministic for (name, seed). Throws Error{invalid_argument} for an
/// unknown name.
TraceFile generate_scenario(std::string_view name, std::uint64_t seed = 1);

}  // namespace tcube
