#pragma once

#include <random>

#include "doctest.h"
#include "tcube/error.hpp"
#include "tcube/model.hpp"

// Runs `expr` and checks it throws tcube::Error with `code`.
#define CHECK_ERRC(expr, errc)                          \
  do {                                                  \
    bool thrown_ = false;                               \
    try {                                               \
      (void)(expr);                                     \
    } catch (const tcube::Error& e_) {                  \
      thrown_ = true;                                   \
      CHECK_MESSAGE(e_.code() == (errc), e_.what());    \
    }                                                   \
    CHECK_MESSAGE(thrown_, "no tcube::Error from " #expr); \
  } while (0)

namespace testing {

inline tcube::InputSample pose(double t, std::uint32_t cube, tcube::Vec3 p,
                               tcube::Quat q = {}) {
  return {t, tcube::PoseSample{tcube::CubeId{cube}, {p, q}}};
}

inline tcube::InputSample touch(double t, std::uint32_t cube, std::uint32_t contact,
                                tcube::TouchPhase phase, double u, double v,
                                double pressure = 0.3, tcube::Face face = tcube::Face::pos_z) {
  return {t, tcube::TouchSample{tcube::CubeId{cube}, tcube::ContactId{contact}, face, u, v,
                                pressure, phase}};
}

inline tcube::InputSample hand(double t, std::uint32_t id, tcube::Vec3 palm,
                               tcube::HandShape shape) {
  return {t, tcube::HandSample{tcube::HandId{id}, palm, shape}};
}

inline tcube::Quat random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return tcube::Quat{n(rng), n(rng), n(rng), n(rng)}.normalized();
}

}  // namespace testing
