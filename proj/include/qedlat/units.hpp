#pragma once

#include <cmath>
#include <numbers>

#include "qedlat/lattice.hpp"

namespace qedlat {

// Natural units throughout.
inline constexpr double kHbar = 1.0;
inline constexpr double kC = 1.0;
inline constexpr double kPi = std::numbers::pi;

struct Physics {
  double mass = 0.0;
  double charge = 0.0;

  void validate() const {
    if (!(mass >= 0.0) || !std::isfinite(mass)) throw ConfigError("mass must be finite and >= 0");
    if (!std::isfinite(charge)) throw ConfigError("charge must be finite");
  }
  // e / (hbar c), the Wilson-line coupling
  double coupling() const { return charge / (kHbar * kC); }
  // critical field m^2 c^3 / (e hbar)
  double critical_field() const { return mass * mass * kC * kC * kC / (charge * kHbar); }
};

}  // namespace qedlat
