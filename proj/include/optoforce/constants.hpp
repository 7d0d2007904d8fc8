#pragma once

#include <numbers>

namespace optoforce::constants {

// CODATA 2018 values, SI units. Single source of truth for the library.
inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double boltzmann = 1.380649e-23;     // J/K
inline constexpr double light_speed = 2.99792458e8;   // m/s
inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace optoforce::constants
