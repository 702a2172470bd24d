#pragma once

#include <numbers>

namespace transducer {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// CODATA 2018 exact values.
inline constexpr double kHbar = 1.054571817e-34;      // J s
inline constexpr double kBoltzmann = 1.380649e-23;    // J / K

// Frequency in Hz to angular frequency in rad/s.
constexpr double angular(double hz) { return kTwoPi * hz; }
// Angular frequency in rad/s to Hz.
constexpr double hertz(double rad_per_s) { return rad_per_s / kTwoPi; }

}  // namespace transducer
