#pragma once

#include <numbers>

namespace cpk {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kBohrMagnetonMHzPerGauss = 1.39962;

inline constexpr double kPpm = 1e-6;
inline constexpr double kMHz = 1e6;
inline constexpr double kUs = 1e-6;

// Angular frequency from a frequency in MHz.
constexpr double mhz_to_rad(double f_mhz) { return kTwoPi * f_mhz * kMHz; }
constexpr double rad_to_mhz(double w) { return w / (kTwoPi * kMHz); }

}  // namespace cpk
