#pragma once

#include <numbers>

namespace optomech {

/// CODATA 2006 values. Pinned so derived numbers are reproducible exactly.
struct PhysicalConstants {
  static constexpr double hbar = 1.054571628e-34;  // J s
  static constexpr double k_B = 1.3806504e-23;     // J/K
  static constexpr double c = 2.99792458e8;        // m/s
};

inline constexpr double kHbar = PhysicalConstants::hbar;
inline constexpr double kBoltzmann = PhysicalConstants::k_B;
inline constexpr double kSpeedOfLight = PhysicalConstants::c;
inline constexpr double kPi = std::numbers::pi;

inline constexpr const char* kVersion = "0.1.0";

}  // namespace optomech
