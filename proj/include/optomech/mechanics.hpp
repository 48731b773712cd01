#pragma once

#include <span>

namespace optomech::mechanics {

struct OscillatorParams {
  double m = 0.0;        // kg
  double omega_m = 0.0;  // rad/s
  double Q = 0.0;
};

/// x_m = sqrt(hbar / (2 m omega_m)).
double zero_point_amplitude(double m, double omega_m);

struct ThermalOccupation {
  double n_bar = 0.0;
  bool classical = false;  // n_bar >= kClassicalOccupation
};

inline constexpr double kClassicalOccupation = 10.0;

/// n_bar = k_B T / (hbar omega_m), the high-temperature occupation.
ThermalOccupation thermal_occupation(double T, double omega_m);

/// k = m omega_m^2.
double spring_constant(double m, double omega_m);

/// Amplitude-decay convention: Q = omega_m tau / 2.
double q_from_ringdown(double tau, double omega_m);
double ringdown_from_q(double Q, double omega_m);

struct MechRingdownFit {
  double tau = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double residual_rms = 0.0;
};

/// Exponential fit of an amplitude envelope. No offset unless requested.
MechRingdownFit fit_mech_ringdown(std::span<const double> t, std::span<const double> amplitude,
                                  bool with_offset = false);

}  // namespace optomech::mechanics
