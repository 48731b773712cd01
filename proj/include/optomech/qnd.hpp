#pragma once

#include <optional>

#include "optomech/params.hpp"

namespace optomech::qnd {

/// Cavity frequency shift per phonon,
///   16 pi^2 c x_m^2 / (L lambda^2 sqrt(2 (1 - r_c))).
/// Throws SingularityError when 1 - r_c underflows.
double detuning_per_phonon(const ExperimentParams& p);

/// Same quantity written with hbar / (m omega_m) in place of 2 x_m^2.
double detuning_per_phonon_closed_form(const ExperimentParams& p);

/// kappa = pi c / (L F), rad/s.
double cavity_damping(const ExperimentParams& p);

struct PdhNoise {
  double s_omega = 0.0;        // rad^2/s, shot-noise-limited frequency PSD
  double kappa = 0.0;          // rad/s
  double n_bar_photons = 0.0;  // mean intracavity photon number
};

/// S_omega = pi^3 hbar c^3 / (16 F^2 L^2 lambda P_in), and N from N kappa = P_in lambda / (pi hbar c).
PdhNoise pdh_noise_psd(const ExperimentParams& p);

/// S_NN(omega) = N kappa / ((omega + detuning)^2 + (kappa/2)^2).
double photon_psd(double omega, double detuning, double kappa, double n_bar_photons);

/// Q / (omega_m (n (n_bar + 1) + n_bar (n + 1))). Infinite when the bath is empty and n = 0.
double thermal_lifetime(unsigned n, const ExperimentParams& p);

/// Closed form for the non-RWA (0 -> 2) lifetime.
double rwa_lifetime(const ExperimentParams& p);
/// 0 -> 2 rate from the golden-rule expression (1/2) dw^2 S_NN(-2 omega_m), probe on resonance.
double rwa_rate(const ExperimentParams& p);

/// Closed form for the offset-induced (0 -> 1) lifetime; empty when x0 == 0
/// (no linear coupling channel).
std::optional<double> linear_lifetime(const ExperimentParams& p);
/// 0 -> 1 rate (omega' x_m)^2 S_NN(-omega_m), probe on resonance. Zero when x0 == 0.
double linear_rate(const ExperimentParams& p);

struct ValidityFlags {
  bool qnd_time_ok = false;        // tau_total > 1 / omega_m
  bool gap_ok = false;             // mode gap > omega_m
  bool classical_bath_ok = false;  // n_bar >= 10
  bool good_cavity = false;        // omega_m > kappa

  bool all() const { return qnd_time_ok && gap_ok && classical_bath_ok && good_cavity; }
};

struct QndBudget {
  double delta_omega = 0.0;    // rad/s
  double kappa = 0.0;          // rad/s
  double n_bar_photons = 0.0;
  double n_bar_phonons = 0.0;  // bath occupation
  double x_m = 0.0;            // m
  double s_omega = 0.0;        // rad^2/s
  double tau_thermal = 0.0;    // s
  double tau_rwa = 0.0;        // s
  std::optional<double> tau_lin;  // s; empty = channel absent
  double tau_total = 0.0;      // s
  double snr = 0.0;
  double gap = 0.0;            // rad/s, (c/L) sqrt(8 (1 - r_c))
  ValidityFlags flags;
};

/// Full ground-state jump budget. Validates p first (ConfigError).
QndBudget jump_budget(const ExperimentParams& p);

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double relative_residual = 0.0;
};

struct ConsistencyRatios {
  /// tau_total / tau_lin against (SNR/16) (x0/x_m)^2 (kappa/omega_m)^2.
  IdentityCheck total_to_linear;
  /// tau_lin / tau_rwa against (1/8) (x_m/x0)^2; empty when x0 == 0.
  std::optional<IdentityCheck> linear_to_rwa;
  bool good_cavity = false;
};

ConsistencyRatios consistency_ratios(const ExperimentParams& p);

/// SNR for a jump out of level n using the thermal lifetime only; the
/// measurement-induced channels are not modeled for n > 0.
struct ThermalSnr {
  double snr = 0.0;
  double tau_thermal = 0.0;
};

ThermalSnr snr_general_n(unsigned n, const ExperimentParams& p);

}  // namespace optomech::qnd
