#pragma once

#include <optional>
#include <span>
#include <vector>

#include "optomech/params.hpp"

namespace optomech::cooling {

/// One-sided displacement PSD of a thermally driven damped oscillator, per Hz,
/// evaluated at angular frequency omega:
///   S_x = (4 k_B T_eff gamma_eff / m) / ((omega_eff^2 - omega^2)^2 + gamma_eff^2 omega^2).
/// Integrates over nu = omega / 2 pi to k_B T_eff / (m omega_eff^2).
double psd_model(double omega, double m, double T_eff, double omega_eff, double gamma_eff);

struct PsdFit {
  double omega_eff = 0.0;    // rad/s
  double gamma_eff = 0.0;    // rad/s
  double q_eff = 0.0;
  double t_eff_model = 0.0;  // K, from the fitted amplitude
  double t_eff_area = 0.0;   // K, m omega_m^2 <x^2> / k_B
  std::optional<double> t_eff_q;  // K, T Q_eff / Q (needs bath T and Q)
  double floor = 0.0;         // m^2/Hz
  double residual_rms = 0.0;  // m^2/Hz, over the fitted samples
  int iterations = 0;
};

struct PsdTrace {
  std::vector<double> freq_hz;
  std::vector<double> psd;  // m^2/Hz, one-sided
  double noise_floor = 0.0;
  std::optional<PsdFit> fit;
};

/// Trapezoidal <x^2> of (psd - noise_floor), scaled by m omega_m^2 / k_B.
double teff_from_area(const PsdTrace& trace, double m, double omega_m);

/// T Q_eff / Q.
double teff_from_q(double T_bath, double Q_eff, double Q);

struct FrequencyBand {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
};

struct PsdFitContext {
  double m = 0.0;            // kg
  double omega_m = 0.0;      // rad/s for the area estimator; <= 0 uses the fitted omega_eff
  double T_bath = 0.0;       // K; <= 0 leaves t_eff_q empty
  double Q = 0.0;            // intrinsic Q; <= 0 leaves t_eff_q empty
};

inline constexpr std::size_t kMinPsdSamples = 50;

/// Least squares over (amplitude, omega_eff, gamma_eff, floor) with residuals
/// relative to the model, so multiplicative noise is weighted evenly across
/// the peak and the floor. Samples inside `masked` bands are excluded from
/// the fit and replaced by the fitted model in the area integral.
PsdTrace fit_psd(std::vector<double> freq_hz, std::vector<double> psd, const PsdFitContext& ctx,
                 std::span<const FrequencyBand> masked = {});

/// R = 16 hbar P_in Q F^2 / (lambda c pi k_B T m omega_m).
double shot_thermal_ratio(const ExperimentParams& p);

}  // namespace optomech::cooling
