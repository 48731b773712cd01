#include "optomech/qnd.hpp"

#include <cmath>
#include <limits>

#include "optomech/cavity.hpp"
#include "optomech/constants.hpp"
#include "optomech/errors.hpp"
#include "optomech/mechanics.hpp"

namespace optomech::qnd {

namespace {

double relative_residual(double lhs, double rhs) {
  if (lhs == rhs) return 0.0;
  return std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));
}

}  // namespace

double detuning_per_phonon(const ExperimentParams& p) {
  const double x_m = mechanics::zero_point_amplitude(p.m, p.omega_m);
  return cavity::curvature_near_unity(p.r_c, p.L, p.lambda) * x_m * x_m;
}

double detuning_per_phonon_closed_form(const ExperimentParams& p) {
  const double gap = 1.0 - p.r_c;
  if (!(gap > 0.0)) throw SingularityError("per-phonon shift diverges: 1 - r_c underflows");
  return 8.0 * kPi * kPi * kSpeedOfLight / (p.L * p.lambda * p.lambda * std::sqrt(2.0 * gap)) * kHbar /
         (p.m * p.omega_m);
}

double cavity_damping(const ExperimentParams& p) { return kPi * kSpeedOfLight / (p.L * p.F); }

PdhNoise pdh_noise_psd(const ExperimentParams& p) {
  PdhNoise out;
  out.kappa = cavity_damping(p);
  out.n_bar_photons = p.P_in * p.lambda / (kPi * kHbar * kSpeedOfLight * out.kappa);
  const double c3 = kSpeedOfLight * kSpeedOfLight * kSpeedOfLight;
  out.s_omega = kPi * kPi * kPi * kHbar * c3 / (16.0 * p.F * p.F * p.L * p.L * p.lambda * p.P_in);
  return out;
}

double photon_psd(double omega, double detuning, double kappa, double n_bar_photons) {
  if (!(kappa > 0.0)) throw DomainError("kappa must be > 0");
  const double w = omega + detuning;
  return n_bar_photons * kappa / (w * w + 0.25 * kappa * kappa);
}

double thermal_lifetime(unsigned n, const ExperimentParams& p) {
  const double n_bar = mechanics::thermal_occupation(p.T, p.omega_m).n_bar;
  const double level = static_cast<double>(n);
  const double weight = level * (n_bar + 1.0) + n_bar * (level + 1.0);
  if (weight == 0.0) return std::numeric_limits<double>::infinity();
  return p.Q / (p.omega_m * weight);
}

double rwa_lifetime(const ExperimentParams& p) {
  const double x_m = mechanics::zero_point_amplitude(p.m, p.omega_m);
  const double kappa = cavity_damping(p);
  const double l3 = p.lambda * p.lambda * p.lambda;
  return l3 * p.L * p.L * (1.0 - p.r_c) * p.m * p.omega_m * (p.omega_m * p.omega_m + kappa * kappa / 16.0) /
         (8.0 * kPi * kPi * kPi * x_m * x_m * kSpeedOfLight * p.P_in);
}

double rwa_rate(const ExperimentParams& p) {
  const double dw = detuning_per_phonon(p);
  const auto noise = pdh_noise_psd(p);
  return 0.5 * dw * dw * photon_psd(-2.0 * p.omega_m, 0.0, noise.kappa, noise.n_bar_photons);
}

std::optional<double> linear_lifetime(const ExperimentParams& p) {
  if (p.x0 == 0.0) return std::nullopt;
  const double kappa = cavity_damping(p);
  const double l3 = p.lambda * p.lambda * p.lambda;
  return p.m * p.omega_m * p.L * p.L * l3 * (1.0 - p.r_c) * (4.0 * p.omega_m * p.omega_m + kappa * kappa) /
         (256.0 * kPi * kPi * kPi * p.P_in * kSpeedOfLight * p.x0 * p.x0);
}

double linear_rate(const ExperimentParams& p) {
  const double x_m = mechanics::zero_point_amplitude(p.m, p.omega_m);
  const double slope = cavity::curvature_near_unity(p.r_c, p.L, p.lambda) * p.x0;
  const auto noise = pdh_noise_psd(p);
  const double coupling = slope * x_m;
  return coupling * coupling * photon_psd(-p.omega_m, 0.0, noise.kappa, noise.n_bar_photons);
}

QndBudget jump_budget(const ExperimentParams& p) {
  require_valid(p);
  QndBudget b;
  b.delta_omega = detuning_per_phonon(p);
  const auto noise = pdh_noise_psd(p);
  b.kappa = noise.kappa;
  b.n_bar_photons = noise.n_bar_photons;
  b.s_omega = noise.s_omega;
  const auto occupation = mechanics::thermal_occupation(p.T, p.omega_m);
  b.n_bar_phonons = occupation.n_bar;
  b.x_m = mechanics::zero_point_amplitude(p.m, p.omega_m);

  b.tau_thermal = thermal_lifetime(0, p);
  b.tau_rwa = rwa_lifetime(p);
  b.tau_lin = linear_lifetime(p);
  double total_rate = 1.0 / b.tau_thermal + 1.0 / b.tau_rwa;
  if (b.tau_lin) total_rate += 1.0 / *b.tau_lin;
  b.tau_total = 1.0 / total_rate;
  b.snr = b.delta_omega * b.delta_omega * b.tau_total / b.s_omega;
  b.gap = cavity::mode_gap(p.r_c, p.L).approx;

  b.flags.qnd_time_ok = b.tau_total * p.omega_m > 1.0;
  b.flags.gap_ok = b.gap > p.omega_m;
  b.flags.classical_bath_ok = occupation.classical;
  b.flags.good_cavity = p.omega_m > b.kappa;
  return b;
}

ConsistencyRatios consistency_ratios(const ExperimentParams& p) {
  const auto b = jump_budget(p);
  ConsistencyRatios out;
  out.good_cavity = b.flags.good_cavity;

  const double kappa_ratio = b.kappa / p.omega_m;
  const double offset_ratio = p.x0 / b.x_m;
  auto& eq_total = out.total_to_linear;
  eq_total.lhs = b.tau_lin ? b.tau_total / *b.tau_lin : 0.0;
  eq_total.rhs = b.snr / 16.0 * offset_ratio * offset_ratio * kappa_ratio * kappa_ratio;
  eq_total.relative_residual = relative_residual(eq_total.lhs, eq_total.rhs);

  if (b.tau_lin) {
    IdentityCheck eq_lin;
    eq_lin.lhs = *b.tau_lin / b.tau_rwa;
    eq_lin.rhs = 0.125 / (offset_ratio * offset_ratio);
    eq_lin.relative_residual = relative_residual(eq_lin.lhs, eq_lin.rhs);
    out.linear_to_rwa = eq_lin;
  }
  return out;
}

ThermalSnr snr_general_n(unsigned n, const ExperimentParams& p) {
  require_valid(p);
  const double dw = detuning_per_phonon(p);
  const double tau = thermal_lifetime(n, p);
  return {dw * dw * tau / pdh_noise_psd(p).s_omega, tau};
}

}  // namespace optomech::qnd
