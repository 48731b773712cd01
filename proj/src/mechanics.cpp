#include "optomech/mechanics.hpp"

#include <cmath>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"
#include "optomech/fitting.hpp"

namespace optomech::mechanics {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be > 0");
}

}  // namespace

double zero_point_amplitude(double m, double omega_m) {
  require_positive(m, "mass");
  require_positive(omega_m, "omega_m");
  return std::sqrt(kHbar / (2.0 * m * omega_m));
}

ThermalOccupation thermal_occupation(double T, double omega_m) {
  if (!(T >= 0.0)) throw DomainError("temperature must be >= 0");
  require_positive(omega_m, "omega_m");
  const double n = kBoltzmann * T / (kHbar * omega_m);
  return {n, n >= kClassicalOccupation};
}

double spring_constant(double m, double omega_m) {
  require_positive(m, "mass");
  require_positive(omega_m, "omega_m");
  return m * omega_m * omega_m;
}

double q_from_ringdown(double tau, double omega_m) {
  require_positive(tau, "ringdown time");
  require_positive(omega_m, "omega_m");
  return omega_m * tau / 2.0;
}

double ringdown_from_q(double Q, double omega_m) {
  require_positive(Q, "Q");
  require_positive(omega_m, "omega_m");
  return 2.0 * Q / omega_m;
}

MechRingdownFit fit_mech_ringdown(std::span<const double> t, std::span<const double> amplitude, bool with_offset) {
  const auto fit = fitting::fit_exponential_decay(t, amplitude, with_offset);
  return {fit.tau, fit.amplitude, fit.offset, fit.residual_rms};
}

}  // namespace optomech::mechanics
