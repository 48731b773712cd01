#pragma once

#include <complex>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "optomech/params.hpp"

namespace optomech::cavity {

/// omega_FSR = pi c / L, rad/s.
double free_spectral_range(double L);

/// (c/L) arccos(r_c cos(4 pi x / lambda)), principal branch.
double dispersive_detuning(double x, double r_c, double L, double lambda);

/// Lowest-order expansion of the detuning about the extremum at x = 0,
/// evaluated at the offset x0.
struct DetuningDerivatives {
  double omega0 = 0.0;  // rad/s
  double omega1 = 0.0;  // rad/s/m
  double omega2 = 0.0;  // rad/s/m^2
  bool quadratic_coupling = true;  // false when r_c == 0 (omega2 vanishes)
};

DetuningDerivatives detuning_derivatives(double x0, double r_c, double L, double lambda);

/// Curvature in the r_c -> 1 form, 16 pi^2 c / (L lambda^2 sqrt(2(1 - r_c))).
/// This is the form the jump budget is built on.
double curvature_near_unity(double r_c, double L, double lambda);

struct BandLabel {
  int j = 0;
  int sign = +1;

  /// Column header, e.g. "band_0_+" or "band_1_-".
  std::string name() const;
  bool operator==(const BandLabel&) const = default;
};

struct Band {
  BandLabel label;
  std::vector<double> omega;  // rad/s, one per x sample
};

struct BandStructure {
  std::vector<double> x;  // m
  std::vector<Band> bands;
  double omega_fsr = 0.0;
};

/// Bands (c/L)(2 pi j +- theta(x)) in ascending order starting at (0,+):
/// (0,+), (1,-), (1,+), (2,-), ...
BandStructure band_structure(double r_c, double L, double lambda, double x_min, double x_max,
                             std::size_t n_samples, std::size_t n_bands);

struct ModeGap {
  double approx = 0.0;          // (c/L) sqrt(8 (1 - r_c))
  double exact = 0.0;           // 2 (c/L) arccos(r_c)
  double relative_error = 0.0;  // |approx - exact| / exact
};

ModeGap mode_gap(double r_c, double L);

/// Reflection and transmission amplitudes of a symmetric two-port, referenced
/// to its outer faces.
struct Scatterer {
  std::complex<double> r;
  std::complex<double> t;
};

/// Zero-thickness sheet with real polarizability zeta:
/// t = 1/(1 + i zeta), r = -i zeta t, |r| = |zeta| / sqrt(1 + zeta^2).
Scatterer sheet(double zeta);

/// Sheet polarizability giving field reflectivity |r| = r_c.
double sheet_zeta(double r_c);

/// Lossless dielectric slab in vacuum at normal incidence (Airy sum).
Scatterer slab(const MembraneSpec& spec, double lambda);

/// |r| of a lossless dielectric slab.
double membrane_reflectivity(const MembraneSpec& spec, double lambda);

/// Power reflectivity R of two identical lossless mirrors with F = pi sqrt(R) / (1 - R).
double mirror_reflectivity_from_finesse(double F);

/// Mirror - free space - membrane - free space - mirror, 1-D. The membrane
/// sits at L/2 + x. The carrier phase of the displacement is taken at the
/// laser wavelength and the detuning phase over the nominal half lengths, so
/// the closed-cavity resonances of the sheet model coincide with
/// (c/L)(2 pi j +- theta(x)).
class TransmissionModel {
 public:
  TransmissionModel(double r_c, double F, double L, double lambda);
  TransmissionModel(const MembraneSpec& spec, double F, double L, double lambda);

  /// Normalized transmitted power in [0, 1].
  double transmission(double detuning, double x) const;

  /// Transmission peaks in [lo, hi], located by a scan at a fraction of the
  /// linewidth and refined by golden-section search.
  std::vector<double> resonances(double x, double lo, double hi) const;

  /// Signed field reflectivity of the membrane's equivalent sheet. The
  /// closed-cavity resonances are the bands of dispersive_detuning with
  /// r_c = |value|, evaluated at x + analytic_offset().
  double membrane_signed_reflectivity() const { return signed_reflectivity_; }
  /// 0, or lambda/4 when the equivalent sheet has negative polarizability.
  double analytic_offset() const { return signed_reflectivity_ < 0.0 ? lambda_ / 4.0 : 0.0; }
  double linewidth() const;

 private:
  void init(const Scatterer& membrane, double F);

  double L_;
  double lambda_;
  Scatterer mirror_{};
  Scatterer membrane_{};
  double reference_phase_ = 0.0;
  double signed_reflectivity_ = 0.0;
  double finesse_ = 1.0;
};

struct TransmissionMap {
  std::vector<double> detuning_grid;  // rad/s
  std::vector<double> x_grid;         // m
  std::vector<double> intensity;      // row-major: [i_x * detuning_grid.size() + i_detuning]

  double at(std::size_t i_detuning, std::size_t i_x) const {
    return intensity[i_x * detuning_grid.size() + i_detuning];
  }
};

/// Evaluates the model on the grid; rows are split across `workers` threads
/// and the result does not depend on the split.
TransmissionMap transmission_map(const TransmissionModel& model, std::vector<double> detuning_grid,
                                 std::vector<double> x_grid, unsigned workers = 1);

/// tau = 1/kappa = L F / (pi c).
double tau_from_finesse(double F, double L);
double finesse_from_tau(double tau, double L);

enum class RingdownDirection { FinesseToTau, TauToFinesse };
double finesse_ringdown(double value, double L, RingdownDirection direction);

struct RingdownTrace {
  std::vector<double> t;      // s
  std::vector<double> power;  // W or normalized
  double fitted_tau = 0.0;
  double fitted_amplitude = 0.0;  // at the first fitted sample
  double fitted_offset = 0.0;
  double residual_rms = 0.0;
};

/// Fits power = A exp(-t/tau) + B to the samples at or after `switch_off`.
RingdownTrace fit_ringdown(std::span<const double> t, std::span<const double> power,
                           double switch_off = -std::numeric_limits<double>::infinity());

}  // namespace optomech::cavity
