#include "optomech/cavity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <thread>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"
#include "optomech/fitting.hpp"

namespace optomech::cavity {

namespace {

using cplx = std::complex<double>;
using Mat2 = std::array<cplx, 4>;  // row-major

Mat2 mul(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
          a[2] * b[1] + a[3] * b[3]};
}

// Maps (right-moving, left-moving) amplitudes on the left face to the right face.
Mat2 transfer(const Scatterer& s) {
  const cplx inv_t = 1.0 / s.t;
  return {(s.t * s.t - s.r * s.r) * inv_t, s.r * inv_t, -s.r * inv_t, inv_t};
}

Mat2 propagate(double phase) {
  const cplx e = std::polar(1.0, phase);
  return {e, 0.0, 0.0, std::conj(e)};
}

void require_lengths(double L, double lambda) {
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("cavity length L must be > 0");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("wavelength lambda must be > 0");
}

void require_reflectivity(double r_c) {
  if (!(r_c >= 0.0)) throw DomainError("r_c must be >= 0");
  if (!(r_c < 1.0)) throw DomainError("r_c must be < 1");
}

double golden_max(const auto& f, double a, double b) {
  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < 200 && (b - a) > 1e-15 * (std::abs(a) + std::abs(b)); ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double free_spectral_range(double L) {
  if (!(L > 0.0)) throw DomainError("cavity length L must be > 0");
  return kPi * kSpeedOfLight / L;
}

double dispersive_detuning(double x, double r_c, double L, double lambda) {
  require_lengths(L, lambda);
  require_reflectivity(r_c);
  return (kSpeedOfLight / L) * std::acos(r_c * std::cos(4.0 * kPi * x / lambda));
}

DetuningDerivatives detuning_derivatives(double x0, double r_c, double L, double lambda) {
  require_lengths(L, lambda);
  if (!(r_c >= 0.0) || r_c > 1.0) throw DomainError("r_c must lie in [0, 1)");
  const double one_minus_r2 = (1.0 - r_c) * (1.0 + r_c);
  if (!(one_minus_r2 > 0.0)) throw SingularityError("curvature diverges as r_c -> 1 (1 - r_c underflows)");

  DetuningDerivatives d;
  d.omega0 = kSpeedOfLight * std::acos(r_c) / L;
  d.omega2 = 16.0 * kPi * kPi * kSpeedOfLight * r_c / (L * lambda * lambda * std::sqrt(one_minus_r2));
  d.omega1 = d.omega2 * x0;
  d.quadratic_coupling = r_c > 0.0;
  return d;
}

double curvature_near_unity(double r_c, double L, double lambda) {
  require_lengths(L, lambda);
  if (!(r_c >= 0.0) || r_c > 1.0) throw DomainError("r_c must lie in [0, 1)");
  const double gap = 1.0 - r_c;
  if (!(gap > 0.0)) throw SingularityError("per-phonon shift diverges: 1 - r_c underflows");
  return 16.0 * kPi * kPi * kSpeedOfLight / (L * lambda * lambda * std::sqrt(2.0 * gap));
}

std::string BandLabel::name() const {
  return "band_" + std::to_string(j) + (sign > 0 ? "_+" : "_-");
}

BandStructure band_structure(double r_c, double L, double lambda, double x_min, double x_max,
                             std::size_t n_samples, std::size_t n_bands) {
  require_lengths(L, lambda);
  require_reflectivity(r_c);
  if (n_samples < 2) throw DomainError("band_structure needs at least 2 samples");
  if (n_bands < 1) throw DomainError("band_structure needs at least 1 band");
  if (!(x_max > x_min)) throw DomainError("x range must satisfy x_min < x_max");

  BandStructure out;
  out.omega_fsr = free_spectral_range(L);
  out.x.resize(n_samples);
  const double dx = (x_max - x_min) / static_cast<double>(n_samples - 1);
  for (std::size_t i = 0; i < n_samples; ++i) {
    out.x[i] = i + 1 == n_samples ? x_max : x_min + dx * static_cast<double>(i);
  }

  std::vector<double> theta(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    theta[i] = std::acos(r_c * std::cos(4.0 * kPi * out.x[i] / lambda));
  }

  const double scale = kSpeedOfLight / L;
  for (std::size_t b = 0; b < n_bands; ++b) {
    // b = 0 -> (0,+); b = 1 -> (1,-); b = 2 -> (1,+); ...
    const BandLabel label{static_cast<int>((b + 1) / 2), b % 2 == 0 ? +1 : -1};
    Band band{label, std::vector<double>(n_samples)};
    for (std::size_t i = 0; i < n_samples; ++i) {
      band.omega[i] = scale * (2.0 * kPi * label.j + label.sign * theta[i]);
    }
    out.bands.push_back(std::move(band));
  }
  return out;
}

ModeGap mode_gap(double r_c, double L) {
  require_reflectivity(r_c);
  if (!(L > 0.0)) throw DomainError("cavity length L must be > 0");
  ModeGap g;
  g.approx = (kSpeedOfLight / L) * std::sqrt(8.0 * (1.0 - r_c));
  g.exact = 2.0 * (kSpeedOfLight / L) * std::acos(r_c);
  g.relative_error = std::abs(g.approx - g.exact) / g.exact;
  return g;
}

Scatterer sheet(double zeta) {
  const cplx t = 1.0 / cplx(1.0, zeta);
  return {cplx(0.0, -zeta) * t, t};
}

double sheet_zeta(double r_c) {
  require_reflectivity(r_c);
  return r_c / std::sqrt((1.0 - r_c) * (1.0 + r_c));
}

Scatterer slab(const MembraneSpec& spec, double lambda) {
  if (const auto v = validate(spec); !v.empty()) throw DomainError(v.front().message);
  if (!(lambda > 0.0)) throw DomainError("wavelength lambda must be > 0");
  const double n = spec.n_index;
  const double r12 = (1.0 - n) / (1.0 + n);
  const double delta = 2.0 * kPi * n * spec.d / lambda;
  const cplx e1 = std::polar(1.0, delta);
  const cplx e2 = e1 * e1;
  const cplx denom = 1.0 - r12 * r12 * e2;
  return {r12 * (1.0 - e2) / denom, (1.0 - r12 * r12) * e1 / denom};
}

double membrane_reflectivity(const MembraneSpec& spec, double lambda) {
  return std::abs(slab(spec, lambda).r);
}

double mirror_reflectivity_from_finesse(double F) {
  if (!(F >= 1.0)) throw DomainError("finesse must be >= 1");
  // F u^2 + pi u - F = 0 with u = sqrt(R).
  const double u = 2.0 * F / (kPi + std::sqrt(kPi * kPi + 4.0 * F * F));
  return u * u;
}

TransmissionModel::TransmissionModel(double r_c, double F, double L, double lambda) : L_(L), lambda_(lambda) {
  require_lengths(L, lambda);
  init(sheet(sheet_zeta(r_c)), F);
}

TransmissionModel::TransmissionModel(const MembraneSpec& spec, double F, double L, double lambda)
    : L_(L), lambda_(lambda) {
  require_lengths(L, lambda);
  init(slab(spec, lambda), F);
}

void TransmissionModel::init(const Scatterer& membrane, double F) {
  const double R = mirror_reflectivity_from_finesse(F);
  finesse_ = F;
  mirror_ = sheet(std::sqrt(R / (1.0 - R)));
  membrane_ = membrane;

  // Any symmetric lossless two-port is a sheet of polarizability
  // zeta = Re(i r / t) followed by an extra transmission phase.
  const double zeta = (cplx(0.0, 1.0) * membrane.r / membrane.t).real();
  const double excess_phase = std::arg(membrane.t) + std::atan(zeta);
  const double mirror_phase = std::atan(std::sqrt((1.0 - R) / R));
  signed_reflectivity_ = zeta / std::sqrt(1.0 + zeta * zeta);
  reference_phase_ = 1.5 * kPi + std::atan(zeta) - mirror_phase - excess_phase;
}

double TransmissionModel::transmission(double detuning, double x) const {
  const double k = 2.0 * kPi / lambda_;
  const double common = 0.5 * reference_phase_ + detuning * L_ / (2.0 * kSpeedOfLight);
  const Mat2 m_mirror = transfer(mirror_);
  Mat2 m = mul(transfer(membrane_), mul(propagate(common + k * x), m_mirror));
  m = mul(m_mirror, mul(propagate(common - k * x), m));
  const double T = 1.0 / std::norm(m[3]);
  return std::clamp(T, 0.0, 1.0);
}

double TransmissionModel::linewidth() const { return kPi * kSpeedOfLight / (L_ * finesse_); }

std::vector<double> TransmissionModel::resonances(double x, double lo, double hi) const {
  if (!(hi > lo)) throw DomainError("resonance window must satisfy lo < hi");
  const double step = linewidth() / 8.0;
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;
  std::vector<double> T(n);
  for (std::size_t i = 0; i < n; ++i) T[i] = transmission(lo + step * static_cast<double>(i), x);

  std::vector<double> peaks;
  const auto f = [&](double d) { return transmission(d, x); };
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (T[i] >= T[i - 1] && T[i] > T[i + 1] && T[i] > 1e-12) {
      const double center = lo + step * static_cast<double>(i);
      peaks.push_back(golden_max(f, center - step, center + step));
    }
  }
  return peaks;
}

TransmissionMap transmission_map(const TransmissionModel& model, std::vector<double> detuning_grid,
                                 std::vector<double> x_grid, unsigned workers) {
  if (detuning_grid.empty() || x_grid.empty()) throw DomainError("transmission map grids must be non-empty");
  TransmissionMap map{std::move(detuning_grid), std::move(x_grid), {}};
  const std::size_t nd = map.detuning_grid.size();
  const std::size_t nx = map.x_grid.size();
  map.intensity.resize(nd * nx);

  const auto fill_rows = [&](std::size_t row_begin, std::size_t row_end) {
    for (std::size_t ix = row_begin; ix < row_end; ++ix) {
      for (std::size_t id = 0; id < nd; ++id) {
        map.intensity[ix * nd + id] = model.transmission(map.detuning_grid[id], map.x_grid[ix]);
      }
    }
  };

  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(nx));
  if (workers == 1) {
    fill_rows(0, nx);
    return map;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (nx + workers - 1) / workers;
  for (std::size_t begin = 0; begin < nx; begin += chunk) {
    pool.emplace_back(fill_rows, begin, std::min(nx, begin + chunk));
  }
  pool.clear();
  return map;
}

double tau_from_finesse(double F, double L) {
  if (!(F > 0.0) || !(L > 0.0)) throw DomainError("finesse and length must be > 0");
  return L * F / (kPi * kSpeedOfLight);
}

double finesse_from_tau(double tau, double L) {
  if (!(tau > 0.0) || !(L > 0.0)) throw DomainError("ringdown time and length must be > 0");
  return kPi * kSpeedOfLight * tau / L;
}

double finesse_ringdown(double value, double L, RingdownDirection direction) {
  return direction == RingdownDirection::FinesseToTau ? tau_from_finesse(value, L) : finesse_from_tau(value, L);
}

RingdownTrace fit_ringdown(std::span<const double> t, std::span<const double> power, double switch_off) {
  if (t.size() != power.size()) throw FitError("time and power arrays differ in length");
  RingdownTrace out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= switch_off) {
      out.t.push_back(t[i]);
      out.power.push_back(power[i]);
    }
  }
  const auto fit = fitting::fit_exponential_decay(out.t, out.power, true);
  out.fitted_tau = fit.tau;
  out.fitted_amplitude = fit.amplitude;
  out.fitted_offset = fit.offset;
  out.residual_rms = fit.residual_rms;
  return out;
}

}  // namespace optomech::cavity
