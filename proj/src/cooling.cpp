#include "optomech/cooling.hpp"

#include <algorithm>
#include <cmath>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"
#include "optomech/fitting.hpp"

namespace optomech::cooling {

namespace {

bool in_any(double nu, std::span<const FrequencyBand> bands) {
  return std::any_of(bands.begin(), bands.end(), [nu](const auto& b) { return nu >= b.lo_hz && nu <= b.hi_hz; });
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  double sum = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) sum += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return sum;
}

// Normalized model a / ((u0^2 - u^2)^2 + g^2 u^2) + f with p = (ln a, u0, ln g, f).
struct NormalizedLorentzian {
  double a, u0, g, f;

  explicit NormalizedLorentzian(const Eigen::VectorXd& p)
      : a(std::exp(p(0))), u0(p(1)), g(std::exp(p(2))), f(p(3)) {}

  double denom(double u) const {
    const double d = u0 * u0 - u * u;
    return d * d + g * g * u * u;
  }
  double operator()(double u) const { return a / denom(u) + f; }
};

}  // namespace

double psd_model(double omega, double m, double T_eff, double omega_eff, double gamma_eff) {
  if (!(m > 0.0 && T_eff > 0.0 && omega_eff > 0.0 && gamma_eff > 0.0)) {
    throw DomainError("psd_model parameters must be > 0");
  }
  const double d = omega_eff * omega_eff - omega * omega;
  return (4.0 * kBoltzmann * T_eff * gamma_eff / m) / (d * d + gamma_eff * gamma_eff * omega * omega);
}

double teff_from_area(const PsdTrace& trace, double m, double omega_m) {
  if (trace.freq_hz.size() != trace.psd.size() || trace.freq_hz.size() < 2) {
    throw EstimationError("PSD trace needs at least two (frequency, psd) samples");
  }
  if (!(m > 0.0 && omega_m > 0.0)) throw DomainError("mass and omega_m must be > 0");
  std::vector<double> signal(trace.psd.size());
  std::transform(trace.psd.begin(), trace.psd.end(), signal.begin(),
                 [&](double s) { return s - trace.noise_floor; });
  const double area = trapezoid(trace.freq_hz, signal);
  if (!(area > 0.0)) throw EstimationError("no positive PSD area above the noise floor");
  return m * omega_m * omega_m * area / kBoltzmann;
}

double teff_from_q(double T_bath, double Q_eff, double Q) {
  if (!(T_bath > 0.0 && Q_eff > 0.0 && Q > 0.0)) throw DomainError("T, Q_eff and Q must be > 0");
  return T_bath * Q_eff / Q;
}

PsdTrace fit_psd(std::vector<double> freq_hz, std::vector<double> psd, const PsdFitContext& ctx,
                 std::span<const FrequencyBand> masked) {
  if (freq_hz.size() != psd.size()) throw FitError("frequency and PSD arrays differ in length");
  if (!(ctx.m > 0.0)) throw DomainError("fit_psd needs the motional mass");

  std::vector<double> u;
  std::vector<double> s;
  double s_max = 0.0;
  double nu_peak = 0.0;
  for (std::size_t i = 0; i < freq_hz.size(); ++i) {
    if (psd[i] < 0.0 || !std::isfinite(psd[i])) throw FitError("PSD samples must be finite and >= 0");
    if (in_any(freq_hz[i], masked)) continue;
    if (psd[i] > s_max) {
      s_max = psd[i];
      nu_peak = freq_hz[i];
    }
  }
  if (!(s_max > 0.0 && nu_peak > 0.0)) throw FitError("PSD has no positive peak");
  for (std::size_t i = 0; i < freq_hz.size(); ++i) {
    if (in_any(freq_hz[i], masked)) continue;
    u.push_back(freq_hz[i] / nu_peak);
    s.push_back(psd[i] / s_max);
  }
  if (u.size() < kMinPsdSamples) {
    throw FitError("need at least " + std::to_string(kMinPsdSamples) + " unmasked samples");
  }

  // Starting point: floor from the smallest sample, width from half maximum.
  const auto ip = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
  const double f0 = std::max(0.0, *std::min_element(s.begin(), s.end()));
  const double half = f0 + 0.5 * (1.0 - f0);
  auto crossing = [&](int dir) -> std::optional<double> {
    for (auto i = static_cast<long>(ip); i + dir >= 0 && i + dir < static_cast<long>(s.size()); i += dir) {
      const auto j = static_cast<std::size_t>(i + dir);
      const auto k = static_cast<std::size_t>(i);
      if (s[j] <= half) return u[k] + (u[j] - u[k]) * (s[k] - half) / (s[k] - s[j]);
    }
    return std::nullopt;
  };
  const auto left = crossing(-1);
  const auto right = crossing(+1);
  double fwhm = 0.0;
  if (left && right) {
    fwhm = *right - *left;
  } else if (left || right) {
    fwhm = 2.0 * std::abs((left ? *left : *right) - u[ip]);
  }
  if (!(fwhm > 0.0)) throw FitError("cannot locate the half-maximum of the peak");

  const double u0 = u[ip];
  Eigen::VectorXd p0(4);
  p0 << std::log((1.0 - f0) * fwhm * fwhm * u0 * u0), u0, std::log(fwhm), f0;

  const auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
    const NormalizedLorentzian model(p);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const double D = model.denom(u[i]);
      const double M = model.a / D + model.f;
      r(k) = s[i] / M - 1.0;
      if (J != nullptr) {
        const double w = -s[i] / (M * M);
        const double dD_du0 = 4.0 * model.u0 * (model.u0 * model.u0 - u[i] * u[i]);
        const double dD_dlng = 2.0 * model.g * model.g * u[i] * u[i];
        (*J)(k, 0) = w * model.a / D;
        (*J)(k, 1) = w * (-model.a / (D * D)) * dD_du0;
        (*J)(k, 2) = w * (-model.a / (D * D)) * dD_dlng;
        (*J)(k, 3) = w;
      }
    }
  };

  const auto result = fitting::levenberg_marquardt(residuals, p0, static_cast<Eigen::Index>(u.size()));
  if (!result.converged) throw FitError("PSD fit did not converge");
  const NormalizedLorentzian best(result.params);

  const double w_scale = 2.0 * kPi * nu_peak;
  PsdFit fit;
  fit.omega_eff = w_scale * std::abs(best.u0);
  fit.gamma_eff = w_scale * best.g;
  if (!(std::isfinite(fit.gamma_eff) && fit.gamma_eff > 0.0) || !(fit.omega_eff > 0.0)) {
    throw FitError("fitted linewidth is not positive");
  }
  fit.q_eff = fit.omega_eff / fit.gamma_eff;
  fit.floor = best.f * s_max;
  const double amplitude = best.a * s_max * std::pow(w_scale, 4);  // 4 k_B T gamma / m
  fit.t_eff_model = amplitude * ctx.m / (4.0 * kBoltzmann * fit.gamma_eff);
  fit.iterations = result.iterations;

  double sq = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double diff = (s[i] - best(u[i])) * s_max;
    sq += diff * diff;
  }
  fit.residual_rms = std::sqrt(sq / static_cast<double>(u.size()));

  PsdTrace trace{std::move(freq_hz), std::move(psd), fit.floor, std::nullopt};
  std::vector<double> filled = trace.psd;
  for (std::size_t i = 0; i < filled.size(); ++i) {
    if (in_any(trace.freq_hz[i], masked)) filled[i] = best(trace.freq_hz[i] / nu_peak) * s_max;
  }
  const double omega_for_area = ctx.omega_m > 0.0 ? ctx.omega_m : fit.omega_eff;
  fit.t_eff_area = teff_from_area(PsdTrace{trace.freq_hz, filled, fit.floor, std::nullopt}, ctx.m, omega_for_area);
  if (ctx.T_bath > 0.0 && ctx.Q > 0.0) fit.t_eff_q = teff_from_q(ctx.T_bath, fit.q_eff, ctx.Q);

  trace.fit = fit;
  return trace;
}

double shot_thermal_ratio(const ExperimentParams& p) {
  require_valid(p);
  return 16.0 * kHbar * p.P_in * p.Q * p.F * p.F /
         (p.lambda * kSpeedOfLight * kPi * kBoltzmann * p.T * p.m * p.omega_m);
}

}  // namespace optomech::cooling
