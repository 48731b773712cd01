#include "optomech/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "optomech/errors.hpp"

namespace optomech::fitting {

LevenbergMarquardtResult levenberg_marquardt(const ResidualFunction& fn, Eigen::VectorXd params,
                                             Eigen::Index residual_count,
                                             const LevenbergMarquardtOptions& options) {
  const Eigen::Index n = params.size();
  Eigen::VectorXd r(residual_count);
  Eigen::VectorXd r_trial(residual_count);
  Eigen::MatrixXd J(residual_count, n);

  fn(params, r, &J);
  double cost = 0.5 * r.squaredNorm();
  if (!std::isfinite(cost)) throw FitError("residuals are not finite at the starting point");

  double damping = 1e-3;
  LevenbergMarquardtResult result;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    result.iterations = iter;
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance || cost <= options.cost_tolerance) {
      result.converged = true;
      break;
    }

    bool accepted = false;
    bool stalled = false;
    while (!accepted) {
      Eigen::MatrixXd A = JtJ;
      for (Eigen::Index i = 0; i < n; ++i) A(i, i) += damping * std::max(JtJ(i, i), 1e-300);
      const Eigen::VectorXd step = A.ldlt().solve(-g);
      const Eigen::VectorXd trial = params + step;

      fn(trial, r_trial, nullptr);
      const double trial_cost = 0.5 * r_trial.squaredNorm();
      const double step_rel = step.norm() / (params.norm() + options.step_tolerance);

      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        const double drop = cost - trial_cost;
        params = trial;
        cost = trial_cost;
        fn(params, r, &J);
        damping = std::max(damping / 3.0, 1e-12);
        accepted = true;
        if (step_rel <= options.step_tolerance || drop <= 1e-15 * cost) stalled = true;
      } else {
        damping *= 4.0;
        if (damping > 1e20 || step_rel <= options.step_tolerance) {
          stalled = true;
          break;
        }
      }
    }
    if (stalled) {
      result.converged = true;
      break;
    }
  }

  result.params = params;
  result.cost = cost;
  return result;
}

ExponentialFit fit_exponential_decay(std::span<const double> t, std::span<const double> y, bool with_offset,
                                     std::size_t min_samples) {
  if (t.size() != y.size()) throw FitError("time and value arrays differ in length");
  if (t.size() < min_samples) {
    throw FitError("need at least " + std::to_string(min_samples) + " samples, got " + std::to_string(t.size()));
  }
  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  const double y_min = *lo_it;
  const double y_max = *hi_it;
  const double y_scale = std::max(std::abs(y_min), std::abs(y_max));
  if (!(y_max - y_min > 1e-12 * y_scale)) throw FitError("trace is constant; no decay to fit");

  const double t0 = t.front();
  const double t_span = t.back() - t0;
  if (!(t_span > 0.0)) throw FitError("time samples must increase");

  // Log-linear start on the points well above the floor.
  const double base = with_offset ? y_min - 0.01 * (y_max - y_min) : 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t used = 0;
  const double cut = base + 0.05 * (y_max - base);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double v = y[i] - base;
    if (y[i] <= cut || v <= 0.0) continue;
    const double s = (t[i] - t0) / t_span;
    const double ly = std::log(v);
    sx += s;
    sy += ly;
    sxx += s * s;
    sxy += s * ly;
    ++used;
  }
  if (used < 2) throw FitError("too few samples above the floor to start the fit");
  const double denom = static_cast<double>(used) * sxx - sx * sx;
  const double slope = denom != 0.0 ? (static_cast<double>(used) * sxy - sx * sy) / denom : 0.0;
  if (!(slope < 0.0)) throw FitError("trace does not decay (non-negative log slope)");
  const double intercept = (sy - slope * sx) / static_cast<double>(used);

  // Normalized parameters: amplitude/y_scale, log(tau/t_span), offset/y_scale.
  Eigen::VectorXd p0(with_offset ? 3 : 2);
  p0(0) = std::exp(intercept) / y_scale;
  p0(1) = std::log(-1.0 / slope);
  if (with_offset) p0(2) = base / y_scale;

  std::vector<double> s(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) s[i] = (t[i] - t0) / t_span;

  const auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
    const double rate = std::exp(-p(1));
    const double offset = with_offset ? p(2) : 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double e = std::exp(-s[i] * rate);
      const auto k = static_cast<Eigen::Index>(i);
      r(k) = p(0) * e + offset - y[i] / y_scale;
      if (J != nullptr) {
        (*J)(k, 0) = e;
        (*J)(k, 1) = p(0) * e * s[i] * rate;
        if (with_offset) (*J)(k, 2) = 1.0;
      }
    }
  };

  const auto fit = levenberg_marquardt(residuals, p0, static_cast<Eigen::Index>(t.size()));
  if (!fit.converged) throw FitError("exponential fit did not converge");

  ExponentialFit out;
  out.amplitude = fit.params(0) * y_scale;
  out.tau = std::exp(fit.params(1)) * t_span;
  out.offset = with_offset ? fit.params(2) * y_scale : 0.0;
  out.residual_rms = std::sqrt(2.0 * fit.cost / static_cast<double>(t.size())) * y_scale;
  out.iterations = fit.iterations;
  if (!(std::isfinite(out.tau) && out.tau > 0.0)) throw FitError("fitted time constant is not positive");
  if (!(out.amplitude > 0.0)) throw FitError("fitted decay amplitude is not positive");
  return out;
}

}  // namespace optomech::fitting
