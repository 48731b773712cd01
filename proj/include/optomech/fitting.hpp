#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>

namespace optomech::fitting {

/// Fills residuals (size fixed by the caller) and, when non-null, the Jacobian
/// d(residual_i)/d(param_j).
using ResidualFunction =
    std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals, Eigen::MatrixXd* jacobian)>;

struct LevenbergMarquardtOptions {
  int max_iterations = 500;
  double step_tolerance = 1e-15;
  double cost_tolerance = 1e-30;
  double gradient_tolerance = 1e-30;
};

struct LevenbergMarquardtResult {
  Eigen::VectorXd params;
  double cost = 0.0;  // 0.5 * sum of squared residuals
  int iterations = 0;
  bool converged = false;
};

LevenbergMarquardtResult levenberg_marquardt(const ResidualFunction& fn, Eigen::VectorXd initial,
                                             Eigen::Index residual_count,
                                             const LevenbergMarquardtOptions& options = {});

struct ExponentialFit {
  double tau = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double residual_rms = 0.0;
  int iterations = 0;
};

/// Least-squares fit of y = A exp(-(t - t_first)/tau) + B, with B pinned to 0
/// when `with_offset` is false. The starting point comes from a log-linear
/// regression of (y - min). Throws FitError when the data has no decay, fewer
/// than `min_samples` points, or the fit does not converge.
ExponentialFit fit_exponential_decay(std::span<const double> t, std::span<const double> y, bool with_offset,
                                     std::size_t min_samples = 10);

}  // namespace optomech::fitting
