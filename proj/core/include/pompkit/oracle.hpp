#pragma once

#include <span>
#include <vector>

#include "pompkit/data.hpp"
#include "pompkit/optimize.hpp"
#include "pompkit/params.hpp"

namespace pompkit {

/// Scalar linear Gaussian state-space model on the log scale:
///   x_n = a x_{n-1} + b + N(0, q),   z_n = x_n + c + N(0, r_obs).
struct LinearGaussianSSM {
  double a = 1.0;
  double b = 0.0;
  double q = 0.0;
  double c = 0.0;
  double r_obs = 1.0;
  double x0_mean = 0.0;
  double x0_var = 0.0;

  void validate() const;
};

/// Exact log likelihood of log-scale observations `y_log`, one transition per
/// observation. NaN entries are treated as missing. The Jacobian -sum(y_log)
/// is included so the result is the density of the natural-scale data.
double kalman_loglik(const LinearGaussianSSM& ssm, std::span<const double> y_log);

/// As above with `steps[n]` transitions before observation n (0 allowed).
double kalman_loglik(const LinearGaussianSSM& ssm, std::span<const double> y_log, std::span<const int> steps);

/// The Gompertz model written as a linear Gaussian model of log X with one
/// transition of length `delta_t`.
LinearGaussianSSM gompertz_ssm(double r, double K, double sigma, double tau, double X0, double delta_t = 1.0);

/// Exact Gompertz log likelihood of the observed column `obs` in `data`, for
/// parameters named r, K, sigma, tau and X.0.
double gompertz_kalman_loglik(const TimeSeriesData& data, const ParamVector& params, double delta_t = 1.0,
                              const std::string& obs = "Y");

struct ExactMle {
  ParamVector theta;
  double loglik = 0.0;
  OptimStatus status = OptimStatus::Converged;
  int evaluations = 0;
};

/// Maximises the exact Gompertz likelihood over log r, log sigma and log tau
/// with K and X.0 held at their values in `start`.
ExactMle kalman_exact_mle(const TimeSeriesData& data, const ParamVector& start, const NelderMeadOptions& options = {},
                          double delta_t = 1.0);

}  // namespace pompkit
