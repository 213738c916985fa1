#include "pompkit/oracle.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "pompkit/error.hpp"
#include "pompkit/log.hpp"

namespace pompkit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<int> observation_steps(const TimeSeriesData& data, double delta_t) {
  std::vector<int> steps(data.size());
  double t = data.t0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    steps[n] = static_cast<int>(std::llround((data.times[n] - t) / delta_t));
    t = data.times[n];
  }
  return steps;
}

std::vector<double> log_series(const TimeSeriesData& data, const std::string& obs) {
  auto y = data.series(obs);
  for (double& v : y) {
    if (std::isnan(v)) continue;
    if (!(v > 0)) throw Error(ErrorKind::Domain, "Kalman oracle needs positive observations");
    v = std::log(v);
  }
  return y;
}

}  // namespace

void LinearGaussianSSM::validate() const {
  if (!(q >= 0) || !(r_obs >= 0) || !(x0_var >= 0))
    throw Error(ErrorKind::Domain, "linear Gaussian model variances must be non-negative");
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(x0_mean))
    throw Error(ErrorKind::Domain, "linear Gaussian model coefficients must be finite");
}

double kalman_loglik(const LinearGaussianSSM& ssm, std::span<const double> y_log) {
  const std::vector<int> steps(y_log.size(), 1);
  return kalman_loglik(ssm, y_log, steps);
}

double kalman_loglik(const LinearGaussianSSM& ssm, std::span<const double> y_log, std::span<const int> steps) {
  ssm.validate();
  if (steps.size() != y_log.size()) throw Error(ErrorKind::Domain, "kalman_loglik: steps and data differ in length");
  double m = ssm.x0_mean, v = ssm.x0_var, ll = 0.0;
  for (std::size_t n = 0; n < y_log.size(); ++n) {
    for (int k = 0; k < steps[n]; ++k) {
      m = ssm.a * m + ssm.b;
      v = ssm.a * ssm.a * v + ssm.q;
    }
    const double z = y_log[n];
    if (std::isnan(z)) continue;
    if (!std::isfinite(z)) throw Error(ErrorKind::Domain, "kalman_loglik: observations must be finite");
    const double resid = z - ssm.c - m;
    const double S = v + ssm.r_obs;
    if (S <= 0) {
      if (resid != 0) {
        log::debug("kalman_loglik: zero predictive variance with a mismatched observation");
        return kNegInf;
      }
      ll -= z;
      continue;
    }
    ll += -0.5 * (std::log(2 * std::numbers::pi * S) + resid * resid / S) - z;
    const double gain = v / S;
    m += gain * resid;
    v *= 1 - gain;
  }
  return ll;
}

LinearGaussianSSM gompertz_ssm(double r, double K, double sigma, double tau, double X0, double delta_t) {
  if (!(K > 0) || !(X0 > 0)) throw Error(ErrorKind::Domain, "Gompertz K and X.0 must be positive");
  LinearGaussianSSM ssm;
  ssm.a = std::exp(-r * delta_t);
  ssm.b = -std::expm1(-r * delta_t) * std::log(K);
  ssm.q = sigma * sigma;
  ssm.r_obs = tau * tau;
  ssm.x0_mean = std::log(X0);
  return ssm;
}

double gompertz_kalman_loglik(const TimeSeriesData& data, const ParamVector& p, double delta_t, const std::string& obs) {
  const auto ssm = gompertz_ssm(p["r"], p["K"], p["sigma"], p["tau"], p["X.0"], delta_t);
  const auto y = log_series(data, obs);
  const auto steps = observation_steps(data, delta_t);
  return kalman_loglik(ssm, y, steps);
}

ExactMle kalman_exact_mle(const TimeSeriesData& data, const ParamVector& start, const NelderMeadOptions& options,
                          double delta_t) {
  const auto y = log_series(data, data.names.at(0));
  const auto steps = observation_steps(data, delta_t);
  const double K = start["K"], X0 = start["X.0"];
  auto objective = [&](std::span<const double> z) {
    const auto ssm = gompertz_ssm(std::exp(z[0]), K, std::exp(z[1]), std::exp(z[2]), X0, delta_t);
    return -kalman_loglik(ssm, y, steps);
  };
  const std::vector<double> x0 = {std::log(start["r"]), std::log(start["sigma"]), std::log(start["tau"])};
  const auto fit = nelder_mead(objective, x0, options);
  ExactMle out;
  out.theta = start;
  out.theta.set("r", std::exp(fit.x[0]));
  out.theta.set("sigma", std::exp(fit.x[1]));
  out.theta.set("tau", std::exp(fit.x[2]));
  out.loglik = -fit.value;
  out.status = fit.status;
  out.evaluations = fit.evaluations;
  return out;
}

}  // namespace pompkit
