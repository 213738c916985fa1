#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pompkit/model.hpp"
#include "pompkit/optimize.hpp"

namespace pompkit {

/// Gaussian radial basis exp(-(x - m_k)^2 / (2 s^2)) with centres spread
/// over [ymin - 0.1 R, ymax + 0.1 R] and scale s = 0.3 R.
struct RbfBasis {
  std::vector<double> centers;
  double scale = 0.0;

  double operator()(std::size_t k, double x) const;
};

RbfBasis rbf_centers(double ymin, double ymax, int K);

struct NlfSettings {
  std::vector<int> lags{1};
  int K = 4;
  /// Transient discarded from the start of each simulation.
  std::size_t B = 1000;
  /// Length of the simulation used to fit the predictor.
  std::size_t J = 1000;
  std::vector<std::string> est;
  ParamVector start;
  bool transform = false;
  NelderMeadOptions optimizer;

  void validate() const;
};

/// Lagged radial-basis predictor fitted by least squares to a simulated series.
struct NlfPredictor {
  RbfBasis basis;
  std::vector<int> lags;
  Eigen::VectorXd coefficients;  // lag-major: index j * K + k
  double sigma2 = 0.0;
  bool rank_deficient = false;

  /// Prediction of y[n] from y[n - lag_j]; requires n >= max(lags).
  double predict(std::span<const double> y, std::size_t n) const;
};

/// Fits the predictor to series[B .. B+J) using lags that may reach into the
/// transient. Throws when the residual variance is zero.
NlfPredictor nlf_fit_predictor(std::span<const double> series, const std::vector<int>& lags, int K, std::size_t B);

/// Quasi log likelihood of `data` under a fitted predictor, summed over
/// observations after the largest lag.
double nlf_quasi_loglik(const NlfPredictor& predictor, std::span<const double> data);

/// Simulates B + J observations at the data's spacing and evaluates the
/// quasi log likelihood of the model's data. The model must have a single
/// observable, equally spaced complete data and no covariates.
double nlf_quasi_loglik(const ModelSpec& model, const ParamVector& params, const NlfSettings& settings, Rng& rng);

struct NlfResult {
  ParamVector theta;
  double quasi_loglik = 0.0;
  OptimStatus status = OptimStatus::Converged;
  int evaluations = 0;
};

/// Nelder-Mead maximisation of the quasi log likelihood over `est`, with the
/// random stream held fixed across evaluations.
NlfResult nlf_fit(const ModelSpec& model, const NlfSettings& settings, Rng& rng);

}  // namespace pompkit
