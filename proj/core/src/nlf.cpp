#include "pompkit/nlf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pompkit/error.hpp"
#include "pompkit/log.hpp"
#include "pompkit/simulate.hpp"

namespace pompkit {

namespace {

std::size_t max_lag(const std::vector<int>& lags) {
  return static_cast<std::size_t>(*std::max_element(lags.begin(), lags.end()));
}

void check_lags(const std::vector<int>& lags) {
  if (lags.empty()) throw Error(ErrorKind::Domain, "nlf: at least one lag is required");
  for (int l : lags)
    if (l < 1) throw Error(ErrorKind::Domain, "nlf: lags must be at least 1");
}

double data_spacing(const ModelSpec& model) {
  const auto& d = model.data;
  if (model.obs_dim() != 1) throw Error(ErrorKind::Domain, "nlf requires a single observable");
  if (!model.covariates.empty()) throw Error(ErrorKind::Domain, "nlf does not support models with covariates");
  if (d.size() < 2) throw Error(ErrorKind::Domain, "nlf needs at least two observations");
  const double delta = d.times[1] - d.times[0];
  for (std::size_t n = 1; n < d.size(); ++n)
    if (std::abs(d.times[n] - d.times[n - 1] - delta) > 1e-8 * std::max(1.0, std::abs(delta)))
      throw Error(ErrorKind::Domain, "nlf requires equally spaced observation times");
  for (std::size_t n = 0; n < d.size(); ++n)
    if (std::isnan(d.observations(static_cast<Eigen::Index>(n), 0)))
      throw Error(ErrorKind::Domain, "nlf requires complete data");
  return delta;
}

}  // namespace

double RbfBasis::operator()(std::size_t k, double x) const {
  const double z = (x - centers[k]) / scale;
  return std::exp(-0.5 * z * z);
}

RbfBasis rbf_centers(double ymin, double ymax, int K) {
  if (K < 2) throw Error(ErrorKind::Domain, "rbf_centers: K must be at least 2");
  if (!(ymax > ymin) || !std::isfinite(ymin) || !std::isfinite(ymax))
    throw Error(ErrorKind::Domain, "rbf_centers: the simulated range is degenerate");
  const double R = ymax - ymin;
  RbfBasis b;
  for (int k = 0; k < K; ++k) b.centers.push_back(ymin + R * (1.2 * k / (K - 1) - 0.1));
  b.scale = 0.3 * R;
  return b;
}

void NlfSettings::validate() const {
  check_lags(lags);
  if (K < 2) throw Error(ErrorKind::Domain, "nlf: K must be at least 2");
  const std::size_t need = max_lag(lags) + 1;
  if (B < need || J < need) throw Error(ErrorKind::Domain, "nlf: B and J must both exceed the largest lag");
}

double NlfPredictor::predict(std::span<const double> y, std::size_t n) const {
  const std::size_t K = basis.centers.size();
  double h = 0;
  for (std::size_t j = 0; j < lags.size(); ++j) {
    const double x = y[n - static_cast<std::size_t>(lags[j])];
    for (std::size_t k = 0; k < K; ++k) h += coefficients(static_cast<Eigen::Index>(j * K + k)) * basis(k, x);
  }
  return h;
}

NlfPredictor nlf_fit_predictor(std::span<const double> series, const std::vector<int>& lags, int K, std::size_t B) {
  check_lags(lags);
  if (B < max_lag(lags)) throw Error(ErrorKind::Domain, "nlf: the transient is shorter than the largest lag");
  if (series.size() <= B) throw Error(ErrorKind::Domain, "nlf: the simulation is no longer than the transient");
  const std::size_t J = series.size() - B;
  for (double v : series)
    if (!std::isfinite(v)) throw Error(ErrorKind::SimulationDiverged, "nlf: simulated series is not finite");
  const auto [lo, hi] = std::minmax_element(series.begin() + static_cast<std::ptrdiff_t>(B), series.end());

  NlfPredictor pred;
  pred.basis = rbf_centers(*lo, *hi, K);
  pred.lags = lags;
  const std::size_t cols = lags.size() * static_cast<std::size_t>(K);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(J), static_cast<Eigen::Index>(cols));
  Eigen::VectorXd r(static_cast<Eigen::Index>(J));
  for (std::size_t i = 0; i < J; ++i) {
    const std::size_t n = B + i;
    r(static_cast<Eigen::Index>(i)) = series[n];
    for (std::size_t j = 0; j < lags.size(); ++j) {
      const double x = series[n - static_cast<std::size_t>(lags[j])];
      for (std::size_t k = 0; k < static_cast<std::size_t>(K); ++k)
        X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j * static_cast<std::size_t>(K) + k)) = pred.basis(k, x);
    }
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
  pred.rank_deficient = cod.rank() < static_cast<Eigen::Index>(cols);
  if (pred.rank_deficient) log::debug("nlf: rank-deficient regression; using the minimum-norm solution");
  pred.coefficients = cod.solve(r);
  pred.sigma2 = (r - X * pred.coefficients).squaredNorm() / static_cast<double>(J);
  const double scale = r.squaredNorm() / static_cast<double>(J);
  if (!(pred.sigma2 > 1e-14 * scale)) throw Error(ErrorKind::Domain, "nlf: residual variance is zero (deterministic fit)");
  return pred;
}

double nlf_quasi_loglik(const NlfPredictor& pred, std::span<const double> y) {
  const std::size_t L = max_lag(pred.lags);
  if (y.size() <= L) throw Error(ErrorKind::Domain, "nlf: the data are no longer than the largest lag");
  double ss = 0;
  for (std::size_t n = L; n < y.size(); ++n) {
    const double e = y[n] - pred.predict(y, n);
    ss += e * e;
  }
  const double count = static_cast<double>(y.size() - L);
  return -0.5 * count * std::log(2 * std::numbers::pi * pred.sigma2) - ss / (2 * pred.sigma2);
}

double nlf_quasi_loglik(const ModelSpec& model, const ParamVector& params, const NlfSettings& s, Rng& rng) {
  s.validate();
  require(model, Component::RProcess, "nlf");
  require(model, Component::RMeasure, "nlf");
  const double delta = data_spacing(model);
  const auto& d = model.data;
  std::vector<double> times(s.B + s.J);
  for (std::size_t k = 0; k < times.size(); ++k) times[k] = d.times[0] + static_cast<double>(k) * delta;
  const auto theta = model.dense(params);
  const RowMatrix sim = simulate_observations(model, theta, d.t0, times, rng);
  const auto pred = nlf_fit_predictor(std::span(sim.data(), static_cast<std::size_t>(sim.rows())), s.lags, s.K, s.B);
  const auto y = d.series(d.names.at(0));
  return nlf_quasi_loglik(pred, y);
}

NlfResult nlf_fit(const ModelSpec& model, const NlfSettings& s, Rng& rng) {
  s.validate();
  if (s.transform && !model.has_transform())
    throw Error(ErrorKind::MissingComponent, "nlf: transform requested but the model registers no transform");
  const Rng fixed = rng.split();
  const std::vector<double> theta0 = model.dense(s.start);
  const auto est0 = s.transform ? transform_dense(model, theta0, TransformDirection::ToEstimation) : theta0;
  std::vector<std::size_t> idx;
  for (const auto& name : s.est) idx.push_back(model.param_index(name));

  auto params_at = [&](std::span<const double> z) {
    auto e = est0;
    for (std::size_t k = 0; k < idx.size(); ++k) e[idx[k]] = z[k];
    const auto nat = s.transform ? transform_dense(model, e, TransformDirection::FromEstimation) : e;
    ParamVector out = s.start;
    for (std::size_t k : idx) out.set(model.param_names[k], nat[k]);
    return out;
  };
  auto evaluate = [&](const ParamVector& p) {
    Rng r = fixed;
    return nlf_quasi_loglik(model, p, s, r);
  };

  NlfResult result;
  if (idx.empty()) {
    result.theta = s.start;
    result.quasi_loglik = evaluate(s.start);
    result.evaluations = 1;
    return result;
  }
  auto objective = [&](std::span<const double> z) {
    try {
      return -evaluate(params_at(z));
    } catch (const Error& e) {
      log::debug(std::string("nlf: objective failed: ") + e.what());
      return std::numeric_limits<double>::infinity();
    }
  };
  std::vector<double> z0;
  for (std::size_t k : idx) z0.push_back(est0[k]);
  const auto fit = nelder_mead(objective, z0, s.optimizer);
  result.theta = params_at(fit.x);
  result.quasi_loglik = -fit.value;
  result.status = fit.status;
  result.evaluations = fit.evaluations;
  return result;
}

}  // namespace pompkit
