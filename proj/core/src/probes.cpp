#include "pompkit/probes.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>

#include "pompkit/error.hpp"
#include "pompkit/log.hpp"
#include "pompkit/parallel.hpp"
#include "pompkit/simulate.hpp"

namespace pompkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> extract(const RowMatrix& y, const std::vector<std::string>& observables, const std::string& var,
                            const SeriesTransform& transform) {
  const auto it = std::find(observables.begin(), observables.end(), var);
  if (it == observables.end()) throw Error(ErrorKind::Lookup, "probe variable '" + var + "' is not an observable");
  const auto col = static_cast<Eigen::Index>(it - observables.begin());
  std::vector<double> out(static_cast<std::size_t>(y.rows()));
  for (Eigen::Index n = 0; n < y.rows(); ++n) {
    const double v = y(n, col);
    out[static_cast<std::size_t>(n)] = transform ? transform(v) : v;
  }
  if (out.empty()) throw Error(ErrorKind::Domain, "probe on an empty series");
  for (double v : out)
    if (std::isnan(v)) throw Error(ErrorKind::Domain, "probe series for '" + var + "' contains missing values");
  return out;
}

double mean_of(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

void center(std::vector<double>& x) {
  const double m = mean_of(x);
  for (double& v : x) v -= m;
}

Eigen::VectorXd min_norm_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const char* who) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
  if (cod.rank() < X.cols()) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) log::warn(std::string(who) + ": rank-deficient design; using the minimum-norm solution");
  }
  return cod.solve(y);
}

}  // namespace

Probe probe_mean(const std::string& var, SeriesTransform transform) {
  Probe p;
  p.names = {"mean." + var};
  p.apply = [var, transform](const RowMatrix& y, const std::vector<std::string>& obs, std::span<double> out) {
    out[0] = mean_of(extract(y, obs, var, transform));
  };
  return p;
}

Probe probe_acf(const std::string& var, std::vector<int> lags, SeriesTransform transform, AcfType type) {
  Probe p;
  for (int lag : lags) {
    if (lag < 0) throw Error(ErrorKind::Domain, "probe_acf: lags must be non-negative");
    p.names.push_back("acf." + std::to_string(lag) + "." + var);
  }
  p.apply = [var, lags, transform, type](const RowMatrix& y, const std::vector<std::string>& obs,
                                         std::span<double> out) {
    auto x = extract(y, obs, var, transform);
    center(x);
    const std::size_t N = x.size();
    auto acov = [&](std::size_t lag) {
      double s = 0;
      for (std::size_t t = 0; t + lag < N; ++t) s += x[t] * x[t + lag];
      return s / static_cast<double>(N);
    };
    const double c0 = type == AcfType::Correlation ? acov(0) : 1.0;
    for (std::size_t k = 0; k < lags.size(); ++k) {
      const auto lag = static_cast<std::size_t>(lags[k]);
      if (lag >= N) throw Error(ErrorKind::Domain, "probe_acf: lag " + std::to_string(lag) + " is not below the series length");
      out[k] = acov(lag) / c0;
    }
  };
  return p;
}

Probe probe_nlar(const std::string& var, std::vector<int> lags, std::vector<int> powers, SeriesTransform transform,
                 bool centre) {
  if (lags.empty() || lags.size() != powers.size())
    throw Error(ErrorKind::Domain, "probe_nlar: lags and powers must be non-empty and of equal length");
  Probe p;
  for (std::size_t k = 0; k < lags.size(); ++k) {
    if (lags[k] < 1) throw Error(ErrorKind::Domain, "probe_nlar: lags must be at least 1");
    if (powers[k] < 1) throw Error(ErrorKind::Domain, "probe_nlar: powers must be at least 1");
    p.names.push_back("nlar." + std::to_string(lags[k]) + "^" + std::to_string(powers[k]) + "." + var);
  }
  p.apply = [var, lags, powers, transform, centre](const RowMatrix& y, const std::vector<std::string>& obs,
                                                   std::span<double> out) {
    auto x = extract(y, obs, var, transform);
    if (centre) center(x);
    const auto maxlag = static_cast<std::size_t>(*std::max_element(lags.begin(), lags.end()));
    if (x.size() <= maxlag + lags.size())
      throw Error(ErrorKind::Domain, "probe_nlar: series too short for the requested lags");
    const auto rows = static_cast<Eigen::Index>(x.size() - maxlag);
    Eigen::MatrixXd X(rows, static_cast<Eigen::Index>(lags.size()));
    Eigen::VectorXd r(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const std::size_t t = maxlag + static_cast<std::size_t>(i);
      r(i) = x[t];
      for (std::size_t k = 0; k < lags.size(); ++k)
        X(i, static_cast<Eigen::Index>(k)) = std::pow(x[t - static_cast<std::size_t>(lags[k])], powers[k]);
    }
    const Eigen::VectorXd beta = min_norm_solve(X, r, "probe_nlar");
    for (std::size_t k = 0; k < lags.size(); ++k) out[k] = beta(static_cast<Eigen::Index>(k));
  };
  return p;
}

Probe probe_marginal(const std::string& var, std::vector<double> ref, int npoly, SeriesTransform transform) {
  if (ref.empty()) throw Error(ErrorKind::Domain, "probe_marginal: reference sample is empty");
  if (npoly < 1) throw Error(ErrorKind::Domain, "probe_marginal: npoly must be at least 1");
  if (transform)
    for (double& v : ref) v = transform(v);
  for (double v : ref)
    if (!std::isfinite(v)) throw Error(ErrorKind::Domain, "probe_marginal: reference sample must be finite");
  std::sort(ref.begin(), ref.end());
  center(ref);
  if (ref.front() == ref.back()) throw Error(ErrorKind::Domain, "probe_marginal: reference sample has zero variance");

  Probe p;
  for (int k = 1; k <= npoly; ++k) p.names.push_back("marg." + std::to_string(k) + "." + var);
  p.apply = [var, ref, npoly, transform](const RowMatrix& y, const std::vector<std::string>& obs,
                                         std::span<double> out) {
    auto x = extract(y, obs, var, transform);
    std::sort(x.begin(), x.end());
    center(x);
    const std::size_t N = x.size(), R = ref.size();
    if (N < static_cast<std::size_t>(npoly) + 1)
      throw Error(ErrorKind::Domain, "probe_marginal: series shorter than the number of coefficients");
    Eigen::MatrixXd X(static_cast<Eigen::Index>(N), npoly);
    for (std::size_t i = 0; i < N; ++i) {
      double z;
      if (N == R) {
        z = ref[i];
      } else {
        const double pos = static_cast<double>(i) * static_cast<double>(R - 1) / static_cast<double>(N - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, R - 1);
        z = ref[lo] + (pos - static_cast<double>(lo)) * (ref[hi] - ref[lo]);
      }
      double power = 1;
      for (int k = 0; k < npoly; ++k) {
        power *= z;
        X(static_cast<Eigen::Index>(i), k) = power;
      }
    }
    const Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(N));
    const Eigen::VectorXd beta = min_norm_solve(X, r, "probe_marginal");
    for (int k = 0; k < npoly; ++k) out[static_cast<std::size_t>(k)] = beta(k);
  };
  return p;
}

std::vector<std::string> probe_names(const std::vector<Probe>& probes) {
  std::vector<std::string> names;
  for (const auto& p : probes) names.insert(names.end(), p.names.begin(), p.names.end());
  return names;
}

std::vector<double> apply_probes(const std::vector<Probe>& probes, const RowMatrix& y,
                                 const std::vector<std::string>& observables) {
  std::size_t d = 0;
  for (const auto& p : probes) d += p.arity();
  std::vector<double> out(d);
  std::size_t offset = 0;
  for (const auto& p : probes) {
    p.apply(y, observables, std::span(out).subspan(offset, p.arity()));
    offset += p.arity();
  }
  return out;
}

double synth_loglik(const RowMatrix& sim, std::span<const double> observed, const std::vector<std::string>& names) {
  const auto J = sim.rows();
  const auto d = sim.cols();
  if (static_cast<Eigen::Index>(observed.size()) != d)
    throw Error(ErrorKind::Domain, "synth_loglik: observed probe vector has the wrong length");
  if (J <= d)
    throw Error(ErrorKind::Domain, "synth_loglik: need more simulations (" + std::to_string(J) + ") than probes (" +
                                       std::to_string(d) + ")");
  for (double v : observed)
    if (!std::isfinite(v)) throw Error(ErrorKind::Domain, "synth_loglik: observed probes must be finite");
  if (!sim.allFinite()) throw Error(ErrorKind::Domain, "synth_loglik: simulated probes must be finite");

  const Eigen::RowVectorXd mu = sim.colwise().mean();
  const Eigen::MatrixXd centred = sim.rowwise() - mu;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(centred);
  qr.setThreshold(1e-10);
  auto label = [&](Eigen::Index k) {
    return static_cast<std::size_t>(k) < names.size() ? names[static_cast<std::size_t>(k)] : "probe " + std::to_string(k + 1);
  };
  if (qr.rank() < d) {
    std::string involved;
    // The pivoted columns beyond the rank are linear combinations of the others.
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < d; ++k) involved += (involved.empty() ? "" : ", ") + label(perm(k));
    throw Error(ErrorKind::SingularMatrix,
                "synth_loglik: probe covariance is singular; linearly dependent probes: " + involved);
  }
  const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(J - 1);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::SingularMatrix, "synth_loglik: probe covariance is not positive definite");
  Eigen::VectorXd resid(d);
  for (Eigen::Index k = 0; k < d; ++k) resid(k) = observed[static_cast<std::size_t>(k)] - mu(k);
  const Eigen::VectorXd z = llt.matrixL().solve(resid);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * z.squaredNorm() - 0.5 * logdet - 0.5 * static_cast<double>(d) * std::log(2 * std::numbers::pi);
}

double probe_p_value(double observed, std::span<const double> simulated) {
  std::size_t below = 0, above = 0;
  for (double s : simulated) {
    if (s < observed) ++below;
    if (s > observed) ++above;
  }
  const double J = static_cast<double>(simulated.size());
  const double extreme = static_cast<double>(std::min(below, above) + 1);
  return std::min(1.0, 2.0 * extreme / (J + 1.0));
}

RowMatrix simulate_probes(const ModelSpec& model, std::span<const double> theta, const std::vector<Probe>& probes,
                          std::size_t nsim, Rng& rng) {
  require(model, Component::RProcess, "probe");
  require(model, Component::RMeasure, "probe");
  std::size_t d = 0;
  for (const auto& p : probes) d += p.arity();
  RowMatrix out(static_cast<Eigen::Index>(nsim), static_cast<Eigen::Index>(d));
  const Rng base = rng.split();
  parallel_for(
      nsim,
      [&](std::size_t i) {
        Rng stream = base.substream(i);
        const auto y = simulate_observations(model, theta, model.data.t0, model.data.times, stream);
        const auto v = apply_probes(probes, y, model.observable_names);
        std::copy(v.begin(), v.end(), row_span(out, static_cast<Eigen::Index>(i)).begin());
      },
      8);
  return out;
}

ProbeResult probe(const ModelSpec& model, const ParamVector& params, const std::vector<Probe>& probes,
                  std::size_t nsim, Rng& rng) {
  ProbeResult r;
  r.names = probe_names(probes);
  r.observed = apply_probes(probes, model.data.observations, model.data.names);
  r.simulated = simulate_probes(model, model.dense(params), probes, nsim, rng);
  r.synth_loglik = synth_loglik(r.simulated, r.observed, r.names);
  const auto d = r.simulated.cols();
  r.p_values.resize(static_cast<std::size_t>(d));
  for (Eigen::Index k = 0; k < d; ++k) {
    const Eigen::VectorXd col = r.simulated.col(k);
    r.p_values[static_cast<std::size_t>(k)] =
        probe_p_value(r.observed[static_cast<std::size_t>(k)], std::span(col.data(), static_cast<std::size_t>(col.size())));
  }
  const Eigen::MatrixXd centred = r.simulated.rowwise() - r.simulated.colwise().mean();
  const Eigen::MatrixXd cov = centred.transpose() * centred;
  r.correlations = RowMatrix(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) r.correlations(a, b) = cov(a, b) / std::sqrt(cov(a, a) * cov(b, b));
  return r;
}

void write_probe_csv(const std::string& path, const ProbeResult& r) {
  CsvTable t;
  t.header = {"sim"};
  t.header.insert(t.header.end(), r.names.begin(), r.names.end());
  std::vector<double> row{0.0};
  row.insert(row.end(), r.observed.begin(), r.observed.end());
  t.rows.push_back(row);
  for (Eigen::Index j = 0; j < r.simulated.rows(); ++j) {
    row.assign(1, static_cast<double>(j + 1));
    const auto v = row_span(r.simulated, j);
    row.insert(row.end(), v.begin(), v.end());
    t.rows.push_back(row);
  }
  write_csv(path, t);
}

ProbeMatchResult probe_match(const ModelSpec& model, const ParamVector& start, const std::vector<std::string>& est,
                             const std::vector<Probe>& probes, std::size_t nsim, Rng& rng,
                             const NelderMeadOptions& options, bool transform) {
  if (transform && !model.has_transform())
    throw Error(ErrorKind::MissingComponent, "probe_match: transform requested but the model registers no transform");
  const auto names = probe_names(probes);
  const auto observed = apply_probes(probes, model.data.observations, model.data.names);
  const Rng fixed = rng.split();
  const std::vector<double> theta0 = model.dense(start);
  const auto to_est = [&](std::span<const double> v) {
    return transform ? transform_dense(model, v, TransformDirection::ToEstimation) : std::vector<double>(v.begin(), v.end());
  };
  const auto from_est = [&](std::span<const double> v) {
    return transform ? transform_dense(model, v, TransformDirection::FromEstimation)
                     : std::vector<double>(v.begin(), v.end());
  };
  std::vector<std::size_t> idx;
  for (const auto& name : est) idx.push_back(model.param_index(name));
  const std::vector<double> est0 = to_est(theta0);

  auto natural_at = [&](std::span<const double> z) {
    std::vector<double> e = est0;
    for (std::size_t k = 0; k < idx.size(); ++k) e[idx[k]] = z[k];
    auto nat = from_est(e);
    // Parameters not being estimated keep their exact starting values.
    std::vector<double> out = theta0;
    for (std::size_t k : idx) out[k] = nat[k];
    return out;
  };
  auto evaluate = [&](std::span<const double> theta) {
    Rng r = fixed;
    const auto sim = simulate_probes(model, theta, probes, nsim, r);
    return synth_loglik(sim, observed, names);
  };

  ProbeMatchResult result;
  if (idx.empty()) {
    result.theta = start;
    result.synth_loglik = evaluate(theta0);
    result.evaluations = 1;
    return result;
  }
  auto objective = [&](std::span<const double> z) {
    try {
      return -evaluate(natural_at(z));
    } catch (const Error& e) {
      log::debug(std::string("probe_match: objective failed: ") + e.what());
      return kInf;
    }
  };
  std::vector<double> z0;
  for (std::size_t k : idx) z0.push_back(est0[k]);
  const auto fit = nelder_mead(objective, z0, options);
  const auto theta = natural_at(fit.x);
  result.theta = start;
  for (std::size_t k : idx) result.theta.set(model.param_names[k], theta[k]);
  result.synth_loglik = -fit.value;
  result.status = fit.status;
  result.evaluations = fit.evaluations;
  return result;
}

}  // namespace pompkit
