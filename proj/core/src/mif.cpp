#include "pompkit/mif.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pompkit/error.hpp"
#include "pompkit/log.hpp"
#include "pompkit/parallel.hpp"

namespace pompkit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

enum class Role { Fixed, Regular, Ivp };

struct Layout {
  std::vector<Role> role;
  std::vector<double> sd;
};

Layout layout(const ModelSpec& model, const MifSettings& s) {
  Layout out;
  const std::size_t p = model.param_dim();
  out.role.assign(p, Role::Fixed);
  out.sd.assign(p, 0.0);
  for (std::size_t k = 0; k < s.rw_sd.size(); ++k) {
    const double v = s.rw_sd.value(k);
    if (!(v >= 0) || !std::isfinite(v))
      throw Error(ErrorKind::Domain, "mif: rw_sd for " + s.rw_sd.name(k) + " must be finite and non-negative");
    const std::size_t i = model.param_index(s.rw_sd.name(k));
    out.sd[i] = v;
    if (v > 0) out.role[i] = Role::Regular;
  }
  for (const auto& name : s.ivp_names) {
    const std::size_t i = model.param_index(name);
    if (out.sd[i] > 0) out.role[i] = Role::Ivp;
  }
  return out;
}

}  // namespace

double mif_cooling_factor(const MifSettings& s) {
  double a;
  if (s.cooling_factor) {
    a = *s.cooling_factor;
  } else {
    if (!(s.cooling_fraction > 0 && s.cooling_fraction <= 1))
      throw Error(ErrorKind::Domain, "mif: cooling_fraction must lie in (0, 1]");
    if (s.cooling_window < 2) throw Error(ErrorKind::Domain, "mif: cooling_window must be at least 2");
    a = std::pow(s.cooling_fraction, 1.0 / static_cast<double>(s.cooling_window - 1));
  }
  if (!(a > 0 && a <= 1)) throw Error(ErrorKind::Domain, "mif: cooling factor must lie in (0, 1]");
  return a;
}

double mif_cooling_multiplier(const MifSettings& s, std::size_t m) {
  if (m < 1) throw Error(ErrorKind::Domain, "mif: iterations are numbered from 1");
  return std::pow(mif_cooling_factor(s), static_cast<double>(m - 1));
}

MifResult mif(const ModelSpec& model, const MifSettings& s, Rng& rng) {
  require(model, Component::RProcess, "mif");
  require(model, Component::DMeasure, "mif");
  if (s.J < 1) throw Error(ErrorKind::Domain, "mif needs at least one particle");
  if (!(s.var_factor > 0)) throw Error(ErrorKind::Domain, "mif: var_factor must be positive");
  if (s.transform && !model.has_transform())
    throw Error(ErrorKind::MissingComponent, "mif: transform requested but the model registers no transform");

  const auto& data = model.data;
  const std::size_t N = data.size();
  const std::size_t p = model.param_dim();
  const std::size_t q = model.state_dim();
  const std::size_t J = s.J;
  const std::size_t L = s.ic_lag.value_or(std::min<std::size_t>(N, 20));
  if (L > N) throw Error(ErrorKind::Domain, "mif: ic_lag exceeds the number of observations");
  const auto lay = layout(model, s);
  const bool has_ivp = std::find(lay.role.begin(), lay.role.end(), Role::Ivp) != lay.role.end();
  if (has_ivp && L < 1) throw Error(ErrorKind::Domain, "mif: ic_lag must be at least 1 when IVPs are estimated");

  const auto init = resolved_initializer(model);
  const auto accum = model.accumulator_indices();
  const double a = mif_cooling_factor(s);
  const double C = s.var_factor;
  const auto direction = [&](TransformDirection d, std::span<const double> v) {
    return s.transform ? transform_dense(model, v, d) : std::vector<double>(v.begin(), v.end());
  };

  const std::vector<double> theta0 = model.dense(s.start);
  std::vector<double> theta = direction(TransformDirection::ToEstimation, theta0);

  // Natural-scale parameters with fixed entries restored bit-exactly.
  auto natural = [&](std::span<const double> est, std::span<double> out) {
    if (s.transform) {
      const auto v = transform_dense(model, est, TransformDirection::FromEstimation);
      std::copy(v.begin(), v.end(), out.begin());
    } else {
      std::copy(est.begin(), est.end(), out.begin());
    }
    for (std::size_t i = 0; i < p; ++i)
      if (lay.role[i] == Role::Fixed) out[i] = theta0[i];
  };

  MifResult result;
  result.cooling_factor = a;
  result.trace = RowMatrix(static_cast<Eigen::Index>(s.M), static_cast<Eigen::Index>(p));
  result.logliks.reserve(s.M);

  RowMatrix X(static_cast<Eigen::Index>(J), static_cast<Eigen::Index>(q)), Xs(X.rows(), X.cols());
  RowMatrix Th(static_cast<Eigen::Index>(J), static_cast<Eigen::Index>(p)), Ths(Th.rows(), Th.cols());
  RowMatrix Nat(Th.rows(), Th.cols());
  std::vector<double> log_w(J), w(J);

  for (std::size_t m = 1; m <= s.M; ++m) {
    const double cool = std::pow(a, static_cast<double>(m - 1));
    const Rng base = rng.split();

    parallel_for(J, [&](std::size_t j) {
      Rng stream = base.substream(0, j);
      auto th = row_span(Th, static_cast<Eigen::Index>(j));
      for (std::size_t i = 0; i < p; ++i)
        th[i] = lay.role[i] == Role::Fixed ? theta[i] : stream.normal(theta[i], C * cool * lay.sd[i]);
      auto nat = row_span(Nat, static_cast<Eigen::Index>(j));
      natural(th, nat);
      init(row_span(X, static_cast<Eigen::Index>(j)), nat, data.t0, stream, model.covariates);
    });

    std::vector<double> prev_mean = theta;
    std::vector<double> V(p), update(p, 0.0), mean(p);
    for (std::size_t i = 0; i < p; ++i) V[i] = (C * C + 1) * cool * cool * lay.sd[i] * lay.sd[i];
    const std::vector<double> V1 = V;
    std::vector<double> ivp_estimate = theta;

    FilterResult filter;
    filter.np = J;
    filter.cond_logliks.assign(N, 0.0);
    filter.ess.assign(N, 0.0);
    filter.filter_means = RowMatrix::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(q));

    double t = data.t0;
    for (std::size_t n = 0; n < N; ++n) {
      const double t_next = data.times[n];
      const auto y = data.row(n);
      parallel_for(J, [&](std::size_t j) {
        Rng stream = base.substream(1, n, j);
        auto th = row_span(Th, static_cast<Eigen::Index>(j));
        for (std::size_t i = 0; i < p; ++i)
          if (lay.role[i] == Role::Regular) th[i] = stream.normal(th[i], cool * lay.sd[i]);
        auto nat = row_span(Nat, static_cast<Eigen::Index>(j));
        natural(th, nat);
        auto x = row_span(X, static_cast<Eigen::Index>(j));
        model.rprocess(x, nat, t, t_next, stream, model.covariates);
        log_w[j] = log_measure_density(model, y, x, nat, t_next);
      });

      const double cond = normalize_log_weights(log_w, w);
      filter.cond_logliks[n] = cond;

      auto smean = row_span(filter.filter_means, static_cast<Eigen::Index>(n));
      std::fill(mean.begin(), mean.end(), 0.0);
      for (std::size_t j = 0; j < J; ++j) {
        const auto th = row_span(Th, static_cast<Eigen::Index>(j));
        const auto x = row_span(X, static_cast<Eigen::Index>(j));
        for (std::size_t i = 0; i < p; ++i) mean[i] += w[j] * th[i];
        for (std::size_t k = 0; k < q; ++k) smean[k] += w[j] * x[k];
      }
      for (std::size_t i = 0; i < p; ++i) {
        if (lay.role[i] != Role::Regular) continue;
        update[i] += (mean[i] - prev_mean[i]) / V[i];
        double var = 0;
        for (std::size_t j = 0; j < J; ++j) {
          const double d = Th(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) - mean[i];
          var += w[j] * d * d;
        }
        V[i] = cool * cool * lay.sd[i] * lay.sd[i] + var;
      }
      prev_mean = mean;

      if (cond == kNegInf) {
        ++filter.failures;
        if (filter.failures > s.max_fail)
          throw FilteringFailure(n + 1, "mif iteration " + std::to_string(m) + ": all particle weights are zero at observation " +
                                            std::to_string(n + 1) + " (t=" + format_number(t_next) + ")");
        log::debug("mif: tolerated filtering failure at observation " + std::to_string(n + 1));
      } else {
        filter.ess[n] = ess(w);
        Rng resample_rng = base.substream(2, n);
        const auto index = systematic_resample(w, resample_rng);
        for (std::size_t j = 0; j < J; ++j) {
          const auto k = static_cast<Eigen::Index>(index[j]);
          Xs.row(static_cast<Eigen::Index>(j)) = X.row(k);
          Ths.row(static_cast<Eigen::Index>(j)) = Th.row(k);
        }
        X.swap(Xs);
        Th.swap(Ths);
      }
      for (std::size_t j = 0; j < J; ++j)
        for (auto k : accum) X(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = 0.0;

      if (has_ivp && n + 1 == L) {
        for (std::size_t i = 0; i < p; ++i) {
          if (lay.role[i] != Role::Ivp) continue;
          double acc = 0;
          for (std::size_t j = 0; j < J; ++j) acc += Th(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
          ivp_estimate[i] = acc / static_cast<double>(J);
        }
      }
      t = t_next;
    }
    filter.loglik = std::accumulate(filter.cond_logliks.begin(), filter.cond_logliks.end(), 0.0);

    for (std::size_t i = 0; i < p; ++i) {
      if (lay.role[i] == Role::Regular) theta[i] += V1[i] * update[i];
      if (lay.role[i] == Role::Ivp) theta[i] = ivp_estimate[i];
    }
    std::vector<double> nat(p);
    natural(theta, nat);
    for (std::size_t i = 0; i < p; ++i)
      if (!std::isfinite(nat[i]))
        throw Error(ErrorKind::Domain, "mif: parameter " + model.param_names[i] + " became non-finite");
    std::copy(nat.begin(), nat.end(), row_span(result.trace, static_cast<Eigen::Index>(m - 1)).begin());
    result.logliks.push_back(filter.loglik);
    log::debug("mif iteration " + std::to_string(m) + ": loglik " + format_number(filter.loglik));
    result.final_filter = std::move(filter);
  }

  result.theta_hat = s.start;
  if (s.M == 0) return result;
  std::vector<double> final_nat(p);
  natural(theta, final_nat);
  for (std::size_t i = 0; i < p; ++i) result.theta_hat.set(model.param_names[i], final_nat[i]);
  return result;
}

}  // namespace pompkit
