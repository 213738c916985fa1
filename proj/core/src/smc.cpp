#include "pompkit/smc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pompkit/error.hpp"
#include "pompkit/log.hpp"
#include "pompkit/parallel.hpp"

namespace pompkit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> normalized(std::span<const double> weights, const char* who) {
  double total = 0;
  for (double w : weights) {
    if (!(w >= 0)) throw Error(ErrorKind::Domain, std::string(who) + ": weights must be non-negative");
    total += w;
  }
  if (!(total > 0)) throw Error(ErrorKind::Domain, std::string(who) + ": all weights are zero");
  std::vector<double> out(weights.begin(), weights.end());
  if (std::abs(total - 1.0) > 1e-9)
    for (double& w : out) w /= total;
  return out;
}

}  // namespace

std::vector<std::size_t> systematic_resample(std::span<const double> weights, double u1) {
  const auto w = normalized(weights, "systematic_resample");
  const std::size_t J = w.size();
  std::vector<std::size_t> index(J);
  double cumulative = w[0];
  std::size_t p = 0;
  const double step = 1.0 / static_cast<double>(J);
  for (std::size_t j = 0; j < J; ++j) {
    const double u = u1 + static_cast<double>(j) * step;
    while (u > cumulative && p + 1 < J) cumulative += w[++p];
    index[j] = p;
  }
  return index;
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights, Rng& rng) {
  if (weights.empty()) return {};
  return systematic_resample(weights, rng.uniform() / static_cast<double>(weights.size()));
}

double ess(std::span<const double> weights) {
  const auto w = normalized(weights, "ess");
  double ss = 0;
  for (double v : w) ss += v * v;
  return 1.0 / ss;
}

LogMeanExp logmeanexp(std::span<const double> values, bool with_se) {
  if (values.empty()) throw Error(ErrorKind::Domain, "logmeanexp of an empty vector");
  auto lme = [](std::span<const double> v, std::size_t skip) {
    double mx = kNegInf;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (i != skip) mx = std::max(mx, v[i]);
    if (mx == kNegInf || std::isinf(mx)) return mx;
    double s = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (i != skip) {
        s += std::exp(v[i] - mx);
        ++n;
      }
    return mx + std::log(s / static_cast<double>(n));
  };
  LogMeanExp out;
  out.value = lme(values, values.size());
  if (with_se && values.size() > 1) {
    const std::size_t n = values.size();
    std::vector<double> jack(n);
    for (std::size_t i = 0; i < n; ++i) jack[i] = lme(values, i);
    const double mean = std::accumulate(jack.begin(), jack.end(), 0.0) / static_cast<double>(n);
    double ss = 0;
    for (double v : jack) ss += (v - mean) * (v - mean);
    out.se = std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n) * ss);
  }
  return out;
}

double normalize_log_weights(std::span<const double> log_weights, std::span<double> weights) {
  const std::size_t J = log_weights.size();
  double mx = kNegInf;
  for (double lw : log_weights)
    if (lw > mx) mx = lw;
  if (mx == kNegInf || std::isnan(mx)) {
    std::fill(weights.begin(), weights.end(), 1.0 / static_cast<double>(J));
    return kNegInf;
  }
  if (std::isinf(mx)) throw Error(ErrorKind::Domain, "log weight of +inf (degenerate measurement density)");
  double total = 0;
  for (std::size_t j = 0; j < J; ++j) {
    weights[j] = std::exp(log_weights[j] - mx);
    total += weights[j];
  }
  for (double& w : weights) w /= total;
  return mx + std::log(total / static_cast<double>(J));
}

FilterResult pfilter(const ModelSpec& model, const ParamVector& params, std::size_t np, Rng& rng,
                     const PfilterOptions& options) {
  const auto theta = model.dense(params);
  return pfilter(model, theta, np, rng, options);
}

FilterResult pfilter(const ModelSpec& model, std::span<const double> theta, std::size_t np, Rng& rng,
                     const PfilterOptions& options) {
  require(model, Component::RProcess, "pfilter");
  require(model, Component::DMeasure, "pfilter");
  if (np < 1) throw Error(ErrorKind::Domain, "pfilter needs at least one particle");
  const auto init = resolved_initializer(model);
  const auto accum = model.accumulator_indices();
  const auto& data = model.data;
  const std::size_t N = data.size();
  const std::size_t q = model.state_dim();
  const Rng base = rng.split();

  RowMatrix particles(static_cast<Eigen::Index>(np), static_cast<Eigen::Index>(q));
  RowMatrix scratch(particles.rows(), particles.cols());
  std::vector<double> log_w(np), w(np);

  parallel_for(np, [&](std::size_t j) {
    Rng stream = base.substream(0, j);
    init(row_span(particles, static_cast<Eigen::Index>(j)), theta, data.t0, stream, model.covariates);
  });

  FilterResult result;
  result.np = np;
  result.cond_logliks.assign(N, 0.0);
  result.ess.assign(N, 0.0);
  result.filter_means = RowMatrix::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(q));

  double t = data.t0;
  for (std::size_t n = 0; n < N; ++n) {
    const double t_next = data.times[n];
    const auto y = data.row(n);
    parallel_for(np, [&](std::size_t j) {
      Rng stream = base.substream(1, n, j);
      auto x = row_span(particles, static_cast<Eigen::Index>(j));
      model.rprocess(x, theta, t, t_next, stream, model.covariates);
      log_w[j] = log_measure_density(model, y, x, theta, t_next);
    });

    const double cond = normalize_log_weights(log_w, w);
    result.cond_logliks[n] = cond;

    auto means = row_span(result.filter_means, static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < np; ++j) {
      const auto x = row_span(particles, static_cast<Eigen::Index>(j));
      for (std::size_t s = 0; s < q; ++s) means[s] += w[j] * x[s];
    }

    if (cond == kNegInf) {
      ++result.failures;
      if (result.failures > options.max_fail)
        throw FilteringFailure(n + 1, "all particle weights are zero at observation " + std::to_string(n + 1) +
                                          " (t=" + format_number(t_next) + ")");
      log::debug("pfilter: tolerated filtering failure at observation " + std::to_string(n + 1));
    } else {
      result.ess[n] = ess(w);
      Rng resample_rng = base.substream(2, n);
      const auto index = systematic_resample(w, resample_rng);
      for (std::size_t j = 0; j < np; ++j)
        scratch.row(static_cast<Eigen::Index>(j)) = particles.row(static_cast<Eigen::Index>(index[j]));
      particles.swap(scratch);
    }
    for (std::size_t j = 0; j < np; ++j)
      for (auto a : accum) particles(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(a)) = 0.0;
    t = t_next;
  }
  result.loglik = std::accumulate(result.cond_logliks.begin(), result.cond_logliks.end(), 0.0);
  if (options.keep_particles) result.final_particles = particles;
  return result;
}

}  // namespace pompkit
