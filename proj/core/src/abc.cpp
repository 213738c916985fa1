#include "pompkit/abc.hpp"

#include <cmath>
#include <limits>

#include "pompkit/error.hpp"
#include "pompkit/simulate.hpp"

namespace pompkit {

Chain abc(const ModelSpec& model, const ParamVector& start, const AbcSettings& s, Rng& rng) {
  require(model, Component::DPrior, "abc");
  require(model, Component::RProcess, "abc");
  require(model, Component::RMeasure, "abc");
  const auto names = probe_names(s.probes);
  const std::size_t d = names.size();
  if (s.scale.size() != d)
    throw Error(ErrorKind::Domain, "abc: expected " + std::to_string(d) + " probe scales, got " + std::to_string(s.scale.size()));
  for (double v : s.scale)
    if (!(v > 0) || !std::isfinite(v)) throw Error(ErrorKind::Domain, "abc: probe scales must be positive and finite");
  if (!(s.epsilon >= 0)) throw Error(ErrorKind::Domain, "abc: epsilon must be non-negative");

  const std::size_t p = model.param_dim();
  const auto sd = s.proposal.scales(model);
  const auto observed = apply_probes(s.probes, model.data.observations, model.data.names);
  std::vector<double> theta = model.dense(start);
  double log_prior = model.dprior(theta);
  if (!(log_prior > -std::numeric_limits<double>::infinity()))
    throw Error(ErrorKind::Domain, "abc: the start point has zero prior density");
  const double eps2 = s.epsilon * s.epsilon;

  Chain chain;
  chain.names = model.param_names;
  chain.samples = RowMatrix(static_cast<Eigen::Index>(s.M), static_cast<Eigen::Index>(p));
  chain.distances.emplace();
  chain.distances->reserve(s.M);
  const Rng sims = rng.split();
  Rng walk = rng.split();

  std::vector<double> prop(p);
  std::size_t n_accepted = 0;
  for (std::size_t m = 0; m < s.M; ++m) {
    for (std::size_t i = 0; i < p; ++i) prop[i] = sd[i] > 0 ? walk.normal(theta[i], sd[i]) : theta[i];
    const double prop_prior = model.dprior(prop);
    double dist2 = std::numeric_limits<double>::quiet_NaN();
    bool accept = false;
    if (prop_prior > -std::numeric_limits<double>::infinity()) {
      Rng stream = sims.substream(m);
      const auto y = simulate_observations(model, prop, model.data.t0, model.data.times, stream);
      const auto v = apply_probes(s.probes, y, model.observable_names);
      ++chain.likelihood_evaluations;
      dist2 = 0;
      for (std::size_t k = 0; k < d; ++k) {
        const double z = (v[k] - observed[k]) / s.scale[k];
        dist2 += z * z;
      }
      accept = dist2 < eps2 && std::log(walk.uniform()) < prop_prior - log_prior;
    }
    if (accept) {
      theta = prop;
      log_prior = prop_prior;
      ++n_accepted;
    }
    std::copy(theta.begin(), theta.end(), row_span(chain.samples, static_cast<Eigen::Index>(m)).begin());
    chain.logliks.push_back(std::numeric_limits<double>::quiet_NaN());
    chain.log_priors.push_back(log_prior);
    chain.accepted.push_back(accept ? 1 : 0);
    chain.distances->push_back(dist2);
  }
  chain.acceptance_rate = s.M > 0 ? static_cast<double>(n_accepted) / static_cast<double>(s.M) : 0.0;
  return chain;
}

std::vector<double> compute_probe_scales(const ModelSpec& model, const ParamVector& params,
                                         const std::vector<Probe>& probes, std::size_t nsim, Rng& rng) {
  if (nsim < 2) throw Error(ErrorKind::Domain, "compute_probe_scales needs at least two simulations");
  const auto names = probe_names(probes);
  const auto sim = simulate_probes(model, model.dense(params), probes, nsim, rng);
  std::vector<double> out(static_cast<std::size_t>(sim.cols()));
  for (Eigen::Index k = 0; k < sim.cols(); ++k) {
    const double mean = sim.col(k).mean();
    const double ss = (sim.col(k).array() - mean).square().sum();
    const double sdv = std::sqrt(ss / static_cast<double>(nsim - 1));
    if (!(sdv > 0))
      throw Error(ErrorKind::Domain, "compute_probe_scales: probe '" + names[static_cast<std::size_t>(k)] +
                                         "' has zero variance across simulations");
    out[static_cast<std::size_t>(k)] = sdv;
  }
  return out;
}

}  // namespace pompkit
