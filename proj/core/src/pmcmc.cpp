#include "pompkit/pmcmc.hpp"

#include <cmath>
#include <limits>

#include "pompkit/error.hpp"
#include "pompkit/log.hpp"

namespace pompkit {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::vector<double> Proposal::scales(const ModelSpec& model) const {
  std::vector<double> out(model.param_dim(), 0.0);
  for (std::size_t k = 0; k < sd.size(); ++k) {
    const double v = sd.value(k);
    if (!(v >= 0) || !std::isfinite(v))
      throw Error(ErrorKind::Domain, "proposal sd for " + sd.name(k) + " must be finite and non-negative");
    out[model.param_index(sd.name(k))] = v;
  }
  return out;
}

std::vector<double> Chain::column(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) {
      std::vector<double> out(size());
      for (std::size_t m = 0; m < size(); ++m) out[m] = samples(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i));
      return out;
    }
  throw Error(ErrorKind::Lookup, "chain has no parameter '" + name + "'");
}

void write_chain_csv(const std::string& path, const Chain& chain) {
  CsvTable table;
  table.header = chain.names;
  table.header.insert(table.header.end(), {"loglik", "logprior", "accepted"});
  if (chain.distances) table.header.push_back("distance");
  for (std::size_t m = 0; m < chain.size(); ++m) {
    const auto row = row_span(chain.samples, static_cast<Eigen::Index>(m));
    std::vector<double> out(row.begin(), row.end());
    out.push_back(chain.logliks[m]);
    out.push_back(chain.log_priors[m]);
    out.push_back(chain.accepted[m] ? 1.0 : 0.0);
    if (chain.distances) out.push_back((*chain.distances)[m]);
    table.rows.push_back(std::move(out));
  }
  write_csv(path, table);
}

Chain pmcmc(const ModelSpec& model, const ParamVector& start, std::size_t M, std::size_t J, const Proposal& proposal,
            Rng& rng, const PfilterOptions& filter_options) {
  require(model, Component::DPrior, "pmcmc");
  require(model, Component::RProcess, "pmcmc");
  require(model, Component::DMeasure, "pmcmc");
  const std::size_t p = model.param_dim();
  const auto sd = proposal.scales(model);

  std::vector<double> theta = model.dense(start);
  double log_prior = model.dprior(theta);
  if (!(log_prior > kNegInf)) throw Error(ErrorKind::Domain, "pmcmc: the start point has zero prior density");

  Chain chain;
  chain.names = model.param_names;
  chain.samples = RowMatrix(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(p));
  chain.logliks.reserve(M);
  chain.log_priors.reserve(M);
  chain.accepted.reserve(M);

  Rng filter_rng = rng.split();
  Rng walk = rng.split();
  double loglik = pfilter(model, theta, J, filter_rng, filter_options).loglik;
  ++chain.likelihood_evaluations;

  std::vector<double> prop(p);
  std::size_t n_accepted = 0;
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t i = 0; i < p; ++i) prop[i] = sd[i] > 0 ? walk.normal(theta[i], sd[i]) : theta[i];
    const double prop_prior = model.dprior(prop);
    double prop_loglik = kNegInf;
    if (prop_prior > kNegInf) {
      ++chain.likelihood_evaluations;
      try {
        prop_loglik = pfilter(model, prop, J, filter_rng, filter_options).loglik;
      } catch (const FilteringFailure& e) {
        log::info(std::string("pmcmc: proposal rejected after filtering failure: ") + e.what());
      }
    }
    const double log_ratio = (prop_prior + prop_loglik) - (log_prior + loglik);
    const bool accept = prop_loglik > kNegInf && std::log(walk.uniform()) < log_ratio;
    if (accept) {
      theta = prop;
      log_prior = prop_prior;
      loglik = prop_loglik;
      ++n_accepted;
    }
    std::copy(theta.begin(), theta.end(), row_span(chain.samples, static_cast<Eigen::Index>(m)).begin());
    chain.logliks.push_back(loglik);
    chain.log_priors.push_back(log_prior);
    chain.accepted.push_back(accept ? 1 : 0);
  }
  chain.acceptance_rate = M > 0 ? static_cast<double>(n_accepted) / static_cast<double>(M) : 0.0;
  return chain;
}

ChainEss effective_sample_size_chain(std::span<const double> x) {
  const std::size_t N = x.size();
  if (N < 10) throw Error(ErrorKind::Domain, "effective_sample_size_chain needs at least 10 samples");
  double mean = 0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(N);
  auto acov = [&](std::size_t lag) {
    double s = 0;
    for (std::size_t t = 0; t + lag < N; ++t) s += (x[t] - mean) * (x[t + lag] - mean);
    return s / static_cast<double>(N);
  };
  const double c0 = acov(0);
  if (!(c0 > 0)) return {1.0, false};
  double pair_sum = 0;
  for (std::size_t k = 0; 2 * k + 1 < N; ++k) {
    const double gamma = (acov(2 * k) + acov(2 * k + 1)) / c0;
    if (gamma <= 0) break;
    pair_sum += gamma;
  }
  const double tau = -1.0 + 2.0 * pair_sum;
  const double n = static_cast<double>(N);
  if (!(tau > 0) || n / tau > n) return {n, true};
  return {n / tau, false};
}

}  // namespace pompkit
