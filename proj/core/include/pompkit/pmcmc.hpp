#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pompkit/smc.hpp"

namespace pompkit {

/// Symmetric Gaussian random walk with independent components. Parameters
/// missing from `sd`, or with sd 0, are never moved.
struct Proposal {
  ParamVector sd;

  /// Dense per-parameter scales in model order.
  std::vector<double> scales(const ModelSpec& model) const;
};

struct Chain {
  std::vector<std::string> names;
  RowMatrix samples;  // M x p; row m-1 holds the state after step m
  std::vector<double> logliks;
  std::vector<double> log_priors;
  std::vector<char> accepted;
  double acceptance_rate = 0.0;
  /// ABC only: scaled squared distance of each step's simulated probes.
  std::optional<std::vector<double>> distances;
  /// Number of particle filters (PMMH) or simulations (ABC) run, including
  /// the one at the start point.
  std::size_t likelihood_evaluations = 0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(samples.rows()); }
  std::vector<double> column(const std::string& name) const;
};

/// Writes one row per step: parameters, loglik, logprior, accepted and, for
/// ABC chains, distance.
void write_chain_csv(const std::string& path, const Chain& chain);

/// Particle marginal Metropolis-Hastings. The incumbent's likelihood estimate
/// is carried between steps. Proposals with zero prior density are rejected
/// without filtering; a proposal whose filter fails is rejected.
Chain pmcmc(const ModelSpec& model, const ParamVector& start, std::size_t M, std::size_t J, const Proposal& proposal,
            Rng& rng, const PfilterOptions& filter_options = {});

struct ChainEss {
  double value = 0.0;
  /// True when the estimate exceeded the chain length and was capped.
  bool capped = false;
};

/// N / (1 + 2 sum rho_k) with Geyer's initial positive sequence truncation.
/// A constant chain has ESS 1.
ChainEss effective_sample_size_chain(std::span<const double> samples);

}  // namespace pompkit
