#pragma once

#include <vector>

#include "pompkit/pmcmc.hpp"
#include "pompkit/probes.hpp"

namespace pompkit {

struct AbcSettings {
  std::vector<Probe> probes;
  /// Positive scale per probe value.
  std::vector<double> scale;
  double epsilon = 2.0;
  Proposal proposal;
  std::size_t M = 1000;
};

/// ABC-MCMC: one simulated dataset per proposal; the proposal is accepted
/// when sum(((s - s*) / scale)^2) < epsilon^2 and a uniform draw falls below
/// the prior ratio. `distances` holds each proposal's scaled squared distance
/// (NaN when the proposal had zero prior density and was not simulated).
Chain abc(const ModelSpec& model, const ParamVector& start, const AbcSettings& settings, Rng& rng);

/// Standard deviation of each probe value over `nsim` simulations.
std::vector<double> compute_probe_scales(const ModelSpec& model, const ParamVector& params,
                                         const std::vector<Probe>& probes, std::size_t nsim, Rng& rng);

}  // namespace pompkit
