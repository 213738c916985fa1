#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pompkit/model.hpp"

namespace pompkit {

/// One realisation of the process and its measurements.
struct SimulationRecord {
  double t0 = 0.0;
  std::vector<double> times;  // t_1..t_N
  RowMatrix states;           // (N+1) x q, row 0 is the state at t0
  RowMatrix observations;     // N x r
  ParamVector params;

  /// The observations packaged as a dataset for the model's observables.
  TimeSeriesData as_data(const std::vector<std::string>& observable_names) const;
};

/// Draws nsim independent realisations at the model's data times. Simulation
/// i uses rng.substream(i) of a single split of `rng`, so the output depends
/// only on (seed, nsim), never on the thread count.
std::vector<SimulationRecord> simulate(const ModelSpec& model, const ParamVector& params, Rng& rng,
                                       std::size_t nsim = 1);

/// Single realisation at arbitrary times with dense parameters.
SimulationRecord simulate_at(const ModelSpec& model, std::span<const double> theta, double t0,
                             const std::vector<double>& times, Rng& rng);

/// Observations only (N x r); cheaper entry point for probe and ABC loops.
RowMatrix simulate_observations(const ModelSpec& model, std::span<const double> theta, double t0,
                                const std::vector<double>& times, Rng& rng);

/// A copy of the model whose data are replaced by a simulated realisation and
/// whose stored parameters are those used to simulate.
ModelSpec with_simulated_data(const ModelSpec& model, const ParamVector& params, Rng& rng);

}  // namespace pompkit
