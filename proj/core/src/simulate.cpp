#include "pompkit/simulate.hpp"

#include <cmath>
#include <sstream>

#include "pompkit/error.hpp"
#include "pompkit/parallel.hpp"

namespace pompkit {

namespace {

void check_finite(const ModelSpec& model, std::span<const double> x, double t) {
  for (std::size_t s = 0; s < x.size(); ++s)
    if (!std::isfinite(x[s])) {
      std::ostringstream m;
      m << "model '" << model.name << "': state '" << model.state_names[s] << "' became " << x[s] << " at t=" << t;
      throw Error(ErrorKind::SimulationDiverged, m.str());
    }
}

template <class OnInit, class OnStep>
void run_trajectory(const ModelSpec& model, std::span<const double> theta, double t0, const std::vector<double>& times,
                    Rng& rng, const Initializer& init, const std::vector<std::size_t>& accum, std::span<double> x,
                    std::span<double> y, OnInit&& on_init, OnStep&& on_step) {
  Rng process = rng.split();
  Rng measure = rng.split();
  init(x, theta, t0, process, model.covariates);
  check_finite(model, x, t0);
  on_init(x);
  double t = t0;
  for (std::size_t n = 0; n < times.size(); ++n) {
    model.rprocess(x, theta, t, times[n], process, model.covariates);
    check_finite(model, x, times[n]);
    model.rmeasure(y, x, theta, times[n], measure, model.covariates);
    on_step(n, x, y);
    for (auto a : accum) x[a] = 0.0;
    t = times[n];
  }
}

void check_components(const ModelSpec& model) {
  require(model, Component::RProcess, "simulate");
  require(model, Component::RMeasure, "simulate");
  require(model, Component::Initializer, "simulate");
}

}  // namespace

TimeSeriesData SimulationRecord::as_data(const std::vector<std::string>& observable_names) const {
  TimeSeriesData d;
  d.t0 = t0;
  d.times = times;
  d.names = observable_names;
  d.observations = observations;
  d.validate();
  return d;
}

SimulationRecord simulate_at(const ModelSpec& model, std::span<const double> theta, double t0,
                             const std::vector<double>& times, Rng& rng) {
  check_components(model);
  const auto init = resolved_initializer(model);
  const auto accum = model.accumulator_indices();
  SimulationRecord rec;
  rec.t0 = t0;
  rec.times = times;
  rec.params = model.named(theta);
  const auto N = static_cast<Eigen::Index>(times.size());
  rec.states.resize(N + 1, static_cast<Eigen::Index>(model.state_dim()));
  rec.observations.resize(N, static_cast<Eigen::Index>(model.obs_dim()));
  std::vector<double> x(model.state_dim()), y(model.obs_dim());
  run_trajectory(
      model, theta, t0, times, rng, init, accum, x, y,
      [&](std::span<const double> xs) { std::copy(xs.begin(), xs.end(), row_span(rec.states, 0).begin()); },
      [&](std::size_t n, std::span<const double> xs, std::span<const double> ys) {
                   const auto i = static_cast<Eigen::Index>(n);
                   std::copy(xs.begin(), xs.end(), row_span(rec.states, i + 1).begin());
                   std::copy(ys.begin(), ys.end(), row_span(rec.observations, i).begin());
                 });
  return rec;
}

RowMatrix simulate_observations(const ModelSpec& model, std::span<const double> theta, double t0,
                                const std::vector<double>& times, Rng& rng) {
  check_components(model);
  const auto init = resolved_initializer(model);
  const auto accum = model.accumulator_indices();
  RowMatrix obs(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(model.obs_dim()));
  std::vector<double> x(model.state_dim()), y(model.obs_dim());
  run_trajectory(model, theta, t0, times, rng, init, accum, x, y, [](std::span<const double>) {},
                 [&](std::size_t n, std::span<const double>, std::span<const double> ys) {
                   std::copy(ys.begin(), ys.end(), row_span(obs, static_cast<Eigen::Index>(n)).begin());
                 });
  return obs;
}

std::vector<SimulationRecord> simulate(const ModelSpec& model, const ParamVector& params, Rng& rng,
                                       std::size_t nsim) {
  check_components(model);
  const auto theta = model.dense(params);
  const Rng base = rng.split();
  std::vector<SimulationRecord> out(nsim);
  parallel_for(
      nsim,
      [&](std::size_t i) {
        Rng stream = base.substream(i);
        out[i] = simulate_at(model, theta, model.data.t0, model.data.times, stream);
        out[i].params = params;
      },
      1);
  return out;
}

ModelSpec with_simulated_data(const ModelSpec& model, const ParamVector& params, Rng& rng) {
  auto sims = simulate(model, params, rng, 1);
  ModelSpec out = model;
  out.data = sims.front().as_data(model.observable_names);
  out.params = params;
  return out;
}

}  // namespace pompkit
