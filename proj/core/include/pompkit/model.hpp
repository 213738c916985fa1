#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pompkit/data.hpp"
#include "pompkit/params.hpp"
#include "pompkit/rng.hpp"

namespace pompkit {

// Model component callbacks. Parameters, states and observations are passed
// as dense spans in the order of the model's declared names. Callbacks must
// be pure given their inputs and the random stream.

/// Advance the state in place from t to t_next.
using ProcessSimulator = std::function<void(std::span<double> x, std::span<const double> theta, double t,
                                            double t_next, Rng& rng, const CovariateTable& covariates)>;
/// One elementary step of length dt starting at t; see discrete_time() / euler().
using StepFunction = std::function<void(std::span<double> x, std::span<const double> theta, double t, double dt,
                                        Rng& rng, const CovariateTable& covariates)>;
/// Log transition density. Declared for completeness; no algorithm here uses it.
using ProcessDensity = std::function<double(std::span<const double> x_prev, std::span<const double> x,
                                            std::span<const double> theta, double t, double t_next,
                                            const CovariateTable& covariates)>;
using MeasureSimulator = std::function<void(std::span<double> y, std::span<const double> x,
                                            std::span<const double> theta, double t, Rng& rng,
                                            const CovariateTable& covariates)>;
/// Log measurement density; -inf for impossible observations, never NaN.
using MeasureDensity = std::function<double(std::span<const double> y, std::span<const double> x,
                                            std::span<const double> theta, double t,
                                            const CovariateTable& covariates)>;
using Initializer = std::function<void(std::span<double> x, std::span<const double> theta, double t0, Rng& rng,
                                       const CovariateTable& covariates)>;
using PriorSimulator = std::function<void(std::span<double> theta, Rng& rng)>;
/// Log prior density.
using PriorDensity = std::function<double(std::span<const double> theta)>;
using ParamTransform = std::function<void(std::span<const double> in, std::span<double> out)>;

/// A partially observed Markov process: component callbacks plus the names,
/// data, covariates and accumulator list they operate on. Treat as immutable
/// once handed to an algorithm.
struct ModelSpec {
  std::string name;
  std::vector<std::string> state_names;
  std::vector<std::string> observable_names;
  std::vector<std::string> param_names;

  TimeSeriesData data;
  std::optional<ParamVector> params;
  CovariateTable covariates;
  /// States zeroed immediately after each observation.
  std::vector<std::string> accumulators;

  ProcessSimulator rprocess;
  ProcessDensity dprocess;
  MeasureSimulator rmeasure;
  MeasureDensity dmeasure;
  /// When empty, state `s` is initialised from parameter `s.0`.
  Initializer initializer;
  PriorSimulator rprior;
  PriorDensity dprior;
  ParamTransform to_estimation;
  ParamTransform from_estimation;

  std::size_t state_dim() const noexcept { return state_names.size(); }
  std::size_t obs_dim() const noexcept { return observable_names.size(); }
  std::size_t param_dim() const noexcept { return param_names.size(); }

  std::size_t param_index(const std::string& name) const;
  std::size_t state_index(const std::string& name) const;
  std::vector<std::size_t> accumulator_indices() const;

  /// Parameters in model order. Every declared name must be present.
  std::vector<double> dense(const ParamVector& params) const;
  ParamVector named(std::span<const double> theta) const;
  /// The stored parameters, or a lookup error when none are set.
  const ParamVector& default_params() const;

  bool has_transform() const noexcept { return static_cast<bool>(to_estimation) && static_cast<bool>(from_estimation); }

  /// Checks names and accumulator declarations.
  void validate() const;
};

enum class Component { RProcess, DProcess, RMeasure, DMeasure, Initializer, RPrior, DPrior };

/// Throws a missing-component error naming the component and the algorithm.
void require(const ModelSpec& model, Component component, const std::string& algorithm);

/// The model's initializer, or the default ".0"-suffix initializer.
Initializer resolved_initializer(const ModelSpec& model);

/// Log measurement density with the missing-data convention: an observation
/// row that is entirely NaN contributes 0. A NaN density is reported as -inf.
double log_measure_density(const ModelSpec& model, std::span<const double> y, std::span<const double> x,
                           std::span<const double> theta, double t);

enum class TransformDirection { ToEstimation, FromEstimation };

/// Applies the registered transform; identity when none is registered.
ParamVector transform_params(const ModelSpec& model, const ParamVector& params, TransformDirection direction);
std::vector<double> transform_dense(const ModelSpec& model, std::span<const double> theta,
                                    TransformDirection direction);

/// Process simulator taking an integer number of steps of fixed size delta_t
/// between observation times (rounded to the nearest integer).
ProcessSimulator discrete_time(StepFunction step, double delta_t);
/// Process simulator taking ceil((t_next - t) / dt) equal Euler steps, so the
/// last step lands exactly on t_next.
ProcessSimulator euler(StepFunction step, double dt);

}  // namespace pompkit
