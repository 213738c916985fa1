#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pompkit/optimize.hpp"
#include "pompkit/smc.hpp"

namespace pompkit {

/// Elementwise map applied to a series before a probe is computed.
using SeriesTransform = std::function<double(double)>;

/// A summary statistic of a dataset. `apply` receives the N x r observation
/// matrix and the observable names and writes `names.size()` values.
struct Probe {
  std::vector<std::string> names;
  std::function<void(const RowMatrix& y, const std::vector<std::string>& observables, std::span<double> out)> apply;

  std::size_t arity() const noexcept { return names.size(); }
};

Probe probe_mean(const std::string& var, SeriesTransform transform = {});

enum class AcfType { Covariance, Correlation };

/// Autocovariance (divisor N) of the mean-centred series at each lag.
Probe probe_acf(const std::string& var, std::vector<int> lags, SeriesTransform transform = {},
                AcfType type = AcfType::Covariance);

/// Least-squares coefficients of y_t on y_{t - lag_k}^{power_k}, no intercept.
/// The series is mean-centred first unless `center` is false. A rank-deficient
/// design yields the minimum-norm solution and a logged warning.
Probe probe_nlar(const std::string& var, std::vector<int> lags, std::vector<int> powers, SeriesTransform transform = {},
                 bool center = true);

/// Regression of the sorted, centred series on powers 1..npoly of the sorted,
/// centred reference sample (interpolated to the series length).
Probe probe_marginal(const std::string& var, std::vector<double> ref, int npoly = 3, SeriesTransform transform = {});

/// Concatenated values of `probes` on one dataset.
std::vector<double> apply_probes(const std::vector<Probe>& probes, const RowMatrix& y,
                                 const std::vector<std::string>& observables);
std::vector<std::string> probe_names(const std::vector<Probe>& probes);

/// Gaussian log density of `observed` under the sample mean and covariance
/// (divisor J - 1) of the rows of `simulated`. A singular covariance is an
/// error naming the probes involved in the dependence.
double synth_loglik(const RowMatrix& simulated, std::span<const double> observed,
                    const std::vector<std::string>& names = {});

struct ProbeResult {
  std::vector<std::string> names;
  std::vector<double> observed;
  RowMatrix simulated;  // J x d
  double synth_loglik = 0.0;
  std::vector<double> p_values;
  RowMatrix correlations;  // d x d, Pearson, over the simulations
};

/// Observed row labelled 0 followed by simulations 1..J.
void write_probe_csv(const std::string& path, const ProbeResult& result);

/// J x d matrix of probe values on `nsim` simulations at `params`.
RowMatrix simulate_probes(const ModelSpec& model, std::span<const double> theta, const std::vector<Probe>& probes,
                          std::size_t nsim, Rng& rng);

ProbeResult probe(const ModelSpec& model, const ParamVector& params, const std::vector<Probe>& probes,
                  std::size_t nsim, Rng& rng);

/// Two-sided rank p-value 2 min(1 + #below, 1 + #above) / (J + 1), capped at 1.
double probe_p_value(double observed, std::span<const double> simulated);

struct ProbeMatchResult {
  ParamVector theta;
  double synth_loglik = 0.0;
  OptimStatus status = OptimStatus::Converged;
  int evaluations = 0;
};

/// Maximises the synthetic likelihood over `est` by Nelder-Mead, using the
/// same random stream for every evaluation so the objective is deterministic.
ProbeMatchResult probe_match(const ModelSpec& model, const ParamVector& start, const std::vector<std::string>& est,
                             const std::vector<Probe>& probes, std::size_t nsim, Rng& rng,
                             const NelderMeadOptions& options = {}, bool transform = true);

}  // namespace pompkit
