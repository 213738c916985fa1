#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pompkit/model.hpp"

namespace pompkit {

struct FilterResult {
  double loglik = 0.0;
  std::vector<double> cond_logliks;  // one per observation
  std::vector<double> ess;           // effective sample size per observation; 0 at tolerated failures
  RowMatrix filter_means;            // N x q, weighted means before resampling
  std::size_t np = 0;
  std::size_t failures = 0;
  std::optional<RowMatrix> final_particles;  // J x q after the last resampling
};

struct PfilterOptions {
  /// Number of all-zero-weight steps tolerated before aborting. Each
  /// tolerated step contributes -inf to the log likelihood and leaves the
  /// particles unresampled.
  std::size_t max_fail = 0;
  bool keep_particles = false;
};

/// Bootstrap particle filter with systematic resampling at every step.
/// Per-particle draws use streams keyed by (step, particle) derived from one
/// split of `rng`, so the estimate is reproducible for any thread count.
FilterResult pfilter(const ModelSpec& model, const ParamVector& params, std::size_t np, Rng& rng,
                     const PfilterOptions& options = {});
FilterResult pfilter(const ModelSpec& model, std::span<const double> theta, std::size_t np, Rng& rng,
                     const PfilterOptions& options = {});

/// Systematic resampling. Weights are renormalised if they do not sum to one.
/// Returns 0-based ancestor indices in non-decreasing order.
std::vector<std::size_t> systematic_resample(std::span<const double> weights, Rng& rng);
/// Same walk with an explicit first sampling point u1 in (0, 1/J).
std::vector<std::size_t> systematic_resample(std::span<const double> weights, double u1);

/// 1 / sum(w^2) of the normalised weights.
double ess(std::span<const double> weights);

struct LogMeanExp {
  double value = 0.0;
  /// Jackknife standard error; absent for a single value.
  std::optional<double> se;
};

/// log(mean(exp(values))) with max-subtraction.
LogMeanExp logmeanexp(std::span<const double> values, bool with_se = false);

/// Normalise log weights in place to probabilities; returns log(mean(exp(lw)))
/// or -inf when every weight is zero (weights are then left uniform).
double normalize_log_weights(std::span<const double> log_weights, std::span<double> weights);

}  // namespace pompkit
