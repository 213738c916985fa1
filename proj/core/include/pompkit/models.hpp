#pragma once

#include <string>
#include <vector>

#include "pompkit/model.hpp"

namespace pompkit {

/// Gompertz population model on 1..100 with t0 = 0, observed through
/// lognormal noise. Parameters r, K, sigma, tau, X.0; all log-transformed.
/// Carries a box prior [p/10, 10p] around the default parameters.
ModelSpec gompertz_model();
ModelSpec gompertz_model(TimeSeriesData data);
ParamVector gompertz_default_params();

/// Stochastic Ricker map with Poisson sampling, observed at 0..50.
/// Parameters r, sigma, phi, N.0, e.0; states N and e.
ModelSpec ricker_model();
ModelSpec ricker_model(TimeSeriesData data);
ParamVector ricker_default_params();

/// Weekly-reported SIR epidemic over ten years, tau-leaped with Euler step
/// 1/52/20. Accumulator H counts new infections per reporting interval;
/// reports are negative binomial with mean rho H and size theta.
ModelSpec sir_model();
ParamVector sir_default_params();

/// SIR with log-Fourier seasonal transmission in a noisy phase Phi,
/// imported infections and a `births` covariate.
ModelSpec sir_seasonal_model();
ModelSpec sir_seasonal_model(CovariateTable births);
ParamVector sir_seasonal_default_params();

/// Synthetic monthly births per year, 10000 (1 + 0.1 sin 2 pi t), on
/// [from, to]. A placeholder for a real birth record.
CovariateTable synthetic_births(double from = -1.0, double to = 11.0);

/// Transmission rate exp(b1 + b2 cos 2 pi phi + b3 sin 2 pi phi).
double seasonal_beta(double b1, double b2, double b3, double phi);
/// Per-capita infection rate beta (I + iota) / P.
double force_of_infection(double beta, double infected, double population, double iota = 0.0);

/// Uniform prior on lower[i] <= p_i <= upper[i] for each named bound; other
/// parameters are unconstrained.
void set_box_prior(ModelSpec& model, const ParamVector& lower, const ParamVector& upper);

std::vector<std::string> builtin_model_names();
/// Throws a validation error listing the valid names for an unknown name.
ModelSpec builtin_model(const std::string& name);

}  // namespace pompkit
