#include "pompkit/models.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "pompkit/distributions.hpp"
#include "pompkit/error.hpp"

namespace pompkit {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> sequence(double from, double to, double by) {
  std::vector<double> out;
  const auto n = static_cast<long>(std::llround((to - from) / by));
  for (long i = 0; i <= n; ++i) out.push_back(from + static_cast<double>(i) * by);
  return out;
}

ParamTransform log_transform(std::vector<bool> positive, bool forward) {
  return [positive = std::move(positive), forward](std::span<const double> in, std::span<double> out) {
    for (std::size_t i = 0; i < in.size(); ++i)
      out[i] = positive[i] ? (forward ? std::log(in[i]) : std::exp(in[i])) : in[i];
  };
}

void set_log_transforms(ModelSpec& m, const std::vector<std::string>& logged) {
  std::vector<bool> mask(m.param_dim(), false);
  for (const auto& name : logged) mask[m.param_index(name)] = true;
  m.to_estimation = log_transform(mask, true);
  m.from_estimation = log_transform(mask, false);
}

ParamVector scaled(const ParamVector& p, double factor) {
  ParamVector out = p;
  for (double& v : out.values_mutable()) v *= factor;
  return out;
}

void check_count(double v, const char* compartment) {
  if (!(v >= 0) || v != std::floor(v))
    throw Error(ErrorKind::SimulationDiverged, std::string("SIR compartment ") + compartment +
                                                   " is not a non-negative integer: " + format_number(v));
}

}  // namespace

void set_box_prior(ModelSpec& model, const ParamVector& lower, const ParamVector& upper) {
  struct Bound {
    std::size_t index;
    double lo, hi;
  };
  std::vector<Bound> bounds;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    const double lo = lower.value(i), hi = upper[lower.name(i)];
    if (!(hi > lo)) throw Error(ErrorKind::Domain, "box prior for " + lower.name(i) + " needs upper > lower");
    bounds.push_back({model.param_index(lower.name(i)), lo, hi});
  }
  model.dprior = [bounds](std::span<const double> theta) {
    double lp = 0;
    for (const auto& b : bounds) {
      const double v = theta[b.index];
      if (!(v >= b.lo && v <= b.hi)) return kNegInf;
      lp -= std::log(b.hi - b.lo);
    }
    return lp;
  };
  model.rprior = [bounds](std::span<double> theta, Rng& rng) {
    for (const auto& b : bounds) theta[b.index] = rng.uniform(b.lo, b.hi);
  };
}

// Gompertz -------------------------------------------------------------------

ParamVector gompertz_default_params() {
  return {{"r", 0.1}, {"K", 1.0}, {"sigma", 0.1}, {"tau", 0.1}, {"X.0", 1.0}};
}

ModelSpec gompertz_model() { return gompertz_model(empty_data(0.0, sequence(1, 100, 1), {"Y"})); }

ModelSpec gompertz_model(TimeSeriesData data) {
  ModelSpec m;
  m.name = "gompertz";
  m.state_names = {"X"};
  m.observable_names = {"Y"};
  m.param_names = {"r", "K", "sigma", "tau", "X.0"};
  m.data = std::move(data);
  m.params = gompertz_default_params();

  m.rprocess = discrete_time(
      [](std::span<double> x, std::span<const double> p, double, double dt, Rng& rng, const CovariateTable&) {
        const double S = std::exp(-p[0] * dt);
        const double eps = std::exp(rng.normal(0.0, p[2]));
        x[0] = p[1] * std::pow(x[0] / p[1], S) * eps;
      },
      1.0);
  m.rmeasure = [](std::span<double> y, std::span<const double> x, std::span<const double> p, double, Rng& rng,
                  const CovariateTable&) { y[0] = rlnorm(std::log(x[0]), p[3], rng); };
  m.dmeasure = [](std::span<const double> y, std::span<const double> x, std::span<const double> p, double,
                  const CovariateTable&) { return dlnorm(y[0], std::log(x[0]), p[3], true); };
  set_log_transforms(m, m.param_names);
  set_box_prior(m, scaled(*m.params, 0.1), scaled(*m.params, 10.0));
  m.validate();
  return m;
}

// Ricker ---------------------------------------------------------------------

ParamVector ricker_default_params() {
  return {{"r", std::exp(3.8)}, {"sigma", 0.3}, {"phi", 10.0}, {"N.0", 7.0}, {"e.0", 0.0}};
}

ModelSpec ricker_model() { return ricker_model(empty_data(0.0, sequence(0, 50, 1), {"y"})); }

ModelSpec ricker_model(TimeSeriesData data) {
  ModelSpec m;
  m.name = "ricker";
  m.state_names = {"N", "e"};
  m.observable_names = {"y"};
  m.param_names = {"r", "sigma", "phi", "N.0", "e.0"};
  m.data = std::move(data);
  m.params = ricker_default_params();

  m.rprocess = discrete_time(
      [](std::span<double> x, std::span<const double> p, double, double, Rng& rng, const CovariateTable&) {
        x[1] = rng.normal(0.0, p[1]);
        x[0] = p[0] * x[0] * std::exp(-x[0] + x[1]);
      },
      1.0);
  m.rmeasure = [](std::span<double> y, std::span<const double> x, std::span<const double> p, double, Rng& rng,
                  const CovariateTable&) { y[0] = rpois(p[2] * x[0], rng); };
  m.dmeasure = [](std::span<const double> y, std::span<const double> x, std::span<const double> p, double,
                  const CovariateTable&) { return dpois(y[0], p[2] * x[0], true); };
  set_log_transforms(m, {"r", "sigma", "phi", "N.0"});
  const ParamVector lower{{"r", 1.0}, {"sigma", 0.01}, {"phi", 0.1}};
  const ParamVector upper{{"r", 1000.0}, {"sigma", 5.0}, {"phi", 1000.0}};
  set_box_prior(m, lower, upper);
  m.validate();
  return m;
}

// SIR ------------------------------------------------------------------------

double seasonal_beta(double b1, double b2, double b3, double phi) {
  return std::exp(b1 + b2 * std::cos(kTwoPi * phi) + b3 * std::sin(kTwoPi * phi));
}

double force_of_infection(double beta, double infected, double population, double iota) {
  if (!(population > 0)) throw Error(ErrorKind::Domain, "force of infection needs a positive population");
  return beta * (infected + iota) / population;
}

ParamVector sir_default_params() {
  return {{"popsize", 500000.0}, {"beta", 400.0}, {"gamma", 26.0}, {"mu", 1.0 / 50},  {"rho", 0.1},
          {"theta", 100.0},      {"S.0", 26.0 / 400}, {"I.0", 0.002}, {"R.0", 1.0}};
}

namespace {

// popsize, S.0, I.0, R.0 positions are passed in so both SIR variants share it.
void sir_initial_counts(std::span<double> x, std::span<const double> p, std::size_t popsize, std::size_t s0) {
  const double total = p[s0] + p[s0 + 1] + p[s0 + 2];
  if (!(total > 0) || p[s0] < 0 || p[s0 + 1] < 0 || p[s0 + 2] < 0)
    throw Error(ErrorKind::Domain, "SIR initial fractions must be non-negative with a positive sum");
  for (std::size_t k = 0; k < 3; ++k) x[k] = std::round(p[popsize] * p[s0 + k] / total);
}

MeasureSimulator nb_rmeasure(std::size_t rho, std::size_t theta, std::size_t H) {
  return [=](std::span<double> y, std::span<const double> x, std::span<const double> p, double, Rng& rng,
             const CovariateTable&) { y[0] = rnbinom_mu(p[theta], p[rho] * x[H], rng); };
}

MeasureDensity nb_dmeasure(std::size_t rho, std::size_t theta, std::size_t H) {
  return [=](std::span<const double> y, std::span<const double> x, std::span<const double> p, double,
             const CovariateTable&) { return dnbinom_mu(y[0], p[theta], p[rho] * x[H], true); };
}

}  // namespace

ModelSpec sir_model() {
  ModelSpec m;
  m.name = "sir";
  m.state_names = {"S", "I", "R", "H"};
  m.observable_names = {"cases"};
  m.param_names = {"popsize", "beta", "gamma", "mu", "rho", "theta", "S.0", "I.0", "R.0"};
  m.data = empty_data(-1.0 / 52, sequence(0, 10, 1.0 / 52), {"cases"});
  m.params = sir_default_params();
  m.accumulators = {"H"};

  m.initializer = [](std::span<double> x, std::span<const double> p, double, Rng&, const CovariateTable&) {
    sir_initial_counts(x, p, 0, 6);
    x[3] = 0.0;
  };
  m.rprocess = euler(
      [](std::span<double> x, std::span<const double> p, double, double dt, Rng& rng, const CovariateTable&) {
        double &S = x[0], &I = x[1], &R = x[2], &H = x[3];
        const double beta = p[1], gamma = p[2], mu = p[3];
        const double P = S + I + R;
        std::array<double, 6> rate{mu * P, beta * I / P, mu, gamma, mu, mu};
        std::array<double, 6> dN{};
        dN[0] = rpois(rate[0] * dt, rng);
        reulermultinom(S, std::span(rate).subspan(1, 2), dt, std::span(dN).subspan(1, 2), rng);
        reulermultinom(I, std::span(rate).subspan(3, 2), dt, std::span(dN).subspan(3, 2), rng);
        reulermultinom(R, std::span(rate).subspan(5, 1), dt, std::span(dN).subspan(5, 1), rng);
        S += dN[0] - dN[1] - dN[2];
        I += dN[1] - dN[3] - dN[4];
        R += dN[3] - dN[5];
        H += dN[1];
        check_count(S, "S");
        check_count(I, "I");
        check_count(R, "R");
      },
      1.0 / 52 / 20);
  m.rmeasure = nb_rmeasure(4, 5, 3);
  m.dmeasure = nb_dmeasure(4, 5, 3);
  set_log_transforms(m, {"beta", "gamma", "mu", "theta"});
  m.validate();
  return m;
}

ParamVector sir_seasonal_default_params() {
  return {{"popsize", 500000.0}, {"iota", 5.0},  {"b1", 6.0},     {"b2", 0.2},     {"b3", -0.1},
          {"gamma", 26.0},       {"mu", 1.0 / 50}, {"rho", 0.1},    {"theta", 100.0}, {"sigma", 0.3},
          {"S.0", 0.055},        {"I.0", 0.002},  {"R.0", 0.94}};
}

CovariateTable synthetic_births(double from, double to) {
  const auto times = sequence(from, to, 1.0 / 12);
  RowMatrix rows(static_cast<Eigen::Index>(times.size()), 1);
  for (std::size_t i = 0; i < times.size(); ++i)
    rows(static_cast<Eigen::Index>(i), 0) = 10000.0 * (1.0 + 0.1 * std::sin(kTwoPi * times[i]));
  return CovariateTable(times, {"births"}, rows);
}

ModelSpec sir_seasonal_model() { return sir_seasonal_model(synthetic_births()); }

ModelSpec sir_seasonal_model(CovariateTable births) {
  ModelSpec m;
  m.name = "sir-seasonal";
  m.state_names = {"S", "I", "R", "H", "P", "Phi", "noise"};
  m.observable_names = {"cases"};
  m.param_names = {"popsize", "iota", "b1", "b2", "b3", "gamma", "mu", "rho", "theta", "sigma", "S.0", "I.0", "R.0"};
  m.data = empty_data(-1.0 / 52, sequence(0, 10, 1.0 / 52), {"cases"});
  m.params = sir_seasonal_default_params();
  m.accumulators = {"H", "noise"};
  const std::size_t births_col = births.column("births");
  m.covariates = std::move(births);

  m.initializer = [](std::span<double> x, std::span<const double> p, double, Rng&, const CovariateTable&) {
    sir_initial_counts(x, p, 0, 10);
    x[3] = 0.0;
    x[4] = x[0] + x[1] + x[2];
    x[5] = 0.0;
    x[6] = 0.0;
  };
  m.rprocess = euler(
      [births_col](std::span<double> x, std::span<const double> p, double t, double dt, Rng& rng,
                   const CovariateTable& cov) {
        double &S = x[0], &I = x[1], &R = x[2], &H = x[3], &P = x[4], &Phi = x[5], &noise = x[6];
        const double iota = p[1], gamma = p[5], mu = p[6], sigma = p[9];
        const double beta = seasonal_beta(p[2], p[3], p[4], Phi);
        std::array<double, 6> rate{cov.value(births_col, t), force_of_infection(beta, I, P, iota), mu, gamma, mu, mu};
        std::array<double, 6> dN{};
        dN[0] = rpois(rate[0] * dt, rng);
        reulermultinom(S, std::span(rate).subspan(1, 2), dt, std::span(dN).subspan(1, 2), rng);
        reulermultinom(I, std::span(rate).subspan(3, 2), dt, std::span(dN).subspan(3, 2), rng);
        reulermultinom(R, std::span(rate).subspan(5, 1), dt, std::span(dN).subspan(5, 1), rng);
        const double dW = sigma > 0 ? rng.normal(dt, sigma * std::sqrt(dt)) : dt;
        S += dN[0] - dN[1] - dN[2];
        I += dN[1] - dN[3] - dN[4];
        R += dN[3] - dN[5];
        P = S + I + R;
        Phi += dW;
        H += dN[1];
        if (sigma > 0) noise += (dW - dt) / sigma;
        check_count(S, "S");
        check_count(I, "I");
        check_count(R, "R");
      },
      1.0 / 52 / 20);
  m.rmeasure = nb_rmeasure(7, 8, 3);
  m.dmeasure = nb_dmeasure(7, 8, 3);
  set_log_transforms(m, {"iota", "gamma", "mu", "theta", "sigma"});
  m.validate();
  return m;
}

// Registry -------------------------------------------------------------------

std::vector<std::string> builtin_model_names() { return {"gompertz", "ricker", "sir", "sir-seasonal"}; }

ModelSpec builtin_model(const std::string& name) {
  if (name == "gompertz") return gompertz_model();
  if (name == "ricker") return ricker_model();
  if (name == "sir") return sir_model();
  if (name == "sir-seasonal") return sir_seasonal_model();
  std::string valid;
  for (const auto& n : builtin_model_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw Error(ErrorKind::Validation, "unknown model '" + name + "'; valid models: " + valid);
}

}  // namespace pompkit
