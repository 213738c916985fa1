#include "pompkit/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "pompkit/error.hpp"

namespace pompkit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool is_count(double v) { return v >= 0 && std::isfinite(v) && v == std::floor(v); }

double finish(double log_value, bool give_log) { return give_log ? log_value : std::exp(log_value); }

// x * log(p) with the convention 0 * log(0) = 0.
double xlogp(double x, double p) {
  if (x == 0) return 0.0;
  return p > 0 ? x * std::log(p) : kNegInf;
}

}  // namespace

void EulerMultinomSpec::validate() const {
  if (!is_count(size)) throw Error(ErrorKind::Domain, "euler-multinomial size must be a non-negative integer");
  if (!(dt > 0) || !std::isfinite(dt)) throw Error(ErrorKind::Domain, "euler-multinomial dt must be positive");
  for (double r : rates)
    if (!(r >= 0) || !std::isfinite(r))
      throw Error(ErrorKind::Domain, "euler-multinomial rates must be finite and non-negative");
}

std::vector<double> EulerMultinomSpec::probabilities() const {
  double total = 0;
  for (double r : rates) total += r;
  std::vector<double> p(rates.size(), 0.0);
  if (total <= 0) return p;
  const double leave = -std::expm1(-total * dt);
  for (std::size_t j = 0; j < rates.size(); ++j) p[j] = rates[j] / total * leave;
  return p;
}

double rbinom(double n, double p, Rng& rng) {
  if (n <= 0 || p <= 0) return 0.0;
  if (p >= 1) return n;
  std::binomial_distribution<long long> dist(static_cast<long long>(n), p);
  return static_cast<double>(dist(rng));
}

double rpois(double lambda, Rng& rng) {
  if (!(lambda >= 0)) throw Error(ErrorKind::Domain, "rpois: mean must be non-negative");
  if (lambda == 0) return 0.0;
  std::poisson_distribution<long long> dist(lambda);
  return static_cast<double>(dist(rng));
}

void reulermultinom(double size, std::span<const double> rates, double dt, std::span<double> counts, Rng& rng) {
  double total = 0;
  for (double r : rates) {
    if (!(r >= 0) || !std::isfinite(r))
      throw Error(ErrorKind::Domain, "euler-multinomial rates must be finite and non-negative");
    total += r;
  }
  if (!is_count(size)) throw Error(ErrorKind::Domain, "euler-multinomial size must be a non-negative integer");
  std::fill(counts.begin(), counts.end(), 0.0);
  if (total <= 0 || size == 0) return;
  // Number leaving by any route, then split sequentially among the routes.
  double remaining = rbinom(size, -std::expm1(-total * dt), rng);
  double rate_left = total;
  const std::size_t k = rates.size();
  for (std::size_t j = 0; j + 1 < k && remaining > 0; ++j) {
    const double p = rate_left > 0 ? std::clamp(rates[j] / rate_left, 0.0, 1.0) : 0.0;
    counts[j] = rbinom(remaining, p, rng);
    remaining -= counts[j];
    rate_left -= rates[j];
  }
  if (k > 0) counts[k - 1] += remaining;
}

std::vector<double> reulermultinom(const EulerMultinomSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<double> counts(spec.rates.size());
  reulermultinom(spec.size, spec.rates, spec.dt, counts, rng);
  return counts;
}

double deulermultinom(std::span<const double> counts, const EulerMultinomSpec& spec, bool give_log) {
  spec.validate();
  if (counts.size() != spec.rates.size())
    throw Error(ErrorKind::Domain, "deulermultinom: counts and rates differ in length");
  double exits = 0;
  for (double d : counts) {
    if (!is_count(d)) throw Error(ErrorKind::Domain, "deulermultinom: counts must be non-negative integers");
    exits += d;
  }
  if (exits > spec.size) return finish(kNegInf, give_log);
  double total = 0;
  for (double r : spec.rates) total += r;
  const auto p = spec.probabilities();
  const double stay = spec.size - exits;
  double lp = std::lgamma(spec.size + 1) - std::lgamma(stay + 1);
  for (std::size_t j = 0; j < counts.size(); ++j) lp += xlogp(counts[j], p[j]) - std::lgamma(counts[j] + 1);
  // log P(stay) = -sum(r) dt exactly, avoiding log(1 - (1 - e^{-x})).
  lp += stay == 0 ? 0.0 : -total * spec.dt * stay;
  return finish(lp, give_log);
}

double dnbinom_mu(double y, double size, double mu, bool give_log) {
  if (!(size > 0) || !(mu >= 0) || std::isnan(y)) throw Error(ErrorKind::Domain, "dnbinom_mu: need size > 0, mu >= 0");
  if (!is_count(y)) return finish(kNegInf, give_log);
  if (mu == 0) return finish(y == 0 ? 0.0 : kNegInf, give_log);
  double lp;
  if (std::isinf(size)) {
    lp = y * std::log(mu) - mu - std::lgamma(y + 1);
  } else if (size > 1e6 && y < 1e6) {
    // Large dispersion: sum log(size + k) term by term.
    double ratio = 0;
    for (double k = 0; k < y; ++k) ratio += std::log1p(k / size);
    lp = ratio + y * std::log(mu * size / (size + mu)) - size * std::log1p(mu / size) - std::lgamma(y + 1);
  } else {
    lp = std::lgamma(y + size) - std::lgamma(size) - std::lgamma(y + 1) + size * std::log(size / (size + mu)) +
         y * std::log(mu / (size + mu));
  }
  return finish(lp, give_log);
}

double rnbinom_mu(double size, double mu, Rng& rng) {
  if (!(size > 0) || !(mu >= 0)) throw Error(ErrorKind::Domain, "rnbinom_mu: need size > 0, mu >= 0");
  if (mu == 0) return 0.0;
  if (std::isinf(size)) return rpois(mu, rng);
  std::gamma_distribution<double> gamma(size, mu / size);
  return rpois(gamma(rng), rng);
}

double dpois(double y, double lambda, bool give_log) {
  if (!(lambda >= 0)) throw Error(ErrorKind::Domain, "dpois: mean must be non-negative");
  if (!is_count(y)) return finish(kNegInf, give_log);
  if (lambda == 0) return finish(y == 0 ? 0.0 : kNegInf, give_log);
  return finish(y * std::log(lambda) - lambda - std::lgamma(y + 1), give_log);
}

double dnorm(double x, double mean, double sd, bool give_log) {
  if (!(sd >= 0)) throw Error(ErrorKind::Domain, "dnorm: sd must be non-negative");
  if (sd == 0) return finish(x == mean ? std::numeric_limits<double>::infinity() : kNegInf, give_log);
  const double z = (x - mean) / sd;
  return finish(-0.5 * z * z - std::log(sd) - 0.5 * std::log(2 * std::numbers::pi), give_log);
}

double dlnorm(double x, double meanlog, double sdlog, bool give_log) {
  if (!(x > 0)) return finish(kNegInf, give_log);
  const double lx = std::log(x);
  return finish(dnorm(lx, meanlog, sdlog, true) - lx, give_log);
}

double rlnorm(double meanlog, double sdlog, Rng& rng) { return std::exp(rng.normal(meanlog, sdlog)); }

}  // namespace pompkit
