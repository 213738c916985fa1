#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pompkit/rng.hpp"

namespace pompkit {

/// Competing-exit specification for a compartment of `size` individuals over
/// a step of length dt. Exit j happens with probability
/// p_j = (r_j / sum r) (1 - exp(-sum r dt)); with all rates zero nobody leaves.
struct EulerMultinomSpec {
  double size = 0;  // non-negative integer
  std::vector<double> rates;
  double dt = 1.0;

  void validate() const;
  std::vector<double> probabilities() const;
};

/// Exit counts; sum of counts never exceeds size.
std::vector<double> reulermultinom(const EulerMultinomSpec& spec, Rng& rng);
/// In-place variant for the inner loops of compartment models.
void reulermultinom(double size, std::span<const double> rates, double dt, std::span<double> counts, Rng& rng);

/// Multinomial pmf with the Euler probabilities; impossible outcomes give 0
/// (or -inf on the log scale).
double deulermultinom(std::span<const double> counts, const EulerMultinomSpec& spec, bool give_log = false);

/// Negative binomial with mean mu and dispersion size: variance mu + mu^2/size.
double dnbinom_mu(double y, double size, double mu, bool give_log = false);
double rnbinom_mu(double size, double mu, Rng& rng);

double dpois(double y, double lambda, bool give_log = false);
double rpois(double lambda, Rng& rng);
double rbinom(double n, double p, Rng& rng);

double dnorm(double x, double mean, double sd, bool give_log = false);
double dlnorm(double x, double meanlog, double sdlog, bool give_log = false);
double rlnorm(double meanlog, double sdlog, Rng& rng);

}  // namespace pompkit
