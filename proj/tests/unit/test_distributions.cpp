#include <gtest/gtest.h>

#include <boost/math/distributions/binomial.hpp>
#include <cmath>
#include <map>

#include <pompkit/distributions.hpp>
#include <pompkit/error.hpp>

#include "stats_support.hpp"

using namespace pompkit;

namespace {

// Every (d_1..d_k) with sum <= size.
void enumerate(std::size_t k, int size, std::vector<double>& cur, const std::function<void()>& visit) {
  if (cur.size() == k) {
    visit();
    return;
  }
  double used = 0;
  for (double c : cur) used += c;
  for (int d = 0; d + used <= size; ++d) {
    cur.push_back(d);
    enumerate(k, size, cur, visit);
    cur.pop_back();
  }
}

double lattice_sum(const EulerMultinomSpec& spec) {
  std::vector<double> cur;
  double total = 0;
  enumerate(spec.rates.size(), static_cast<int>(spec.size), cur, [&] { total += deulermultinom(cur, spec); });
  return total;
}

}  // namespace

TEST(EulerMultinom, ZeroRatesGiveNoExits) {
  Rng rng(1);
  EulerMultinomSpec spec{100, {0, 0}, 1};
  EXPECT_EQ(reulermultinom(spec, rng), (std::vector<double>{0, 0}));
  EXPECT_EQ(deulermultinom(std::vector<double>{0, 0}, spec), 1.0);
  EulerMultinomSpec other{7, {0, 0}, 0.3};
  EXPECT_EQ(deulermultinom(std::vector<double>{0, 0}, other), 1.0);
}

TEST(EulerMultinom, SingleIndividualExitProbability) {
  Rng rng(2);
  EulerMultinomSpec spec{1, {2.0}, 0.1};
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += static_cast<int>(reulermultinom(spec, rng)[0]);
  const double p = 1 - std::exp(-0.2);
  EXPECT_NEAR(p, 0.1813, 1e-4);
  EXPECT_NEAR(static_cast<double>(hits) / n, p, 3 * std::sqrt(p * (1 - p) / n));
}

TEST(EulerMultinom, LongStepSplitsEvenly) {
  Rng rng(3);
  EulerMultinomSpec spec{1000, {1, 1}, 1000};
  const int reps = 2000;
  std::vector<double> first, stay;
  for (int i = 0; i < reps; ++i) {
    const auto c = reulermultinom(spec, rng);
    first.push_back(c[0]);
    stay.push_back(1000 - c[0] - c[1]);
  }
  const double se = std::sqrt(1000 * 0.25 / reps);
  EXPECT_NEAR(testsupport::mean(first), 500, 3 * se);
  EXPECT_EQ(testsupport::mean(stay), 0.0);
}

TEST(EulerMultinom, LatticeSumsToOne) {
  EXPECT_NEAR(lattice_sum({3, {1.0, 0.5}, 0.1}), 1.0, 1e-12);
  Rng rng(4);
  for (int size = 0; size <= 6; ++size)
    for (std::size_t k = 1; k <= 3; ++k) {
      EulerMultinomSpec spec{static_cast<double>(size), {}, rng.uniform(0.05, 2.0)};
      for (std::size_t j = 0; j < k; ++j) spec.rates.push_back(rng.uniform(0.0, 3.0));
      EXPECT_NEAR(lattice_sum(spec), 1.0, 1e-12) << "size " << size << " k " << k;
    }
}

TEST(EulerMultinom, ImpossibleOutcomeHasZeroDensity) {
  EulerMultinomSpec spec{3, {1.0, 0.5}, 0.1};
  EXPECT_EQ(deulermultinom(std::vector<double>{4, 0}, spec), 0.0);
  EXPECT_EQ(deulermultinom(std::vector<double>{4, 0}, spec, true), -INFINITY);
}

TEST(EulerMultinom, RejectsInvalidSpecs) {
  Rng rng(1);
  EXPECT_THROW(reulermultinom({5, {-1.0}, 1}, rng), Error);
  EXPECT_THROW(reulermultinom({-1, {1.0}, 1}, rng), Error);
  EXPECT_THROW(reulermultinom({5, {1.0}, 0}, rng), Error);
  EXPECT_THROW(deulermultinom(std::vector<double>{1, 0}, {5, {1.0}, 1}), Error);
}

TEST(EulerMultinom, SamplerMatchesDensityChiSquare) {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    EulerMultinomSpec spec{static_cast<double>(2 + trial), {rng.uniform(0.2, 2), rng.uniform(0.2, 2)},
                           rng.uniform(0.1, 0.8)};
    std::vector<std::vector<double>> cells;
    std::vector<double> cur;
    enumerate(2, static_cast<int>(spec.size), cur, [&] { cells.push_back(cur); });
    const int n = 20000;
    std::map<std::vector<double>, int> counts;
    for (int i = 0; i < n; ++i) ++counts[reulermultinom(spec, rng)];
    std::vector<double> obs, exp;
    double pooled_obs = 0, pooled_exp = 0;
    for (const auto& c : cells) {
      const double e = n * deulermultinom(c, spec);
      if (e < 5) {
        pooled_obs += counts[c];
        pooled_exp += e;
      } else {
        obs.push_back(counts[c]);
        exp.push_back(e);
      }
    }
    if (pooled_exp > 0) {
      obs.push_back(pooled_obs);
      exp.push_back(pooled_exp);
    }
    EXPECT_GT(testsupport::chi_square_p_value(obs, exp), 0.001) << "trial " << trial;
  }
}

TEST(EulerMultinom, MarginalIsBinomial) {
  EulerMultinomSpec spec{5, {0.7, 1.3, 0.4}, 0.5};
  const auto p = spec.probabilities();
  for (std::size_t j = 0; j < 3; ++j) {
    std::vector<double> marginal(6, 0.0);
    std::vector<double> cur;
    enumerate(3, 5, cur, [&] { marginal[static_cast<std::size_t>(cur[j])] += deulermultinom(cur, spec); });
    boost::math::binomial_distribution<double> b(5, p[j]);
    for (int d = 0; d <= 5; ++d) EXPECT_NEAR(marginal[d], boost::math::pdf(b, d), 1e-12);
  }
}

TEST(NegativeBinomial, ZeroCountClosedForm) {
  EXPECT_NEAR(dnbinom_mu(0, 2, 1), 4.0 / 9, 1e-15);
  EXPECT_NEAR(dnbinom_mu(0, 2, 1, true), std::log(4.0 / 9), 1e-14);
}

TEST(NegativeBinomial, SamplerMoments) {
  Rng rng(6);
  const int n = 100000;
  std::vector<double> x(n);
  for (double& v : x) v = rnbinom_mu(100, 10, rng);
  const double m = testsupport::mean(x), s = testsupport::sd(x);
  EXPECT_NEAR(m, 10, 3 * std::sqrt(11.0 / n));
  // Sample variance has sd about var * sqrt(2/n) for a near-normal shape.
  EXPECT_NEAR(s * s, 11, 3 * 11 * std::sqrt(2.0 / n) * 1.2);
}

TEST(NegativeBinomial, PoissonLimit) {
  EXPECT_NEAR(dnbinom_mu(3, 1e9, 3), dpois(3, 3), 1e-6);
  EXPECT_NEAR(dpois(3, 3), 27 * std::exp(-3.0) / 6, 1e-15);
}

TEST(NegativeBinomial, DomainErrors) {
  EXPECT_THROW(dnbinom_mu(1, 0, 1), Error);
  EXPECT_THROW(dnbinom_mu(1, 1, -1), Error);
  EXPECT_EQ(dnbinom_mu(0, 1, 0), 1.0);
  EXPECT_EQ(dnbinom_mu(2, 1, 0), 0.0);
}

TEST(Poisson, DensityAndSampler) {
  EXPECT_NEAR(dpois(0, 2), std::exp(-2.0), 1e-15);
  EXPECT_EQ(dpois(1.5, 2), 0.0);
  Rng rng(7);
  std::vector<double> x(50000);
  for (double& v : x) v = rpois(4.5, rng);
  EXPECT_NEAR(testsupport::mean(x), 4.5, 3 * std::sqrt(4.5 / x.size()));
}

TEST(Binomial, SamplerMean) {
  Rng rng(8);
  std::vector<double> x(50000);
  for (double& v : x) v = rbinom(40, 0.3, rng);
  EXPECT_NEAR(testsupport::mean(x), 12, 3 * std::sqrt(40 * 0.21 / x.size()));
  EXPECT_EQ(rbinom(10, 0, rng), 0);
  EXPECT_EQ(rbinom(10, 1, rng), 10);
}

TEST(Normal, Densities) {
  EXPECT_NEAR(dnorm(0, 0, 1), 1 / std::sqrt(2 * M_PI), 1e-15);
  EXPECT_NEAR(dlnorm(1, 0, 1), 1 / std::sqrt(2 * M_PI), 1e-15);
  EXPECT_EQ(dlnorm(0, 0, 1), 0.0);
  EXPECT_EQ(dlnorm(-1, 0, 1, true), -INFINITY);
  Rng rng(9);
  std::vector<double> x(20000);
  for (double& v : x) v = std::log(rlnorm(0.5, 0.2, rng));
  const double d = testsupport::ks_statistic(x, [](double v) { return testsupport::normal_cdf(v, 0.5, 0.2); });
  EXPECT_GT(testsupport::ks_p_value(d, x.size()), 0.001);
}
