#include <gtest/gtest.h>
#include <tbb/global_control.h>

#include <cmath>
#include <numeric>

#include <pompkit/pompkit.hpp>

#include "stats_support.hpp"

using namespace pompkit;

namespace {

const ModelSpec& gompertz_fixture() {
  static const ModelSpec m = [] {
    Rng rng(20240101);
    return with_simulated_data(gompertz_model(), gompertz_default_params(), rng);
  }();
  return m;
}

std::vector<double> replicate_logliks(const ModelSpec& m, std::size_t J, int reps, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out;
  for (int i = 0; i < reps; ++i) out.push_back(pfilter(m, gompertz_default_params(), J, rng).loglik);
  return out;
}

}  // namespace

TEST(Resample, EqualWeightsLeaveParticlesInPlace) {
  const std::vector<double> w(5, 0.2);
  for (double u1 : {1e-9, 0.05, 0.1, 0.19999}) {
    const auto idx = systematic_resample(w, u1);
    EXPECT_EQ(idx, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  }
  Rng rng(1);
  EXPECT_EQ(systematic_resample(w, rng), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(Resample, DegenerateWeight) {
  Rng rng(2);
  EXPECT_EQ(systematic_resample(std::vector<double>{1, 0, 0}, rng), (std::vector<std::size_t>{0, 0, 0}));
}

TEST(Resample, ThreeToOneSplit) {
  for (int i = 1; i < 100; ++i) {
    const double u1 = 0.25 * i / 100.0;
    const auto idx = systematic_resample(std::vector<double>{0.75, 0.25, 0, 0}, u1);
    EXPECT_EQ(std::count(idx.begin(), idx.end(), 0u), 3);
    EXPECT_EQ(std::count(idx.begin(), idx.end(), 1u), 1);
  }
}

TEST(Resample, RenormalisesAndRejectsZero) {
  EXPECT_EQ(systematic_resample(std::vector<double>{1, 3}, 0.1), (std::vector<std::size_t>{0, 1}));
  Rng rng(3);
  EXPECT_THROW(systematic_resample(std::vector<double>{0, 0}, rng), Error);
  EXPECT_THROW(ess(std::vector<double>{0, 0}), Error);
}

TEST(Resample, CountBoundsOnRandomWeights) {
  Rng rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t J = 1 + static_cast<std::size_t>(rng.uniform() * 60);
    std::vector<double> w(J);
    double total = 0;
    for (double& v : w) total += (v = rng.uniform() < 0.2 ? 0.0 : -std::log(rng.uniform()));
    if (total == 0) w[0] = total = 1;
    for (double& v : w) v /= total;
    const auto idx = systematic_resample(w, rng);
    ASSERT_EQ(idx.size(), J);
    ASSERT_TRUE(std::is_sorted(idx.begin(), idx.end()));
    std::vector<int> count(J, 0);
    for (auto i : idx) ++count[i];
    for (std::size_t m = 0; m < J; ++m) {
      const double jw = static_cast<double>(J) * w[m];
      ASSERT_GE(count[m], std::floor(jw - 1e-9)) << "trial " << trial;
      ASSERT_LE(count[m], std::ceil(jw + 1e-9)) << "trial " << trial;
    }
  }
}

TEST(Ess, Examples) {
  EXPECT_DOUBLE_EQ(ess(std::vector<double>(100, 0.01)), 100.0);
  EXPECT_DOUBLE_EQ(ess(std::vector<double>{1, 0, 0, 0}), 1.0);
  EXPECT_NEAR(ess(std::vector<double>{0.5, 0.25, 0.25}), 8.0 / 3, 1e-12);
}

TEST(LogMeanExp, Examples) {
  EXPECT_EQ(logmeanexp(std::vector<double>{0, 0, 0}).value, 0.0);
  EXPECT_NEAR(logmeanexp(std::vector<double>{std::log(2.0), std::log(4.0)}).value, std::log(3.0), 1e-15);
  const auto single = logmeanexp(std::vector<double>{-7.5}, true);
  EXPECT_EQ(single.value, -7.5);
  EXPECT_FALSE(single.se.has_value());
  const auto big = logmeanexp(std::vector<double>{1000, 1000}, true);
  EXPECT_NEAR(big.value, 1000, 1e-12);
  EXPECT_NEAR(*big.se, 0, 1e-12);
  EXPECT_THROW(logmeanexp(std::vector<double>{}), Error);
}

TEST(LogMeanExp, JackknifeMatchesDirectComputation) {
  const std::vector<double> v{1.0, 2.0, 0.5, 1.5};
  double mean = 0;
  std::vector<double> jack;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double s = 0;
    for (std::size_t k = 0; k < v.size(); ++k)
      if (k != i) s += std::exp(v[k]);
    jack.push_back(std::log(s / 3));
    mean += jack.back() / 4;
  }
  double ss = 0;
  for (double j : jack) ss += (j - mean) * (j - mean);
  EXPECT_NEAR(*logmeanexp(v, true).se, std::sqrt(0.75 * ss), 1e-14);
}

TEST(Pfilter, ConstantDensityGivesExactLoglik) {
  auto m = testsupport::iid_normal_model(25);
  const double c = 0.37;
  m.dmeasure = [c](std::span<const double>, std::span<const double>, std::span<const double>, double,
                   const CovariateTable&) { return std::log(c); };
  Rng rng(5);
  const auto res = pfilter(m, *m.params, 50, rng);
  EXPECT_NEAR(res.loglik, 25 * std::log(c), 1e-12);
}

TEST(Pfilter, ResultInvariants) {
  const auto& m = gompertz_fixture();
  Rng rng(6);
  const auto res = pfilter(m, gompertz_default_params(), 300, rng, {.max_fail = 0, .keep_particles = true});
  ASSERT_EQ(res.cond_logliks.size(), 100u);
  EXPECT_NEAR(res.loglik, std::accumulate(res.cond_logliks.begin(), res.cond_logliks.end(), 0.0), 1e-10);
  for (double e : res.ess) {
    EXPECT_GE(e, 1.0 - 1e-12);
    EXPECT_LE(e, 300.0 + 1e-9);
  }
  ASSERT_TRUE(res.final_particles.has_value());
  EXPECT_EQ(res.final_particles->rows(), 300);
  EXPECT_EQ(res.filter_means.rows(), 100);
}

TEST(Pfilter, AgreesWithKalman) {
  const auto& m = gompertz_fixture();
  const double exact = gompertz_kalman_loglik(m.data, gompertz_default_params());
  const auto ll = replicate_logliks(m, 1000, 10, 7);
  const auto lme = logmeanexp(ll, true);
  EXPECT_LT(std::abs(lme.value - exact), 3 * *lme.se) << lme.value << " vs " << exact;
}

TEST(Pfilter, LikelihoodScaleUnbiased) {
  const auto& m = gompertz_fixture();
  const double exact = gompertz_kalman_loglik(m.data, gompertz_default_params());
  const auto ll = replicate_logliks(m, 200, 50, 8);
  std::vector<double> ratio;
  for (double l : ll) ratio.push_back(std::exp(l - exact));
  const double mu = testsupport::mean(ratio);
  std::vector<double> jack;
  for (std::size_t i = 0; i < ratio.size(); ++i) jack.push_back((mu * ratio.size() - ratio[i]) / (ratio.size() - 1));
  const double jm = testsupport::mean(jack);
  double ss = 0;
  for (double j : jack) ss += (j - jm) * (j - jm);
  const double se = std::sqrt((ratio.size() - 1.0) / ratio.size() * ss);
  EXPECT_LT(std::abs(mu - 1), 3 * se) << "mean " << mu << " se " << se;
}

TEST(Pfilter, VarianceDecreasesWithParticles) {
  const auto& m = gompertz_fixture();
  const double small = testsupport::sd(replicate_logliks(m, 100, 20, 9));
  const double large = testsupport::sd(replicate_logliks(m, 2000, 20, 10));
  EXPECT_LT(large, small);
}

TEST(Pfilter, DeterministicAcrossThreadCounts) {
  const auto& m = gompertz_fixture();
  auto run = [&](int threads) {
    tbb::global_control gc(tbb::global_control::max_allowed_parallelism, threads);
    Rng rng(11);
    return pfilter(m, gompertz_default_params(), 500, rng);
  };
  const auto a = run(1), b = run(4);
  EXPECT_EQ(a.loglik, b.loglik);
  EXPECT_EQ(a.cond_logliks, b.cond_logliks);
  EXPECT_TRUE(a.filter_means == b.filter_means);
}

TEST(Pfilter, ZeroWeightsRaiseFailureWithStep) {
  auto m = testsupport::iid_normal_model(5);
  m.data.observations << 0, 0, 1, 0, 0;
  m.dmeasure = [](std::span<const double> y, std::span<const double>, std::span<const double>, double,
                  const CovariateTable&) { return y[0] == 0 ? 0.0 : -INFINITY; };
  Rng rng(12);
  try {
    (void)pfilter(m, *m.params, 20, rng);
    FAIL();
  } catch (const FilteringFailure& e) {
    EXPECT_EQ(e.step(), 3u);
  }
  const auto res = pfilter(m, *m.params, 20, rng, {.max_fail = 1});
  EXPECT_EQ(res.failures, 1u);
  EXPECT_EQ(res.loglik, -INFINITY);
  EXPECT_EQ(res.ess[2], 0.0);
  EXPECT_EQ(res.cond_logliks[3], 0.0);
}

TEST(Pfilter, MissingObservationsContributeZero) {
  auto m = gompertz_fixture();
  m.data.observations(10, 0) = std::nan("");
  Rng rng(13);
  const auto res = pfilter(m, gompertz_default_params(), 100, rng);
  EXPECT_EQ(res.cond_logliks[10], 0.0);
  EXPECT_TRUE(std::isfinite(res.loglik));
}

TEST(Pfilter, RequiresParticlesAndComponents) {
  const auto& m = gompertz_fixture();
  Rng rng(14);
  EXPECT_THROW(pfilter(m, gompertz_default_params(), 0, rng), Error);
  auto broken = m;
  broken.rprocess = nullptr;
  EXPECT_THROW(pfilter(broken, gompertz_default_params(), 10, rng), Error);
}
