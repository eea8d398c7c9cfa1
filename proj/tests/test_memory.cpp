#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "nnrnn/memory.hpp"

using namespace nnrnn;

namespace {

FmcConfig family(double alpha, double beta, double d, std::size_t n = 100) {
  FmcConfig c;
  c.n = n;
  c.alpha = alpha;
  c.beta = beta;
  c.d = d;
  return c;
}

Mat random_sqrt_alpha(std::size_t n, double alpha, double scale, std::mt19937_64& rng) {
  return random_prop1_theta(n, alpha, scale, rng);
}

}  // namespace

TEST(ThetaFamily, Construction) {
  FmcConfig c = family(1.0, 0.5, 0.2, 3);
  const Mat want{{0.2, 0, 0}, {1, 0.2, 0}, {0.5, 1, 0.2}};
  EXPECT_EQ(build_theta_family(c), want);
  c = family(0.9, 0.0, 0.0, 5);
  const Mat th = build_theta_family(c);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(th(i, j), i == j + 1 ? 0.9 : 0.0);
}

TEST(ThetaFamily, NilpotentWithoutDiagonal) {
  const Mat th = build_theta_family(family(1.05, 0.3, 0.0, 12));
  Mat p = th;
  for (int k = 1; k < 12; ++k) p = matmul(p, th);
  EXPECT_EQ(max_abs(p), 0.0);
}

TEST(ThetaFamily, RejectsBadConfig) {
  EXPECT_THROW(build_theta_family(family(1.0, 0.0, 1.0)), std::invalid_argument);
  EXPECT_THROW(build_theta_family(family(1.0, 0.0, 0.0, 1)), std::invalid_argument);
  FmcConfig c = family(1.0, 0.0, 0.0);
  c.eps = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(NoiseCovariance, ZeroTheta) {
  const auto r = noise_covariance(Mat(4, 4), 2.5);
  EXPECT_EQ(r.c, 2.5 * Mat::identity(4));
}

TEST(NoiseCovariance, TwoByTwoDelayLine) {
  const double a = 0.7;
  const auto r = noise_covariance(delay_line(2, a), 1.5);
  EXPECT_NEAR(r.c(0, 0), 1.5, 1e-15);
  EXPECT_NEAR(r.c(1, 1), 1.5 * (1 + a), 1e-15);
  EXPECT_EQ(r.c(0, 1), 0.0);
}

TEST(NoiseCovariance, DelayLineGeometricDiagonal) {
  for (double a : {0.9, 1.0, 1.1}) {
    const auto r = noise_covariance(delay_line(20, a), 1.0);
    for (std::size_t i = 0; i < 20; ++i) {
      const double want = a == 1.0 ? static_cast<double>(i + 1)
                                   : (1 - std::pow(a, static_cast<double>(i + 1))) / (1 - a);
      EXPECT_NEAR(r.c(i, i), want, 1e-12 * want);
      for (std::size_t j = 0; j < i; ++j) EXPECT_EQ(r.c(i, j), 0.0);
    }
  }
}

TEST(NoiseCovariance, MatchesDirectSumForContraction) {
  const Mat th = build_theta_family(family(0.8, 0.1, 0.3, 6));
  Mat direct = Mat::identity(6), p = Mat::identity(6);
  for (int k = 1; k < 400; ++k) {
    p = matmul(th, p);
    direct += matmul_nt(p, p);
  }
  const auto r = noise_covariance(th, 1.0);
  EXPECT_LT(frobenius_norm(r.c - direct), 1e-10 * frobenius_norm(direct));
  EXPECT_GE(r.terms, 6u);
  EXPECT_FALSE(r.truncated);
}

TEST(NoiseCovariance, DivergentSeriesThrows) {
  EXPECT_THROW(noise_covariance(1.01 * Mat::identity(3), 1.0), NumericalError);
}

TEST(ClosedForm, Values) {
  EXPECT_DOUBLE_EQ(delay_line_fmc_closed_form(0.7, 0), 1.0);
  EXPECT_DOUBLE_EQ(delay_line_fmc_closed_form(1.3, 0), 1.0);
  EXPECT_NEAR(delay_line_fmc_closed_form(2.0, 1), 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(delay_line_fmc_closed_form(1.0, 3), 0.25);
  // continuity at alpha = 1
  EXPECT_NEAR(delay_line_fmc_closed_form(1.0 + 1e-12, 3), 0.25, 1e-10);
}

TEST(Fmc, DelayLineMatchesClosedForm) {
  for (double a : {0.95, 1.0, 1.05}) {
    for (std::size_t n : {2u, 10u, 100u}) {
      const FmcResult r = fisher_memory_curve(delay_line(n, a), 1.0);
      ASSERT_GE(r.j_curve.size(), n);
      for (std::size_t k = 0; k < n; ++k) {
        const double want = delay_line_fmc_closed_form(a, k);
        EXPECT_LE(std::abs(r.j_curve[k] - want), 1e-8 * want) << "a=" << a << " k=" << k;
      }
    }
  }
}

TEST(Fmc, FirstValueIsInverseEps) {
  const FmcResult r = fisher_memory_curve(delay_line(8, 0.9), 4.0);
  EXPECT_NEAR(r.j_curve[0], 0.25, 1e-15);
}

TEST(Fmc, NilpotentErasesMemory) {
  FmcConfig c = family(1.0, 0.005, 0.0, 30);
  c.k_max = 60;
  const FmcResult r = fisher_memory_curve(c);
  ASSERT_EQ(r.j_curve.size(), 61u);
  for (std::size_t k = 30; k <= 60; ++k) EXPECT_EQ(r.j_curve[k], 0.0);
  for (std::size_t k = 0; k < 30; ++k) EXPECT_GT(r.j_curve[k], 0.0);
}

TEST(Fmc, DiagonalExtendsMemory) {
  FmcConfig c = family(1.0, 0.0, 0.2, 30);
  c.k_max = 60;
  const FmcResult r = fisher_memory_curve(c);
  for (std::size_t k = 30; k <= 60; ++k) EXPECT_GT(r.j_curve[k], 0.0);
}

TEST(Fmc, NonNegativeAcrossFamily) {
  for (double a : {0.9, 1.0, 1.1})
    for (double b : {0.0, 0.01})
      for (double d : {0.0, 0.1, 0.3}) {
        const FmcResult r = fisher_memory_curve(family(a, b, d, 40));
        for (double j : r.j_curve) EXPECT_GE(j, 0.0);
      }
}

// Exact J_tot values from an independent 300-bit evaluation of the same
// sums (Lyapunov doubling plus LU solves in MPFR).
TEST(Fmc, TotalsMatchHighPrecisionReference) {
  struct Row {
    double a, b, d, jtot;
  };
  const Row rows[] = {{0.95, 0.0, 0.0, 3.0327}, {1.0, 0.0, 0.0, 5.1874},
                      {1.05, 0.0, 0.0, 12.0873}, {1.05, 0.005, 0.0, 12.0865},
                      {0.95, 0.0, 0.2, 11.9394}, {1.05, 0.005, 0.2, 20.8847}};
  for (const Row& r : rows) {
    const FmcResult f = fisher_memory_curve(family(r.a, r.b, r.d));
    EXPECT_NEAR(f.j_tot, r.jtot, 1e-4) << r.a << " " << r.b << " " << r.d;
  }
}

TEST(Fmc, TruncationAtLeastN) {
  const FmcResult r = fisher_memory_curve(family(1.0, 0.0, 0.2, 20));
  EXPECT_GE(r.truncation_terms, 20u);
  EXPECT_FALSE(r.truncated);
}

TEST(Prop1, DelayLineHasEquality) {
  for (double a : {0.9, 1.0, 1.1}) {
    const Prop1Report r = prop1_bound_check(delay_line(12, a));
    EXPECT_DOUBLE_EQ(r.sigma_max, 1.0);
    EXPECT_TRUE(r.holds());
    for (std::size_t k = 0; k < 12; ++k) EXPECT_NEAR(r.margin[k], 0.0, 1e-12);
  }
}

TEST(Prop1, SmallPerturbationKeepsSigmaNearOne) {
  std::mt19937_64 rng(3);
  const Prop1Report r = prop1_bound_check(random_sqrt_alpha(10, 1.0, 1e-4, rng));
  EXPECT_TRUE(r.holds());
  EXPECT_LT(r.sigma_max, 1.001);
}

TEST(Prop1, RandomSweepHolds) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = trial % 3 == 0 ? 0.9 : (trial % 3 == 1 ? 1.0 : 1.1);
    const Prop1Report r = prop1_bound_check(random_sqrt_alpha(8, a, 0.5, rng));
    EXPECT_TRUE(r.holds()) << "trial " << trial;
    EXPECT_GE(r.sigma_max, 1.0);
  }
}

TEST(Prop1, RejectsBadInput) {
  Mat th = delay_line(5, 1.0);
  th(0, 1) = 0.1;
  EXPECT_THROW(prop1_bound_check(th), std::invalid_argument);
  th = delay_line(5, 1.0);
  th(3, 2) = 0.5;
  EXPECT_THROW(prop1_bound_check(th), std::invalid_argument);
}

TEST(Transients, NilpotentStatisticsVanish) {
  const TransientStats s = transient_ensemble(family(1.05, 0.005, 0.0, 20), 50, 40, 1);
  ASSERT_EQ(s.mean_norm.size(), 41u);
  EXPECT_NEAR(s.mean_norm[0], 1.0, 1e-14);
  for (std::size_t t = 20; t <= 40; ++t) {
    EXPECT_EQ(s.mean_norm[t], 0.0);
    EXPECT_EQ(s.std_norm[t], 0.0);
    EXPECT_EQ(s.mean_unit_std[t], 0.0);
    EXPECT_EQ(s.std_unit_std[t], 0.0);
  }
}

TEST(Transients, ShiftOperatorDropsTail) {
  // alpha = 1 shift: ||h_t||^2 is the mass of the first n - t entries.
  const std::size_t n = 16;
  const Mat shift = build_theta_family(family(1.0, 0.0, 0.0, n));
  const TransientStats s = transient_ensemble(shift, 1, n, 9);
  for (std::size_t t = 1; t <= n; ++t) EXPECT_LE(s.mean_norm[t], s.mean_norm[t - 1]);
}

TEST(Transients, SeedDeterminismAndIndependence) {
  const Mat th = build_theta_family(family(1.0, 0.01, 0.0, 10));
  const TransientStats a = transient_ensemble(th, 5, 12, 77);
  const TransientStats b = transient_ensemble(th, 5, 12, 77);
  EXPECT_EQ(a.mean_norm, b.mean_norm);
  EXPECT_EQ(a.std_unit_std, b.std_unit_std);
  // Sample i does not depend on how many samples are drawn.
  const TransientStats one = transient_ensemble(th, 1, 12, 77);
  const TransientStats two = transient_ensemble(th, 2, 12, 77);
  for (std::size_t t = 0; t <= 12; ++t) {
    const double lo = two.mean_norm[t] - two.std_norm[t];
    const double hi = two.mean_norm[t] + two.std_norm[t];
    EXPECT_LT(std::min(std::abs(one.mean_norm[t] - lo), std::abs(one.mean_norm[t] - hi)), 1e-12);
  }
  EXPECT_THROW(transient_ensemble(th, 0, 12, 1), std::invalid_argument);
}

TEST(Transients, LargerAlphaLargerPeak) {
  double peaks[3];
  const double alphas[3] = {0.95, 1.0, 1.05};
  for (int i = 0; i < 3; ++i) {
    const TransientStats s = transient_ensemble(family(alphas[i], 0.0, 0.0, 100), 1000, 120, 5);
    peaks[i] = *std::max_element(s.mean_norm.begin() + 1, s.mean_norm.end());
  }
  EXPECT_GT(peaks[2], peaks[1]);
  EXPECT_GT(peaks[1], peaks[0]);
}

TEST(Prop1, SweepHoldsEverywhere) {
  Prop1SweepConfig cfg;
  cfg.trials = 60;
  const auto reports = prop1_sweep(cfg);
  ASSERT_EQ(reports.size(), 60u);
  for (const auto& r : reports) {
    EXPECT_TRUE(r.holds()) << r.n << " " << r.alpha;
    EXPECT_GE(r.n, 2u);
    EXPECT_LE(r.n, 12u);
  }
  EXPECT_EQ(reports[1].alpha, 1.0);
}

TEST(Prop1, SweepRejectsBadConfig) {
  Prop1SweepConfig cfg;
  cfg.n_min = 1;
  EXPECT_THROW(prop1_sweep(cfg), std::invalid_argument);
  cfg = {};
  cfg.alphas = {};
  EXPECT_THROW(prop1_sweep(cfg), std::invalid_argument);
}
