#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "nnrnn/linalg.hpp"

namespace nnrnn {

/// Lower-triangular Toeplitz family: d on the diagonal, alpha on the first
/// sub-diagonal, beta on every entry further below.
struct FmcConfig {
  std::size_t n = 100;
  double d = 0.0;
  double alpha = 1.0;
  double beta = 0.0;
  double eps = 1.0;
  std::size_t k_max = 0;  // 0: curve runs until the series is truncated
  double series_tol = 1e-12;

  void validate() const;
};

Mat build_theta_family(const FmcConfig& cfg);

/// Feed-forward chain with sqrt(alpha) on the sub-diagonal.
Mat delay_line(std::size_t n, double alpha);

struct CovarianceResult {
  Mat c;
  std::size_t terms = 0;   // number of powers summed
  bool truncated = false;  // hit k_cap with terms above tol
};

/// C = eps * sum_k theta^k (theta^k)^T, accumulated in quad precision by
/// doubling (S <- S + A S A^T, A <- A^2) until the next power has
/// eps * ||A A^T||_F < tol and at least n powers are in the sum.
/// Throws NumericalError when the terms are still growing at k_cap.
CovarianceResult noise_covariance(const Mat& theta, double eps, double tol = 1e-12,
                                  std::size_t k_cap = 0);

struct FmcResult {
  std::vector<double> j_curve;
  double j_tot = 0.0;
  std::size_t truncation_terms = 0;  // terms summed into j_tot
  std::size_t covariance_terms = 0;
  bool truncated = false;
};

/// J(k) = e1^T (theta^k)^T C^-1 theta^k e1. The covariance is factored once
/// (LDL^T in quad precision) and reused for every k. j_tot stops once
/// k >= n and ||theta^k e1||^2 / eps < tol, which bounds J(k) since C >= eps I.
FmcResult fisher_memory_curve(const Mat& theta, double eps, double tol = 1e-12,
                              std::size_t k_max = 0);
FmcResult fisher_memory_curve(const FmcConfig& cfg);

/// alpha^k (alpha - 1) / (alpha^(k+1) - 1), and 1/(k+1) at alpha = 1.
double delay_line_fmc_closed_form(double alpha, std::size_t k);

struct Prop1Report {
  std::size_t n = 0;
  double alpha = 0.0;
  double sigma_max = 0.0;
  std::vector<double> j;      // k = 0..n-1
  std::vector<double> bound;
  std::vector<double> margin;  // j - bound
  std::size_t violations = 0;  // margin < -1e-9 * max(1, bound)
  bool holds() const { return violations == 0; }
};

/// Checks J(k) >= alpha^k (alpha-1)/(alpha^(k+1)-1) / (eps * s^(2(n-1)))
/// for k < n, where s is the largest singular value of the unit
/// lower-triangular factor of theta relative to the delay line. Requires
/// theta strictly lower triangular with a constant positive sub-diagonal.
Prop1Report prop1_bound_check(const Mat& theta, double eps = 1.0);

/// Strictly lower triangular with sqrt(alpha) on the sub-diagonal and
/// uniform(-scale, scale) entries further below.
Mat random_prop1_theta(std::size_t n, double alpha, double scale, std::mt19937_64& rng);

struct Prop1SweepConfig {
  std::size_t trials = 200;
  std::size_t n_min = 2;
  std::size_t n_max = 12;
  std::vector<double> alphas{0.9, 1.0, 1.1};
  double scale = 0.5;
  double eps = 1.0;
  std::uint64_t seed = 0;
  void validate() const;
};

/// Trial i uses alpha = alphas[i % size] and n drawn uniformly from
/// [n_min, n_max].
std::vector<Prop1Report> prop1_sweep(const Prop1SweepConfig& cfg);

struct TransientStats {
  // Indexed by t = 0..t_max. "unit_std" is the population standard
  // deviation across hidden units of one trajectory; mean/std are then
  // taken over samples.
  std::vector<double> mean_unit_std, std_unit_std;
  std::vector<double> mean_norm, std_norm;
};

/// Simulates h_{t+1} = theta h_t from n_samples unit-sphere initial states.
/// Sample i draws from its own stream seeded by (seed, i).
TransientStats transient_ensemble(const Mat& theta, std::size_t n_samples, std::size_t t_max,
                                  std::uint64_t seed);
TransientStats transient_ensemble(const FmcConfig& cfg, std::size_t n_samples, std::size_t t_max,
                                  std::uint64_t seed);

}  // namespace nnrnn
