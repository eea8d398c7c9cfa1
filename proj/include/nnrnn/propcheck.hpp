#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nnrnn/linalg.hpp"
#include "nnrnn/polymat.hpp"

namespace nnrnn {

/// Unit diagonal, x strictly above, zero below.
PolyMat prop2_matrix(std::size_t n);

/// p_k^(t): the entry at gap k above the diagonal of A^t.
struct Prop2Entry {
  std::size_t k = 0;
  std::size_t t = 0;
  int degree = -1;
  std::vector<BigInt> coeffs;
};

struct CoeffGrowthFit {
  std::size_t k = 0;
  std::size_t l = 0;
  double slope = 0.0;  // least-squares slope of log coeff(x^l) vs log t
};

struct Prop2Report {
  std::size_t n = 0;
  std::size_t t_max = 0;
  std::vector<Prop2Entry> entries;  // every (k, t), k = 1..n-1, t = 1..t_max
  std::vector<CoeffGrowthFit> fits;

  std::size_t degree_failures = 0;
  std::size_t constant_failures = 0;
  std::size_t recurrence_failures = 0;
  std::size_t ratio_failures = 0;     // coeff(x^l) > 2^k binom(t, l)
  std::size_t structure_failures = 0;  // not Toeplitz, unit diagonal, zero below
  double max_ratio_over_bound = 0.0;   // max coeff / (2^k binom(t, l))

  bool passed() const {
    return degree_failures + constant_failures + recurrence_failures + ratio_failures +
               structure_failures ==
           0;
  }
};

/// Exact checks on A^t for t = 1..t_max: degree <= k, zero constant term,
///   p_k^(r+1) = x (1 + sum_{s<k} p_s^(r)) + p_k^(r),
/// and coeff(x^l) <= 2^k binom(t, l).
Prop2Report verify_prop2(std::size_t n, std::size_t t_max);

BigInt binomial(std::size_t n, std::size_t k);

enum class GrowthClass { Constant, Polynomial, Exponential, Decaying };
std::string to_string(GrowthClass c);

struct GrowthProbe {
  std::vector<double> sigma;  // sigma_max(m^t), t = 1..t_reached
  std::size_t t_reached = 0;
  bool overflow = false;
  double loglog_slope = 0.0;   // log sigma vs log t, second half of the range
  double semilog_slope = 0.0;  // log sigma vs t, same range
  double fitted_degree = 0.0;
  GrowthClass growth = GrowthClass::Constant;
};

/// Constant when |loglog slope| <= 0.1, Decaying below -0.1, Polynomial up
/// to the cap n - 1 + 0.5, Exponential above it.
GrowthProbe iterate_growth_probe(const Mat& m, std::size_t t_max);

struct LabeledGrowthCase {
  std::string name;
  Mat m;
  GrowthClass expected;
};

/// 30 deterministic cases, 10 each of orthogonal, expanding, and
/// unit-eigenvalue non-normal triangular matrices (n = 2..8).
std::vector<LabeledGrowthCase> growth_probe_suite(std::uint64_t seed = 0);

}  // namespace nnrnn
