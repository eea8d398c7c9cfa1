#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nnrnn/schur.hpp"

namespace nnrnn {

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;

  std::size_t total() const;
  double bin_lo(std::size_t i) const;
  double bin_hi(std::size_t i) const;
};

/// Equal-width bins over [lo, hi); values outside land in the end bins so
/// every value is counted.
Histogram make_histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins);

inline constexpr std::size_t kThetaBins = 64;
inline constexpr std::size_t kGammaBins = 32;
inline constexpr double kGammaHistMax = 2.0;

struct ConnectivityReport {
  std::size_t n = 0;
  double mean_gamma = 0.0;
  Histogram gamma_histogram;   // 32 bins over [0, 2)
  Histogram theta_histogram;   // 64 bins over [0, 2 pi), angles wrapped
  std::vector<double> subdiag_profile;  // m_k = mean_i |Theta(i+k, i)|, k = 1..n-1
  double t_frobenius = 0.0;
  double theta_frobenius = 0.0;
  double sigma_max_v = 0.0;

  /// ||T||_F / ||Theta||_F
  double nonnormal_ratio() const;
};

ConnectivityReport connectivity_report(const SchurParams& p);

enum class Regime { Normal, Intermediate, NonNormal };
std::string to_string(Regime r);

inline constexpr double kNormalRatioMax = 0.05;
inline constexpr double kNonNormalRatioMin = 0.20;

/// ratio <= 0.05 normal, ratio > 0.20 non-normal, otherwise intermediate.
Regime classify_regime(double ratio);

/// Field-wise b - a.
struct ReportDiff {
  double mean_gamma = 0.0;
  double t_frobenius = 0.0;
  double nonnormal_ratio = 0.0;
  double sigma_max_v = 0.0;
  std::vector<double> subdiag_profile;
  std::vector<long long> theta_histogram;
  std::vector<long long> gamma_histogram;
  Regime regime_a = Regime::Normal;
  Regime regime_b = Regime::Normal;

  bool is_zero() const;
};

ReportDiff run_comparison(const ConnectivityReport& a, const ConnectivityReport& b);

}  // namespace nnrnn
