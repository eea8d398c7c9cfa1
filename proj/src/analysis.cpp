#include "nnrnn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nnrnn {

std::size_t Histogram::total() const {
  std::size_t s = 0;
  for (std::size_t c : counts) s += c;
  return s;
}

double Histogram::bin_lo(std::size_t i) const {
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(counts.size());
}

double Histogram::bin_hi(std::size_t i) const { return bin_lo(i + 1); }

Histogram make_histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins) {
  if (bins == 0 || !(hi > lo)) throw std::invalid_argument("make_histogram: bad range");
  Histogram h{lo, hi, std::vector<std::size_t>(bins, 0)};
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : values) {
    const double f = std::floor((v - lo) / width);
    const auto i = static_cast<std::size_t>(std::clamp(f, 0.0, static_cast<double>(bins - 1)));
    ++h.counts[i];
  }
  return h;
}

double ConnectivityReport::nonnormal_ratio() const {
  return theta_frobenius == 0.0 ? 0.0 : t_frobenius / theta_frobenius;
}

ConnectivityReport connectivity_report(const SchurParams& p) {
  p.validate();
  const std::size_t n = p.n;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const AssembledV a = assemble_v(p);

  ConnectivityReport r;
  r.n = n;
  r.mean_gamma = mean_gamma(p);
  r.gamma_histogram = make_histogram(p.gamma, 0.0, kGammaHistMax, kGammaBins);
  std::vector<double> wrapped;
  for (double th : p.theta) {
    double w = std::fmod(th, two_pi);
    if (w < 0.0) w += two_pi;
    wrapped.push_back(w);
  }
  r.theta_histogram = make_histogram(wrapped, 0.0, two_pi, kThetaBins);
  for (std::size_t k = 1; k < n; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) s += std::abs(a.theta(i + k, i));
    r.subdiag_profile.push_back(s / static_cast<double>(n - k));
  }
  r.t_frobenius = frobenius_norm(p.t_lower);
  r.theta_frobenius = frobenius_norm(a.theta);
  r.sigma_max_v = sigma_max(a.v);
  return r;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Normal: return "normal";
    case Regime::Intermediate: return "intermediate";
    case Regime::NonNormal: return "non-normal";
  }
  return "unknown";
}

Regime classify_regime(double ratio) {
  if (ratio <= kNormalRatioMax) return Regime::Normal;
  if (ratio > kNonNormalRatioMin) return Regime::NonNormal;
  return Regime::Intermediate;
}

bool ReportDiff::is_zero() const {
  auto zero = [](const auto& v) {
    return std::all_of(v.begin(), v.end(), [](auto x) { return x == 0; });
  };
  return mean_gamma == 0.0 && t_frobenius == 0.0 && nonnormal_ratio == 0.0 &&
         sigma_max_v == 0.0 && zero(subdiag_profile) && zero(theta_histogram) &&
         zero(gamma_histogram);
}

ReportDiff run_comparison(const ConnectivityReport& a, const ConnectivityReport& b) {
  if (a.n != b.n || a.theta_histogram.counts.size() != b.theta_histogram.counts.size() ||
      a.gamma_histogram.counts.size() != b.gamma_histogram.counts.size())
    throw std::invalid_argument("run_comparison: report size mismatch");
  ReportDiff d;
  d.mean_gamma = b.mean_gamma - a.mean_gamma;
  d.t_frobenius = b.t_frobenius - a.t_frobenius;
  d.nonnormal_ratio = b.nonnormal_ratio() - a.nonnormal_ratio();
  d.sigma_max_v = b.sigma_max_v - a.sigma_max_v;
  for (std::size_t k = 0; k < a.subdiag_profile.size(); ++k)
    d.subdiag_profile.push_back(b.subdiag_profile[k] - a.subdiag_profile[k]);
  auto diff_counts = [](const Histogram& x, const Histogram& y) {
    std::vector<long long> out;
    for (std::size_t i = 0; i < x.counts.size(); ++i)
      out.push_back(static_cast<long long>(y.counts[i]) - static_cast<long long>(x.counts[i]));
    return out;
  };
  d.theta_histogram = diff_counts(a.theta_histogram, b.theta_histogram);
  d.gamma_histogram = diff_counts(a.gamma_histogram, b.gamma_histogram);
  d.regime_a = classify_regime(a.nonnormal_ratio());
  d.regime_b = classify_regime(b.nonnormal_ratio());
  return d;
}

}  // namespace nnrnn
