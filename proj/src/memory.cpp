#include "nnrnn/memory.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace nnrnn {

namespace {

using quad = __float128;

// Square quad matrix, row-major.
struct QMat {
  std::size_t n = 0;
  std::vector<quad> a;

  explicit QMat(std::size_t n_) : n(n_), a(n_ * n_, 0) {}
  quad& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  quad operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

QMat to_quad(const Mat& m) {
  QMat q(m.rows());
  for (std::size_t i = 0; i < m.size(); ++i) q.a[i] = m.data()[i];
  return q;
}

QMat qmul(const QMat& x, const QMat& y) {
  const std::size_t n = x.n;
  QMat z(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const quad xik = x(i, k);
      if (xik == 0) continue;
      quad* zr = &z.a[i * n];
      const quad* yr = &y.a[k * n];
      for (std::size_t j = 0; j < n; ++j) zr[j] += xik * yr[j];
    }
  return z;
}

// x * y^T
QMat qmul_nt(const QMat& x, const QMat& y) {
  const std::size_t n = x.n;
  QMat z(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      quad s = 0;
      const quad* xr = &x.a[i * n];
      const quad* yr = &y.a[j * n];
      for (std::size_t k = 0; k < n; ++k) s += xr[k] * yr[k];
      z(i, j) = s;
    }
  return z;
}

double qfro(const QMat& x) {
  quad s = 0;
  for (quad v : x.a) s += v * v;
  return std::sqrt(static_cast<double>(s));
}

bool qzero(const QMat& x) {
  return std::all_of(x.a.begin(), x.a.end(), [](quad v) { return v == 0; });
}

struct QCovariance {
  QMat c;
  std::size_t terms;
  bool truncated;
};

QCovariance covariance_quad(const Mat& theta, double eps, double tol, std::size_t k_cap) {
  if (!theta.square() || theta.rows() == 0)
    throw std::invalid_argument("noise_covariance: theta must be square and nonempty");
  if (!(eps > 0.0)) throw std::invalid_argument("noise_covariance: eps must be > 0");
  if (!all_finite(theta)) throw NumericalError("noise_covariance: non-finite theta");
  const std::size_t n = theta.rows();
  if (k_cap == 0) k_cap = 10 * n;

  // Invariant: s = sum_{k < m} A^k A^kT, a = A^m.
  QMat s(n);
  for (std::size_t i = 0; i < n; ++i) s(i, i) = 1;
  QMat a = to_quad(theta);
  std::size_t m = 1;
  double prev_term = INFINITY;
  bool truncated = false;
  while (true) {
    if (qzero(a)) break;
    const double term = eps * qfro(qmul_nt(a, a));
    if (m >= n && term < tol) break;
    if (m >= k_cap) {
      if (term > prev_term) throw NumericalError("noise_covariance: series still growing at k_cap");
      truncated = true;
      break;
    }
    prev_term = term;
    QMat asa = qmul_nt(qmul(a, s), a);
    for (std::size_t i = 0; i < s.a.size(); ++i) s.a[i] += asa.a[i];
    a = qmul(a, a);
    m *= 2;
  }
  for (quad& v : s.a) v *= eps;
  return {std::move(s), m, truncated};
}

// In-place LDL^T of a symmetric positive definite matrix: unit-lower L
// below the diagonal, D on the diagonal.
void ldlt(QMat& c) {
  const std::size_t n = c.n;
  for (std::size_t j = 0; j < n; ++j) {
    quad dj = c(j, j);
    for (std::size_t k = 0; k < j; ++k) dj -= c(j, k) * c(j, k) * c(k, k);
    if (!(dj > 0)) throw NumericalError("fisher_memory_curve: covariance is not positive definite");
    c(j, j) = dj;
    for (std::size_t i = j + 1; i < n; ++i) {
      quad v = c(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= c(i, k) * c(j, k) * c(k, k);
      c(i, j) = v / dj;
    }
  }
}

// v^T C^-1 v = sum_i y_i^2 / d_i with L y = v.
quad quadratic_form(const QMat& f, const std::vector<quad>& v) {
  const std::size_t n = f.n;
  std::vector<quad> y(v);
  quad out = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) y[i] -= f(i, k) * y[k];
    out += y[i] * y[i] / f(i, i);
  }
  return out;
}

}  // namespace

void FmcConfig::validate() const {
  if (n < 2) throw std::invalid_argument("FmcConfig: n must be >= 2");
  if (!(eps > 0.0)) throw std::invalid_argument("FmcConfig: eps must be > 0");
  if (d < 0.0 || d >= 1.0) throw std::invalid_argument("FmcConfig: d must lie in [0, 1)");
  if (!(series_tol > 0.0)) throw std::invalid_argument("FmcConfig: series_tol must be > 0");
  if (!std::isfinite(alpha) || !std::isfinite(beta))
    throw std::invalid_argument("FmcConfig: alpha and beta must be finite");
}

Mat build_theta_family(const FmcConfig& cfg) {
  cfg.validate();
  Mat th(cfg.n, cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    th(i, i) = cfg.d;
    if (i >= 1) th(i, i - 1) = cfg.alpha;
    for (std::size_t j = 0; j + 1 < i; ++j) th(i, j) = cfg.beta;
  }
  return th;
}

Mat delay_line(std::size_t n, double alpha) {
  if (n < 1 || !(alpha > 0.0)) throw std::invalid_argument("delay_line: need n >= 1, alpha > 0");
  Mat th(n, n);
  const double a = std::sqrt(alpha);
  for (std::size_t i = 1; i < n; ++i) th(i, i - 1) = a;
  return th;
}

CovarianceResult noise_covariance(const Mat& theta, double eps, double tol, std::size_t k_cap) {
  QCovariance q = covariance_quad(theta, eps, tol, k_cap);
  Mat c(q.c.n, q.c.n);
  for (std::size_t i = 0; i < q.c.a.size(); ++i) c.data()[i] = static_cast<double>(q.c.a[i]);
  return {std::move(c), q.terms, q.truncated};
}

FmcResult fisher_memory_curve(const Mat& theta, double eps, double tol, std::size_t k_max) {
  const std::size_t n = theta.rows();
  const std::size_t k_cap = 10 * n;
  QCovariance cov = covariance_quad(theta, eps, tol, k_cap);
  ldlt(cov.c);

  const QMat th = to_quad(theta);
  std::vector<quad> v(n, 0), next(n);
  v[0] = 1;
  FmcResult r;
  r.covariance_terms = cov.terms;
  r.truncated = cov.truncated;
  quad total = 0;
  bool summing = true;
  for (std::size_t k = 0;; ++k) {
    quad norm2 = 0;
    for (quad x : v) norm2 += x * x;
    if (summing && k >= n && static_cast<double>(norm2) / eps < tol) {
      summing = false;
      r.truncation_terms = k;
    }
    if (summing && k >= k_cap) {
      summing = false;
      r.truncation_terms = k;
      r.truncated = true;
    }
    const bool want_curve = k_max > 0 ? k <= k_max : summing;
    if (!summing && !want_curve) break;

    const double j = norm2 == 0 ? 0.0 : static_cast<double>(quadratic_form(cov.c, v));
    if (!std::isfinite(j)) throw NumericalError("fisher_memory_curve: non-finite J");
    if (want_curve) r.j_curve.push_back(j);
    if (summing) total += j;

    for (std::size_t i = 0; i < n; ++i) {
      quad s = 0;
      for (std::size_t c = 0; c < n; ++c) s += th(i, c) * v[c];
      next[i] = s;
    }
    v.swap(next);
  }
  r.j_tot = static_cast<double>(total);
  return r;
}

FmcResult fisher_memory_curve(const FmcConfig& cfg) {
  cfg.validate();
  return fisher_memory_curve(build_theta_family(cfg), cfg.eps, cfg.series_tol, cfg.k_max);
}

double delay_line_fmc_closed_form(double alpha, std::size_t k) {
  if (!(alpha > 0.0)) throw std::invalid_argument("delay_line_fmc_closed_form: alpha must be > 0");
  if (alpha == 1.0) return 1.0 / static_cast<double>(k + 1);
  // alpha^k (alpha-1)/(alpha^(k+1)-1) = (alpha-1)/(alpha - alpha^-k); expm1
  // keeps precision near alpha = 1.
  const double la = std::log(alpha);
  return la == 0.0 ? 1.0 / static_cast<double>(k + 1)
                   : std::exp(static_cast<double>(k) * la) * std::expm1(la) /
                         std::expm1(static_cast<double>(k + 1) * la);
}

Mat random_prop1_theta(std::size_t n, double alpha, double scale, std::mt19937_64& rng) {
  if (!(alpha > 0.0)) throw std::invalid_argument("random_prop1_theta: alpha must be positive");
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat th(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j + 1 < i; ++j) th(i, j) = scale * u(rng);
  for (std::size_t i = 1; i < n; ++i) th(i, i - 1) = std::sqrt(alpha);
  return th;
}

void Prop1SweepConfig::validate() const {
  if (n_min < 2 || n_max < n_min) throw std::invalid_argument("Prop1SweepConfig: need 2 <= n_min <= n_max");
  if (alphas.empty() && trials > 0) throw std::invalid_argument("Prop1SweepConfig: no alphas");
  for (double a : alphas)
    if (!(a > 0.0)) throw std::invalid_argument("Prop1SweepConfig: alpha must be positive");
  if (!(eps > 0.0) || !(scale >= 0.0)) throw std::invalid_argument("Prop1SweepConfig: bad eps or scale");
}

std::vector<Prop1Report> prop1_sweep(const Prop1SweepConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick_n(cfg.n_min, cfg.n_max);
  std::vector<Prop1Report> out;
  for (std::size_t i = 0; i < cfg.trials; ++i) {
    const double a = cfg.alphas[i % cfg.alphas.size()];
    const std::size_t n = pick_n(rng);
    out.push_back(prop1_bound_check(random_prop1_theta(n, a, cfg.scale, rng), cfg.eps));
  }
  return out;
}

Prop1Report prop1_bound_check(const Mat& theta, double eps) {
  const std::size_t n = theta.rows();
  if (!theta.square() || n < 2) throw std::invalid_argument("prop1_bound_check: need square n >= 2");
  if (!is_strictly_lower(theta))
    throw std::invalid_argument("prop1_bound_check: theta must be strictly lower triangular");
  const double sub = theta(1, 0);
  if (!(sub > 0.0)) throw std::invalid_argument("prop1_bound_check: sub-diagonal must be > 0");
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(theta(i, i - 1) - sub) > 1e-15 * sub)
      throw std::invalid_argument("prop1_bound_check: sub-diagonal must be constant");

  Prop1Report rep;
  rep.n = n;
  rep.alpha = sub * sub;
  const GramSchmidt gs = gram_schmidt_triangular(theta);
  // The full factor is blockdiag(t_gram, 1), so its norm is at least one.
  rep.sigma_max = std::max(sigma_max(gs.t_gram), 1.0);

  const FmcResult fmc = fisher_memory_curve(theta, eps, 1e-12, n - 1);
  const double denom = eps * std::pow(rep.sigma_max, 2.0 * static_cast<double>(n - 1));
  for (std::size_t k = 0; k < n; ++k) {
    const double b = delay_line_fmc_closed_form(rep.alpha, k) / denom;
    const double j = fmc.j_curve[k];
    rep.j.push_back(j);
    rep.bound.push_back(b);
    rep.margin.push_back(j - b);
    if (j - b < -1e-9 * std::max(1.0, b)) ++rep.violations;
  }
  return rep;
}

TransientStats transient_ensemble(const Mat& theta, std::size_t n_samples, std::size_t t_max,
                                  std::uint64_t seed) {
  if (n_samples == 0) throw std::invalid_argument("transient_ensemble: n_samples must be >= 1");
  if (!theta.square() || theta.rows() == 0)
    throw std::invalid_argument("transient_ensemble: theta must be square");
  const std::size_t n = theta.rows();

  // Column s of h is sample s.
  Mat h(n, n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> x(n);
    double nrm = 0.0;
    while (nrm == 0.0) {
      nrm = 0.0;
      for (double& v : x) {
        v = g(rng);
        nrm += v * v;
      }
      nrm = std::sqrt(nrm);
    }
    for (std::size_t i = 0; i < n; ++i) h(i, s) = x[i] / nrm;
  }

  TransientStats out;
  auto mean_std = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::pair{m, std::sqrt(s / static_cast<double>(v.size()))};
  };
  std::vector<double> unit_std(n_samples), norms(n_samples);
  for (std::size_t t = 0; t <= t_max; ++t) {
    for (std::size_t s = 0; s < n_samples; ++s) {
      double sum = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sum += h(i, s);
        sq += h(i, s) * h(i, s);
      }
      const double mean = sum / static_cast<double>(n);
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) var += (h(i, s) - mean) * (h(i, s) - mean);
      unit_std[s] = std::sqrt(var / static_cast<double>(n));
      norms[s] = std::sqrt(sq);
    }
    const auto [mu, su] = mean_std(unit_std);
    const auto [mn, sn] = mean_std(norms);
    out.mean_unit_std.push_back(mu);
    out.std_unit_std.push_back(su);
    out.mean_norm.push_back(mn);
    out.std_norm.push_back(sn);
    if (t < t_max) h = matmul(theta, h);
  }
  return out;
}

TransientStats transient_ensemble(const FmcConfig& cfg, std::size_t n_samples, std::size_t t_max,
                                  std::uint64_t seed) {
  return transient_ensemble(build_theta_family(cfg), n_samples, t_max, seed);
}

}  // namespace nnrnn
