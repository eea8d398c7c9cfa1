#include "nnrnn/propcheck.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace nnrnn {

namespace {

double bigint_log(const BigInt& v) {
  // cpp_int -> double overflows only far beyond the t <= 30 budget.
  return std::log(v.convert_to<double>());
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n, my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx == 0.0 ? 0.0 : sxy / sxx;
}

}  // namespace

PolyMat prop2_matrix(std::size_t n) {
  if (n < 2) throw std::invalid_argument("prop2_matrix: n must be >= 2");
  PolyMat a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = Poly::constant(1);
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = Poly::monomial(1, 1);
  }
  return a;
}

BigInt binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  BigInt r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Prop2Report verify_prop2(std::size_t n, std::size_t t_max) {
  if (n < 2 || n > 8) throw std::invalid_argument("verify_prop2: n must be in [2, 8]");
  if (t_max < 1 || t_max > 30) throw std::invalid_argument("verify_prop2: t_max must be in [1, 30]");
  Prop2Report rep;
  rep.n = n;
  rep.t_max = t_max;

  const PolyMat a = prop2_matrix(n);
  const Poly x = Poly::monomial(1, 1);
  const Poly one = Poly::constant(1);
  PolyMat p = a;
  std::vector<Poly> prev;  // p_k^(t-1), index k

  for (std::size_t t = 1; t <= t_max; ++t) {
    if (t > 1) p = polymat_mul(p, a);

    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (j < i && !p(i, j).is_zero()) ++rep.structure_failures;
        if (j == i && p(i, j) != one) ++rep.structure_failures;
        if (j > i && p(i, j) != p(0, j - i)) ++rep.structure_failures;
      }

    std::vector<Poly> cur(n);
    for (std::size_t k = 1; k < n; ++k) {
      const Poly& pk = p(0, k);
      cur[k] = pk;
      if (pk.degree() > static_cast<int>(k)) ++rep.degree_failures;
      if (pk.coeff(0) != 0) ++rep.constant_failures;
      for (std::size_t l = 1; l < pk.coeffs().size(); ++l) {
        const BigInt bound = (BigInt(1) << k) * binomial(t, l);
        if (pk.coeff(l) > bound) ++rep.ratio_failures;
        if (bound > 0) {
          const double r = pk.coeff(l).convert_to<double>() / bound.convert_to<double>();
          rep.max_ratio_over_bound = std::max(rep.max_ratio_over_bound, r);
        } else if (pk.coeff(l) != 0) {
          ++rep.ratio_failures;
        }
      }
      if (t == 1 && pk != x) ++rep.recurrence_failures;
      if (t > 1) {
        Poly inner = one;
        for (std::size_t s = 1; s < k; ++s) inner += prev[s];
        if (x * inner + prev[k] != pk) ++rep.recurrence_failures;
      }
      rep.entries.push_back({k, t, pk.degree(), pk.coeffs()});
    }
    prev = std::move(cur);
  }

  // Growth of each coefficient in t over the second half of the range.
  for (std::size_t k = 1; k < n; ++k)
    for (std::size_t l = 1; l <= k; ++l) {
      std::vector<double> lx, ly;
      for (const auto& e : rep.entries) {
        if (e.k != k || e.t < std::max<std::size_t>(l, t_max / 2 + 1)) continue;
        if (l >= e.coeffs.size() || e.coeffs[l] == 0) continue;
        lx.push_back(std::log(static_cast<double>(e.t)));
        ly.push_back(bigint_log(e.coeffs[l]));
      }
      if (lx.size() >= 2) rep.fits.push_back({k, l, ls_slope(lx, ly)});
    }
  return rep;
}

std::string to_string(GrowthClass c) {
  switch (c) {
    case GrowthClass::Constant: return "constant";
    case GrowthClass::Polynomial: return "polynomial";
    case GrowthClass::Exponential: return "exponential";
    case GrowthClass::Decaying: return "decaying";
  }
  return "unknown";
}

GrowthProbe iterate_growth_probe(const Mat& m, std::size_t t_max) {
  if (!m.square() || m.rows() == 0) throw std::invalid_argument("iterate_growth_probe: need square");
  if (t_max < 4) throw std::invalid_argument("iterate_growth_probe: t_max must be >= 4");
  GrowthProbe out;
  Mat p = m;
  for (std::size_t t = 1; t <= t_max; ++t) {
    if (t > 1) p = matmul(p, m);
    if (!all_finite(p)) {
      out.overflow = true;
      break;
    }
    const double s = sigma_max(p);
    if (!std::isfinite(s)) {
      out.overflow = true;
      break;
    }
    out.sigma.push_back(s);
    out.t_reached = t;
  }
  if (out.t_reached < 4) {
    out.growth = GrowthClass::Exponential;
    out.fitted_degree = INFINITY;
    return out;
  }

  std::vector<double> lt, tt, ls;
  for (std::size_t t = out.t_reached / 2; t <= out.t_reached; ++t) {
    const double s = out.sigma[t - 1];
    if (s <= 0.0) continue;  // nilpotent powers
    lt.push_back(std::log(static_cast<double>(t)));
    tt.push_back(static_cast<double>(t));
    ls.push_back(std::log(s));
  }
  if (ls.size() < 2) {
    out.growth = GrowthClass::Decaying;
    out.loglog_slope = -INFINITY;
    out.semilog_slope = -INFINITY;
    return out;
  }
  out.loglog_slope = ls_slope(lt, ls);
  out.semilog_slope = ls_slope(tt, ls);
  out.fitted_degree = out.loglog_slope;
  const double cap = static_cast<double>(m.rows()) - 1.0 + 0.5;
  if (out.overflow || out.loglog_slope > cap)
    out.growth = GrowthClass::Exponential;
  else if (out.loglog_slope > 0.1)
    out.growth = GrowthClass::Polynomial;
  else if (out.loglog_slope < -0.1)
    out.growth = GrowthClass::Decaying;
  else
    out.growth = GrowthClass::Constant;
  return out;
}

std::vector<LabeledGrowthCase> growth_probe_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto random_orthogonal = [&](std::size_t n) {
    Mat b(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) {
        b(i, j) = g(rng);
        b(j, i) = -b(i, j);
      }
    return expm(b);
  };
  auto unit_triangular = [&](std::size_t n, double diag) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      m(i, i) = diag;
      for (std::size_t j = 0; j < i; ++j) {
        const double mag = 0.5 + u(rng);
        m(i, j) = u(rng) < 0.5 ? -mag : mag;
      }
    }
    return m;
  };

  std::vector<LabeledGrowthCase> cases;
  for (std::size_t c = 0; c < 10; ++c) {
    const std::size_t n = 2 + c % 7;
    cases.push_back({"orthogonal_" + std::to_string(c), random_orthogonal(n), GrowthClass::Constant});
  }
  for (std::size_t c = 0; c < 10; ++c) {
    const std::size_t n = 2 + c % 7;
    const double rho = 1.05 + 0.25 * u(rng);
    Mat m;
    if (c % 2 == 0) {
      m = rho * random_orthogonal(n);
    } else {
      // expanding and non-normal: triangular with |diagonal| = rho
      m = unit_triangular(n, 1.0);
      for (std::size_t i = 0; i < n; ++i) m(i, i) = u(rng) < 0.5 ? -rho : rho;
    }
    cases.push_back({"expanding_" + std::to_string(c), m, GrowthClass::Exponential});
  }
  for (std::size_t c = 0; c < 10; ++c) {
    const std::size_t n = 2 + c % 7;
    Mat m = unit_triangular(n, c % 3 == 2 ? -1.0 : 1.0);
    if (c % 2 == 1) {
      // Orthogonal similarity keeps the Jordan structure.
      const Mat q = random_orthogonal(n);
      m = matmul(matmul(q, m), transpose(q));
    }
    cases.push_back({"unit_nonnormal_" + std::to_string(c), m, GrowthClass::Polynomial});
  }
  return cases;
}

}  // namespace nnrnn
