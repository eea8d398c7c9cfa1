#include "nnrnn/schur.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace nnrnn {

std::string to_string(InitScheme s) {
  switch (s) {
    case InitScheme::Henaff: return "henaff";
    case InitScheme::Cayley: return "cayley";
    case InitScheme::RandomOrth: return "random_orth";
  }
  return "unknown";
}

InitScheme init_scheme_from_string(const std::string& s) {
  if (s == "henaff") return InitScheme::Henaff;
  if (s == "cayley") return InitScheme::Cayley;
  if (s == "random_orth") return InitScheme::RandomOrth;
  throw std::invalid_argument("unknown init scheme: " + s);
}

GammaMode GammaMode::regularized(double delta) {
  if (delta < 0.0) throw std::invalid_argument("GammaMode: delta must be >= 0");
  return {Kind::Regularized, delta};
}

GammaMode GammaMode::clamped(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("GammaMode: clamp value must be > 0");
  return {Kind::Clamped, gamma};
}

void SchurParams::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("SchurParams: " + msg); };
  if (n == 0 || n % 2 != 0) fail("n must be even and positive");
  if (b_skew.rows() != n || b_skew.cols() != n) fail("b_skew has wrong shape");
  if (t_lower.rows() != n || t_lower.cols() != n) fail("t_lower has wrong shape");
  if (gamma.size() != n / 2 || theta.size() != n / 2) fail("gamma/theta must have n/2 entries");
  if (!is_skew_symmetric(b_skew)) fail("b_skew is not skew-symmetric");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!t_entry_is_free(i, j) && t_lower(i, j) != 0.0) fail("t_lower has a non-free nonzero");
  for (double g : gamma)
    if (!(g > 0.0)) fail("gamma entries must be > 0");
}

SchurParamCounts parameter_counts(std::size_t n) {
  const std::size_t tri = n * (n - 1) / 2;
  return {tri, tri - n / 2, n / 2, n / 2};
}

Mat rotation_block(double gamma, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return Mat{{gamma * c, -gamma * s}, {gamma * s, gamma * c}};
}

Mat assemble_theta(const SchurParams& p) {
  Mat th = p.t_lower;
  for (std::size_t k = 0; k < p.n / 2; ++k) {
    const Mat r = rotation_block(p.gamma[k], p.theta[k]);
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b) th(2 * k + a, 2 * k + b) = r(a, b);
  }
  return th;
}

AssembledV assemble_v(const SchurParams& p) {
  AssembledV out;
  out.p = expm(p.b_skew);
  out.theta = assemble_theta(p);
  out.v = matmul_nt(matmul(out.p, out.theta), out.p);
  return out;
}

SchurGrads SchurGrads::zeros(std::size_t n) {
  return {Mat(n, n), std::vector<double>(n / 2, 0.0), std::vector<double>(n / 2, 0.0), Mat(n, n)};
}

SchurGrads& SchurGrads::operator+=(const SchurGrads& other) {
  b_skew += other.b_skew;
  t_lower += other.t_lower;
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    gamma[k] += other.gamma[k];
    theta[k] += other.theta[k];
  }
  return *this;
}

double SchurGrads::squared_norm() const {
  // b_skew counted once per free (lower-half) parameter.
  double s = 0.0;
  for (std::size_t i = 0; i < b_skew.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j) s += b_skew(i, j) * b_skew(i, j);
  for (double v : t_lower.data()) s += v * v;
  for (double v : gamma) s += v * v;
  for (double v : theta) s += v * v;
  return s;
}

SchurGrads backward_v(const SchurParams& p, const Mat& grad_v, const AssembledV& cache,
                      const GammaMode& mode) {
  const std::size_t n = p.n;
  if (grad_v.rows() != n || grad_v.cols() != n || cache.p.rows() != n || cache.theta.rows() != n)
    throw std::invalid_argument("backward_v: dimension mismatch");

  SchurGrads g = SchurGrads::zeros(n);
  // dL/dTheta = P^T G P
  const Mat g_theta = matmul(matmul_tn(cache.p, grad_v), cache.p);

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (t_entry_is_free(i, j)) g.t_lower(i, j) = g_theta(i, j);

  for (std::size_t k = 0; k < n / 2; ++k) {
    const double c = std::cos(p.theta[k]);
    const double s = std::sin(p.theta[k]);
    const std::size_t o = 2 * k;
    const double g00 = g_theta(o, o), g01 = g_theta(o, o + 1);
    const double g10 = g_theta(o + 1, o), g11 = g_theta(o + 1, o + 1);
    if (mode.kind != GammaMode::Kind::Clamped)
      g.gamma[k] = g00 * c - g01 * s + g10 * s + g11 * c;
    g.theta[k] = p.gamma[k] * (-g00 * s - g01 * c + g10 * c - g11 * s);
  }

  // dL/dP = G P Theta^T + G^T P Theta; pulled back through exp via the
  // adjoint Frechet derivative, L*(B, X) = L(B^T, X).
  Mat g_p = matmul_nt(matmul(grad_v, cache.p), cache.theta);
  g_p += matmul(matmul_tn(grad_v, cache.p), cache.theta);
  const Mat m = expm_frechet(transpose(p.b_skew), g_p).deriv;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g.b_skew(i, j) = m(i, j) - m(j, i);
  return g;
}

RegularizerResult regularizer_loss_and_grads(const SchurParams& p, const GammaMode& mode,
                                             double t_decay) {
  if (t_decay < 0.0) throw std::invalid_argument("regularizer: t_decay must be >= 0");
  RegularizerResult r;
  r.grads = SchurGrads::zeros(p.n);
  if (mode.kind == GammaMode::Kind::Regularized) {
    const double delta = mode.value;
    for (std::size_t k = 0; k < p.gamma.size(); ++k) {
      const double d = 1.0 - p.gamma[k];
      r.gamma_term += d * d;
      r.grads.gamma[k] = -2.0 * delta * d;
    }
    r.gamma_term *= delta;
  }
  for (std::size_t i = 0; i < p.n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double t = p.t_lower(i, j);
      r.t_term += t * t;
      r.grads.t_lower(i, j) = 2.0 * t_decay * t;
    }
  r.t_term *= t_decay;
  r.loss = r.gamma_term + r.t_term;
  return r;
}

SchurParams init_params(std::size_t n, InitScheme scheme, std::uint64_t seed) {
  if (n == 0 || n % 2 != 0) throw std::invalid_argument("init_params: n must be even and positive");
  constexpr double pi = std::numbers::pi;
  std::mt19937_64 rng(seed);
  SchurParams p;
  p.n = n;
  p.scheme = scheme;
  p.seed = seed;
  p.gamma.assign(n / 2, 1.0);
  p.theta.resize(n / 2);
  p.t_lower = Mat(n, n);
  p.b_skew = Mat(n, n);

  std::uniform_real_distribution<double> angle(0.0, 2.0 * pi);
  for (double& th : p.theta) th = angle(rng);

  auto set_block = [&](std::size_t k, double s) {
    p.b_skew(2 * k, 2 * k + 1) = -s;
    p.b_skew(2 * k + 1, 2 * k) = s;
  };
  switch (scheme) {
    case InitScheme::Henaff: {
      std::uniform_real_distribution<double> u(-pi, pi);
      for (std::size_t k = 0; k < n / 2; ++k) set_block(k, u(rng));
      break;
    }
    case InitScheme::Cayley: {
      std::uniform_real_distribution<double> uu(0.0, 0.5);
      std::uniform_real_distribution<double> uv(-1.0, 1.0);
      for (std::size_t k = 0; k < n / 2; ++k) {
        const double u = uu(rng);
        const double v = uv(rng);
        double s = std::sqrt(u / (1.0 - u)) * (v < 0.0 ? -1.0 : 1.0);
        s = std::clamp(s, -pi, pi);
        set_block(k, s);
      }
      break;
    }
    case InitScheme::RandomOrth: {
      std::normal_distribution<double> gauss(0.0, 1.0);
      Mat g(n, n);
      for (double& v : g.data()) v = gauss(rng);
      const double scale = 1.0 / std::sqrt(static_cast<double>(n));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) {
          const double s = 0.5 * (g(i, j) - g(j, i)) * scale;
          p.b_skew(i, j) = s;
          p.b_skew(j, i) = -s;
        }
      break;
    }
  }
  return p;
}

double mean_gamma(const SchurParams& p) {
  double s = 0.0;
  for (double g : p.gamma) s += g;
  return p.gamma.empty() ? 0.0 : s / static_cast<double>(p.gamma.size());
}

}  // namespace nnrnn
