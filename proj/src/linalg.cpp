#include "nnrnn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nnrnn {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace

// ---------------------------------------------------------------------------
// Mat

Mat::Mat(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require(r.size() == cols_, "Mat: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat& Mat::operator+=(const Mat& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, "Mat +=: dimension mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Mat& Mat::operator-=(const Mat& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, "Mat -=: dimension mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Mat& Mat::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Mat operator+(Mat a, const Mat& b) { return a += b; }
Mat operator-(Mat a, const Mat& b) { return a -= b; }
Mat operator*(double s, Mat a) { return a *= s; }

// ---------------------------------------------------------------------------
// Products and norms

Mat matmul(const Mat& a, const Mat& b) {
  require(a.cols() == b.rows(), "matmul: dimension mismatch");
  Mat c(a.rows(), b.cols());
  const std::size_t m = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* __restrict crow = c.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const double* __restrict brow = b.row(k).data();
      for (std::size_t j = 0; j < m; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Mat matmul_tn(const Mat& a, const Mat& b) {
  require(a.rows() == b.rows(), "matmul_tn: dimension mismatch");
  Mat c(a.cols(), b.cols());
  const std::size_t m = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* __restrict brow = b.row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      double* __restrict crow = c.row(i).data();
      for (std::size_t j = 0; j < m; ++j) crow[j] += aki * brow[j];
    }
  }
  return c;
}

Mat matmul_nt(const Mat& a, const Mat& b) {
  require(a.cols() == b.cols(), "matmul_nt: dimension mismatch");
  return matmul(a, transpose(b));
}

std::vector<double> matvec(const Mat& a, std::span<const double> x) {
  require(a.cols() == x.size(), "matvec: dimension mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    const auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

Mat transpose(const Mat& a) {
  Mat t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

double frobenius_norm(const Mat& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double norm1(const Mat& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

double max_abs(const Mat& a) {
  double best = 0.0;
  for (double v : a.data()) best = std::max(best, std::abs(v));
  return best;
}

double trace(const Mat& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) s += a(i, i);
  return s;
}

double orthogonality_error(const Mat& a) {
  Mat g = matmul_tn(a, a);
  for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) -= 1.0;
  return frobenius_norm(g);
}

bool all_finite(const Mat& a) {
  return std::all_of(a.data().begin(), a.data().end(), [](double v) { return std::isfinite(v); });
}

Mat skew_part(const Mat& a) {
  require(a.square(), "skew_part: non-square input");
  Mat s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) - a(j, i));
  return s;
}

bool is_skew_symmetric(const Mat& a, double tol) {
  if (!a.square()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j)
      if (std::abs(a(i, j) + a(j, i)) > tol) return false;
  return true;
}

bool is_strictly_lower(const Mat& a) {
  if (!a.square()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j)
      if (a(i, j) != 0.0) return false;
  return true;
}

Mat solve(const Mat& a, const Mat& b) {
  require(a.square() && a.rows() == b.rows(), "solve: dimension mismatch");
  const std::size_t n = a.rows();
  Mat lu = a;
  Mat x = b;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(lu(r, c)) > std::abs(lu(piv, c))) piv = r;
    if (lu(piv, c) == 0.0) throw NumericalError("solve: singular matrix");
    if (piv != c) {
      std::swap_ranges(lu.row(c).begin(), lu.row(c).end(), lu.row(piv).begin());
      std::swap_ranges(x.row(c).begin(), x.row(c).end(), x.row(piv).begin());
    }
    const double inv = 1.0 / lu(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = lu(r, c) * inv;
      if (f == 0.0) continue;
      for (std::size_t j = c + 1; j < n; ++j) lu(r, j) -= f * lu(c, j);
      for (std::size_t j = 0; j < x.cols(); ++j) x(r, j) -= f * x(c, j);
    }
  }
  for (std::size_t c = n; c-- > 0;) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      double s = x(c, j);
      for (std::size_t k = c + 1; k < n; ++k) s -= lu(c, k) * x(k, j);
      x(c, j) = s / lu(c, c);
    }
  }
  return x;
}

// ---------------------------------------------------------------------------
// Matrix exponential

namespace {

// [[d, u], [0, d]] stored by its two distinct blocks.
struct BlockPair {
  Mat d;
  Mat u;
};

Mat mul(const Mat& a, const Mat& b) { return matmul(a, b); }
BlockPair mul(const BlockPair& a, const BlockPair& b) {
  Mat u = matmul(a.d, b.u);
  u += matmul(a.u, b.d);
  return {matmul(a.d, b.d), std::move(u)};
}

void axpy(Mat& y, double s, const Mat& x) {
  auto yd = y.data();
  auto xd = x.data();
  for (std::size_t i = 0; i < yd.size(); ++i) yd[i] += s * xd[i];
}
void axpy(BlockPair& y, double s, const BlockPair& x) {
  axpy(y.d, s, x.d);
  axpy(y.u, s, x.u);
}

void scale(Mat& y, double s) { y *= s; }
void scale(BlockPair& y, double s) {
  y.d *= s;
  y.u *= s;
}

void add_identity(Mat& y, double s) {
  for (std::size_t i = 0; i < y.rows(); ++i) y(i, i) += s;
}
void add_identity(BlockPair& y, double s) { add_identity(y.d, s); }

Mat zero_like(const Mat& a) { return Mat(a.rows(), a.cols()); }
BlockPair zero_like(const BlockPair& a) { return {zero_like(a.d), zero_like(a.u)}; }

Mat solve_lin(const Mat& q, const Mat& p) { return solve(q, p); }
BlockPair solve_lin(const BlockPair& q, const BlockPair& p) {
  // [[qd, qu], [0, qd]] [[xd, xu], [0, xd]] = [[pd, pu], [0, pd]]
  Mat xd = solve(q.d, p.d);
  Mat rhs = p.u - matmul(q.u, xd);
  return {std::move(xd), solve(q.d, rhs)};
}

constexpr double kPade13[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                              1187353796428800.0,  129060195264000.0,   10559470521600.0,
                              670442572800.0,      33522128640.0,       1323241920.0,
                              40840800.0,          960960.0,            16380.0,
                              182.0,               1.0};
constexpr double kTheta13 = 5.371920351148152;

int squaring_count(double norm) {
  if (!(norm > kTheta13)) return 0;
  return static_cast<int>(std::ceil(std::log2(norm / kTheta13)));
}

template <class M>
M pade13_expm(M a, int s) {
  const double* b = kPade13;
  scale(a, std::ldexp(1.0, -s));
  const M a2 = mul(a, a);
  const M a4 = mul(a2, a2);
  const M a6 = mul(a4, a2);

  M inner_u = zero_like(a);
  axpy(inner_u, b[13], a6);
  axpy(inner_u, b[11], a4);
  axpy(inner_u, b[9], a2);
  M poly_u = mul(a6, inner_u);
  axpy(poly_u, b[7], a6);
  axpy(poly_u, b[5], a4);
  axpy(poly_u, b[3], a2);
  add_identity(poly_u, b[1]);
  const M u = mul(a, poly_u);

  M inner_v = zero_like(a);
  axpy(inner_v, b[12], a6);
  axpy(inner_v, b[10], a4);
  axpy(inner_v, b[8], a2);
  M v = mul(a6, inner_v);
  axpy(v, b[6], a6);
  axpy(v, b[4], a4);
  axpy(v, b[2], a2);
  add_identity(v, b[0]);

  M num = v;
  axpy(num, 1.0, u);
  M den = std::move(v);
  axpy(den, -1.0, u);
  M r = solve_lin(den, num);
  for (int i = 0; i < s; ++i) r = mul(r, r);
  return r;
}

}  // namespace

Mat expm(const Mat& b) {
  require(b.square(), "expm: non-square input");
  if (!all_finite(b)) throw NumericalError("expm: non-finite input");
  if (b.empty()) return b;
  return pade13_expm(b, squaring_count(norm1(b)));
}

ExpmFrechet expm_frechet(const Mat& b, const Mat& e) {
  require(b.square() && e.square() && b.rows() == e.rows(), "expm_frechet: dimension mismatch");
  if (!all_finite(b) || !all_finite(e)) throw NumericalError("expm_frechet: non-finite input");
  if (b.empty()) return {b, e};
  // L(b, e) is linear in e, so e is rescaled to the size of b before the
  // Padé evaluation; the squaring count then depends on b alone.
  const double nb = norm1(b);
  const double ne = norm1(e);
  if (ne == 0.0) return {expm(b), Mat(b.rows(), b.cols())};
  const double c = std::max(nb, 1.0) / ne;
  BlockPair r = pade13_expm(BlockPair{b, c * e}, squaring_count(nb));
  r.u *= 1.0 / c;
  return {std::move(r.d), std::move(r.u)};
}

// ---------------------------------------------------------------------------
// Gram-Schmidt

GramSchmidt gram_schmidt_triangular(const Mat& theta) {
  require(theta.square(), "gram_schmidt_triangular: non-square input");
  const std::size_t n = theta.rows();
  std::size_t r = n;
  while (r > 0) {
    bool zero = true;
    for (std::size_t i = 0; i < n && zero; ++i) zero = theta(i, r - 1) == 0.0;
    if (!zero) break;
    --r;
  }

  GramSchmidt gs{Mat(n, r), std::vector<double>(r, 0.0), Mat(r, r)};
  Mat raw(r, r);
  for (std::size_t jj = r; jj-- > 0;) {
    std::vector<double> v(n);
    double col_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = theta(i, jj);
      col_norm += v[i] * v[i];
    }
    col_norm = std::sqrt(col_norm);
    // Two passes of modified Gram-Schmidt keep q orthonormal to rounding.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = jj + 1; k < r; ++k) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += gs.q(i, k) * v[i];
        raw(k, jj) += dot;
        for (std::size_t i = 0; i < n; ++i) v[i] -= dot * gs.q(i, k);
      }
    }
    double nv = 0.0;
    for (double x : v) nv += x * x;
    nv = std::sqrt(nv);
    if (col_norm == 0.0 || nv <= 1e-12 * col_norm)
      throw std::invalid_argument("gram_schmidt_triangular: rank-deficient leading columns");
    raw(jj, jj) = nv;
    for (std::size_t i = 0; i < n; ++i) gs.q(i, jj) = v[i] / nv;
  }
  for (std::size_t i = 0; i < r; ++i) {
    gs.scale[i] = raw(i, i);
    for (std::size_t j = 0; j <= i; ++j) gs.t_gram(i, j) = raw(i, j) / raw(i, i);
  }
  return gs;
}

// ---------------------------------------------------------------------------
// Spectra

std::vector<double> symmetric_eigenvalues(const Mat& s_in) {
  require(s_in.square(), "symmetric_eigenvalues: non-square input");
  if (!all_finite(s_in)) throw NumericalError("symmetric_eigenvalues: non-finite input");
  Mat a = s_in;
  const std::size_t n = a.rows();
  const double scale_ref = std::max(frobenius_norm(a), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * scale_ref) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

std::vector<double> singular_values(const Mat& m) {
  require(!m.empty(), "singular_values: empty matrix");
  if (!all_finite(m)) throw NumericalError("singular_values: non-finite input");
  // Scale first so m^T m cannot overflow.
  const double s = max_abs(m);
  if (s == 0.0) return std::vector<double>(m.cols(), 0.0);
  const Mat ms = (1.0 / s) * m;
  auto ev = symmetric_eigenvalues(matmul_tn(ms, ms));
  std::vector<double> sv(ev.size());
  std::transform(ev.rbegin(), ev.rend(), sv.begin(),
                 [s](double x) { return s * std::sqrt(std::max(x, 0.0)); });
  return sv;
}

double sigma_max(const Mat& m) { return singular_values(m).front(); }

std::vector<std::complex<double>> eigenvalues_small(const Mat& m) {
  require(m.square(), "eigenvalues_small: non-square input");
  if (!all_finite(m)) throw NumericalError("eigenvalues_small: non-finite input");
  const int n = static_cast<int>(m.rows());
  if (n == 0) return {};

  // Triangular input: the spectrum is the diagonal, read exactly. QR on a
  // nilpotent matrix would only recover it to about eps^(1/n).
  bool upper = true, lower = true;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i > j && m(i, j) != 0.0) upper = false;
      if (i < j && m(i, j) != 0.0) lower = false;
    }
  if (upper || lower) {
    std::vector<std::complex<double>> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = m(i, i);
    return diag;
  }

  // 1-based working copy.
  std::vector<std::vector<double>> a(n + 1, std::vector<double>(n + 1, 0.0));
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) a[i][j] = m(i - 1, j - 1);

  // Reduction to upper Hessenberg form by stabilised elimination.
  for (int mm = 2; mm < n; ++mm) {
    double x = 0.0;
    int piv = mm;
    for (int j = mm; j <= n; ++j) {
      if (std::abs(a[j][mm - 1]) > std::abs(x)) {
        x = a[j][mm - 1];
        piv = j;
      }
    }
    if (piv != mm) {
      for (int j = mm - 1; j <= n; ++j) std::swap(a[piv][j], a[mm][j]);
      for (int j = 1; j <= n; ++j) std::swap(a[j][piv], a[j][mm]);
    }
    if (x != 0.0) {
      for (int i = mm + 1; i <= n; ++i) {
        double y = a[i][mm - 1];
        if (y != 0.0) {
          y /= x;
          a[i][mm - 1] = y;
          for (int j = mm; j <= n; ++j) a[i][j] -= y * a[mm][j];
          for (int j = 1; j <= n; ++j) a[j][mm] += y * a[j][i];
        }
      }
    }
  }
  for (int i = 3; i <= n; ++i)
    for (int j = 1; j <= i - 2; ++j) a[i][j] = 0.0;

  // Francis double-shift QR on the Hessenberg matrix.
  std::vector<double> wr(n + 1, 0.0), wi(n + 1, 0.0);
  double anorm = 0.0;
  for (int i = 1; i <= n; ++i)
    for (int j = std::max(i - 1, 1); j <= n; ++j) anorm += std::abs(a[i][j]);

  constexpr int kMaxSweeps = 10000;
  int total = 0;
  int nn = n;
  double t = 0.0;
  double p = 0, q = 0, r = 0, s = 0, w = 0, x = 0, y = 0, z = 0;
  while (nn >= 1) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l >= 2; --l) {
        s = std::abs(a[l - 1][l - 1]) + std::abs(a[l][l]);
        if (s == 0.0) s = anorm;
        if (std::abs(a[l][l - 1]) + s == s) {
          a[l][l - 1] = 0.0;
          break;
        }
      }
      x = a[nn][nn];
      if (l == nn) {
        wr[nn] = x + t;
        wi[nn--] = 0.0;
      } else {
        y = a[nn - 1][nn - 1];
        w = a[nn][nn - 1] * a[nn - 1][nn];
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + w;
          z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + std::copysign(z, p);
            wr[nn - 1] = wr[nn] = x + z;
            if (z != 0.0) wr[nn] = x - w / z;
            wi[nn - 1] = wi[nn] = 0.0;
          } else {
            wr[nn - 1] = wr[nn] = x + p;
            wi[nn - 1] = -(wi[nn] = z);
          }
          nn -= 2;
        } else {
          if (its == 60 || ++total > kMaxSweeps)
            throw NumericalError("eigenvalues_small: QR iteration did not converge");
          if (its == 10 || its == 20 || its == 40) {
            // exceptional shift
            t += x;
            for (int i = 1; i <= nn; ++i) a[i][i] -= x;
            s = std::abs(a[nn][nn - 1]) + std::abs(a[nn - 1][nn - 2]);
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int mm = nn - 2;
          for (; mm >= l; --mm) {
            z = a[mm][mm];
            r = x - z;
            s = y - z;
            p = (r * s - w) / a[mm + 1][mm] + a[mm][mm + 1];
            q = a[mm + 1][mm + 1] - z - r - s;
            r = a[mm + 2][mm + 1];
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (mm == l) break;
            const double u = std::abs(a[mm][mm - 1]) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(a[mm - 1][mm - 1]) + std::abs(z) +
                                            std::abs(a[mm + 1][mm + 1]));
            if (u + v == v) break;
          }
          for (int i = mm + 2; i <= nn; ++i) {
            a[i][i - 2] = 0.0;
            if (i != mm + 2) a[i][i - 3] = 0.0;
          }
          for (int k = mm; k <= nn - 1; ++k) {
            if (k != mm) {
              p = a[k][k - 1];
              q = a[k + 1][k - 1];
              r = 0.0;
              if (k != nn - 1) r = a[k + 2][k - 1];
              if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            if ((s = std::copysign(std::sqrt(p * p + q * q + r * r), p)) != 0.0) {
              if (k == mm) {
                if (l != mm) a[k][k - 1] = -a[k][k - 1];
              } else {
                a[k][k - 1] = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a[k][j] + q * a[k + 1][j];
                if (k != nn - 1) {
                  p += r * a[k + 2][j];
                  a[k + 2][j] -= p * z;
                }
                a[k + 1][j] -= p * y;
                a[k][j] -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a[i][k] + y * a[i][k + 1];
                if (k != nn - 1) {
                  p += z * a[i][k + 2];
                  a[i][k + 2] -= p * r;
                }
                a[i][k + 1] -= p * q;
                a[i][k] -= p;
              }
            }
          }
        }
      }
    } while (l < nn - 1);
  }

  std::vector<std::complex<double>> out;
  out.reserve(n);
  for (int i = 1; i <= n; ++i) out.emplace_back(wr[i], wi[i]);
  return out;
}

}  // namespace nnrnn
