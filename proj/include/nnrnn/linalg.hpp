#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nnrnn {

/// Raised when a numerical routine cannot produce a trustworthy answer
/// (non-convergence, non-finite values, divergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of doubles.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0);
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  static Mat identity(std::size_t n);
  static Mat zeros(std::size_t rows, std::size_t cols) { return Mat(rows, cols); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  Mat& operator+=(const Mat& other);
  Mat& operator-=(const Mat& other);
  Mat& operator*=(double s);

  friend bool operator==(const Mat&, const Mat&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator*(double s, Mat a);

/// Matrix product. Loop order is fixed (i, k, j) so results are reproducible.
Mat matmul(const Mat& a, const Mat& b);
/// a^T * b without forming the transpose.
Mat matmul_tn(const Mat& a, const Mat& b);
/// a * b^T without forming the transpose.
Mat matmul_nt(const Mat& a, const Mat& b);
std::vector<double> matvec(const Mat& a, std::span<const double> x);

Mat transpose(const Mat& a);
double frobenius_norm(const Mat& a);
double norm1(const Mat& a);  // max column sum
double max_abs(const Mat& a);
double trace(const Mat& a);
/// ||a^T a - I||_F
double orthogonality_error(const Mat& a);
bool all_finite(const Mat& a);

/// (a - a^T) / 2
Mat skew_part(const Mat& a);
bool is_skew_symmetric(const Mat& a, double tol = 0.0);
bool is_strictly_lower(const Mat& a);

/// Solves a x = b (b may have several columns) by LU with partial pivoting.
Mat solve(const Mat& a, const Mat& b);

/// Matrix exponential by scaling and squaring with the degree-13 Padé
/// approximant. The squaring count is derived from ||b||_1.
Mat expm(const Mat& b);

struct ExpmFrechet {
  Mat exp;    // exp(b)
  Mat deriv;  // L(b, e), directional derivative of exp at b along e
};

/// exp(b) together with its Fréchet derivative in direction e, read off the
/// top-right block of exp([[b, e], [0, b]]). The doubled matrix is never
/// formed: its powers stay block upper-triangular with equal diagonal
/// blocks, so each product costs three n x n products instead of eight.
ExpmFrechet expm_frechet(const Mat& b, const Mat& e);

struct GramSchmidt {
  Mat q;        // n x r, orthonormal columns
  std::vector<double> scale;  // diagonal of the raw triangular factor
  Mat t_gram;   // r x r lower triangular, unit diagonal
};

/// Gram-Schmidt on the columns of theta, processed from the last nonzero
/// column towards the first, so that
///   theta[:, :r] = q * diag(scale) * t_gram
/// with t_gram lower triangular. Trailing all-zero columns are dropped
/// (a strictly lower-triangular N x N matrix uses at most N-1 columns).
/// Throws std::invalid_argument if the retained columns are dependent.
GramSchmidt gram_schmidt_triangular(const Mat& theta);

/// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
std::vector<double> symmetric_eigenvalues(const Mat& s);

/// Singular values in descending order from the eigenvalues of m^T m.
std::vector<double> singular_values(const Mat& m);
double sigma_max(const Mat& m);

/// All eigenvalues of a small square matrix (Hessenberg reduction followed
/// by Francis double-shift QR). Intended for verification at N <= 64.
std::vector<std::complex<double>> eigenvalues_small(const Mat& m);

}  // namespace nnrnn
