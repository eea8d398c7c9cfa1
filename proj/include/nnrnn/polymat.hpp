#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <string>
#include <vector>

namespace nnrnn {

using BigInt = boost::multiprecision::cpp_int;

/// Polynomial in one variable with arbitrary-precision integer
/// coefficients, lowest degree first. Never carries trailing zeros, so the
/// zero polynomial has an empty coefficient list.
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<BigInt> coeffs);

  static Poly constant(BigInt c);
  static Poly monomial(BigInt c, std::size_t degree);

  const std::vector<BigInt>& coeffs() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }
  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  /// Coefficient of x^l (zero beyond the degree).
  BigInt coeff(std::size_t l) const;
  double eval(double x) const;
  BigInt eval(const BigInt& x) const;
  std::string to_string() const;

  Poly& operator+=(const Poly& other);
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator*(const Poly& a, const Poly& b);
  friend bool operator==(const Poly&, const Poly&) = default;

 private:
  void trim();
  std::vector<BigInt> coeffs_;
};

/// Square matrix of integer polynomials.
class PolyMat {
 public:
  explicit PolyMat(std::size_t n);

  std::size_t n() const { return n_; }
  Poly& operator()(std::size_t i, std::size_t j) { return entries_[i * n_ + j]; }
  const Poly& operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }

  friend bool operator==(const PolyMat&, const PolyMat&) = default;

 private:
  std::size_t n_;
  std::vector<Poly> entries_;
};

PolyMat polymat_mul(const PolyMat& a, const PolyMat& b);

/// a^t for t >= 1, accumulated as a^(r+1) = a^r * a.
PolyMat polymat_power(const PolyMat& a, std::size_t t);

/// Evaluates every entry at x.
std::vector<double> polymat_eval(const PolyMat& a, double x);

}  // namespace nnrnn
