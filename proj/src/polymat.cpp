#include "nnrnn/polymat.hpp"

#include <sstream>
#include <stdexcept>

namespace nnrnn {

Poly::Poly(std::vector<BigInt> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

Poly Poly::constant(BigInt c) { return Poly(std::vector<BigInt>{std::move(c)}); }

Poly Poly::monomial(BigInt c, std::size_t degree) {
  std::vector<BigInt> v(degree + 1);
  v[degree] = std::move(c);
  return Poly(std::move(v));
}

void Poly::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

BigInt Poly::coeff(std::size_t l) const { return l < coeffs_.size() ? coeffs_[l] : BigInt(0); }

double Poly::eval(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
    acc = acc * x + it->convert_to<double>();
  return acc;
}

BigInt Poly::eval(const BigInt& x) const {
  BigInt acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::string Poly::to_string() const {
  if (coeffs_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (std::size_t l = coeffs_.size(); l-- > 0;) {
    if (coeffs_[l] == 0) continue;
    if (!first) os << " + ";
    first = false;
    if (l == 0 || coeffs_[l] != 1) os << coeffs_[l];
    if (l >= 1) os << "x";
    if (l >= 2) os << "^" << l;
  }
  return os.str();
}

Poly& Poly::operator+=(const Poly& other) {
  if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size());
  for (std::size_t i = 0; i < other.coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  trim();
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<BigInt> out(a.coeffs_.size() + b.coeffs_.size() - 1);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
    if (a.coeffs_[i] == 0) continue;
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
  }
  return Poly(std::move(out));
}

PolyMat::PolyMat(std::size_t n) : n_(n), entries_(n * n) {
  if (n == 0) throw std::invalid_argument("PolyMat: n must be >= 1");
}

PolyMat polymat_mul(const PolyMat& a, const PolyMat& b) {
  if (a.n() != b.n()) throw std::invalid_argument("polymat_mul: dimension mismatch");
  const std::size_t n = a.n();
  PolyMat c(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (a(i, k).is_zero()) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (b(k, j).is_zero()) continue;
        c(i, j) += a(i, k) * b(k, j);
      }
    }
  return c;
}

PolyMat polymat_power(const PolyMat& a, std::size_t t) {
  if (t == 0) throw std::invalid_argument("polymat_power: t must be >= 1");
  PolyMat out = a;
  for (std::size_t r = 1; r < t; ++r) out = polymat_mul(out, a);
  return out;
}

std::vector<double> polymat_eval(const PolyMat& a, double x) {
  std::vector<double> out(a.n() * a.n());
  for (std::size_t i = 0; i < a.n(); ++i)
    for (std::size_t j = 0; j < a.n(); ++j) out[i * a.n() + j] = a(i, j).eval(x);
  return out;
}

}  // namespace nnrnn
