#pragma once

#include <random>

#include "nnrnn/linalg.hpp"

namespace nnrnn::testing {

inline Mat random_mat(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Mat m(r, c);
  for (double& v : m.data()) v = g(rng);
  return m;
}

inline Mat random_skew(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  return 2.0 * skew_part(random_mat(n, n, rng, scale));
}

inline Mat random_strict_lower(std::size_t n, std::mt19937_64& rng) {
  Mat m = random_mat(n, n, rng);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m(i, j) = 0.0;
  return m;
}

inline double rel_err(const Mat& a, const Mat& b) {
  const double d = frobenius_norm(a - b);
  const double s = std::max(frobenius_norm(a), frobenius_norm(b));
  return s == 0.0 ? d : d / s;
}

}  // namespace nnrnn::testing
