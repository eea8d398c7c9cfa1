#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nnrnn/linalg.hpp"

namespace nnrnn {

enum class InitScheme { Henaff, Cayley, RandomOrth };

std::string to_string(InitScheme s);
InitScheme init_scheme_from_string(const std::string& s);

/// How the rotation-block moduli are trained.
struct GammaMode {
  enum class Kind { Free, Regularized, Clamped };
  Kind kind = Kind::Free;
  double value = 0.0;  // penalty weight (Regularized) or clamp value (Clamped)

  static GammaMode free() { return {Kind::Free, 0.0}; }
  static GammaMode regularized(double delta);
  static GammaMode clamped(double gamma);
};

/// Learnable real-Schur parametrization of the recurrent matrix,
///   V = P (Lambda + T) P^T,  P = exp(b_skew),
/// with Lambda block-diagonal of scaled rotations gamma_k R(theta_k) and T
/// strictly lower triangular.
///
/// The entries (2k+1, 2k) below each 2x2 block belong to the block, so
/// t_lower is structurally zero there.
struct SchurParams {
  std::size_t n = 0;
  Mat b_skew;                  // n x n, exactly skew-symmetric
  std::vector<double> gamma;   // n/2 moduli
  std::vector<double> theta;   // n/2 angles
  Mat t_lower;                 // n x n
  InitScheme scheme = InitScheme::Henaff;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when a structural invariant is broken.
  void validate() const;
};

/// True when (i, j) is a free entry of t_lower.
inline bool t_entry_is_free(std::size_t i, std::size_t j) {
  return i > j && !(i == j + 1 && j % 2 == 0);
}

struct SchurParamCounts {
  std::size_t b_skew, t_lower, gamma, theta;
  std::size_t total() const { return b_skew + t_lower + gamma + theta; }
};
SchurParamCounts parameter_counts(std::size_t n);

/// gamma * [[cos, -sin], [sin, cos]]
Mat rotation_block(double gamma, double theta);

Mat assemble_theta(const SchurParams& p);

struct AssembledV {
  Mat v;
  Mat p;
  Mat theta;
};
AssembledV assemble_v(const SchurParams& p);

struct SchurGrads {
  Mat b_skew;                 // skew; lower-half entries are the exact partials
  std::vector<double> gamma;
  std::vector<double> theta;
  Mat t_lower;                // zero outside the free entries

  static SchurGrads zeros(std::size_t n);
  SchurGrads& operator+=(const SchurGrads& other);
  double squared_norm() const;
};

/// Chain rule from dL/dV to the parameters. In Clamped mode the gamma
/// gradient is reported as zero.
SchurGrads backward_v(const SchurParams& p, const Mat& grad_v, const AssembledV& cache,
                      const GammaMode& mode = GammaMode::free());

struct RegularizerResult {
  double loss = 0.0;
  double gamma_term = 0.0;
  double t_term = 0.0;
  SchurGrads grads;
};

/// delta * sum (1 - gamma)^2 (Regularized mode only) + t_decay * ||T||_F^2
RegularizerResult regularizer_loss_and_grads(const SchurParams& p, const GammaMode& mode,
                                             double t_decay);

/// gamma = 1, theta ~ U[0, 2pi), T = 0, and b_skew per scheme.
SchurParams init_params(std::size_t n, InitScheme scheme, std::uint64_t seed);

double mean_gamma(const SchurParams& p);

}  // namespace nnrnn
