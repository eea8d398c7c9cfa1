#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nnrnn/linalg.hpp"
#include "nnrnn/schur.hpp"

namespace nnrnn {

enum class CellKind { NnRnn, VanillaRnn };

/// h_{t+1} = modrelu(V h_t + U x_{t+1}, b),  y_t = W h_t + c.
///
/// NnRnn builds V from `schur`; VanillaRnn keeps a dense `v_dense`.
/// With `linear` set the nonlinearity is the identity and b is unused.
struct RnnModel {
  CellKind kind = CellKind::NnRnn;
  SchurParams schur;
  Mat v_dense;
  Mat u_in;                       // n x d_in
  std::vector<double> b_hidden;   // n
  Mat w_out;                      // d_out x n
  std::vector<double> b_out;      // d_out
  bool linear = false;

  std::size_t hidden() const { return u_in.rows(); }
  std::size_t d_in() const { return u_in.cols(); }
  std::size_t d_out() const { return w_out.rows(); }
  void validate() const;
};

/// nnRNN with Glorot-uniform input/output weights and zero biases.
RnnModel make_nnrnn(std::size_t n, std::size_t d_in, std::size_t d_out, InitScheme scheme,
                    std::uint64_t seed);
/// Vanilla RNN with a Glorot-normal recurrent matrix.
RnnModel make_vanilla_rnn(std::size_t n, std::size_t d_in, std::size_t d_out, std::uint64_t seed);

inline constexpr int kMaskedTarget = -1;

/// A batch of sequences, stored batch-major: inputs[(b * time + t) * d_in + d].
struct SequenceBatch {
  std::size_t batch = 0;
  std::size_t time = 0;
  std::size_t d_in = 0;
  std::vector<double> inputs;
  std::vector<int> targets;
  std::vector<std::uint8_t> score_mask;
  std::optional<Mat> h0;            // batch x n
  bool continues_previous = false;  // set by streams whose windows are contiguous

  double input(std::size_t b, std::size_t t, std::size_t d) const {
    return inputs[(b * time + t) * d_in + d];
  }
  int target(std::size_t b, std::size_t t) const { return targets[b * time + t]; }
  bool scored(std::size_t b, std::size_t t) const { return score_mask[b * time + t] != 0; }
  std::size_t scored_count() const;
  void validate(std::size_t n_classes) const;
};

/// Per element: (|z| + b) sign(z) when |z| + b > 0, else 0.
std::vector<double> modrelu(std::span<const double> z, std::span<const double> b);

/// Mean cross entropy in nats over scored steps; logits[t] is batch x classes.
double mean_cross_entropy(const std::vector<Mat>& logits, const SequenceBatch& batch);

/// Recurrent matrix for one optimizer step; p and theta are empty for the
/// vanilla cell.
AssembledV prepare_recurrent(const RnnModel& model);

struct ForwardResult {
  std::vector<Mat> z;       // time entries, batch x n pre-activations
  std::vector<Mat> h;       // time + 1 entries, h[0] is the initial state
  std::vector<Mat> logits;  // time entries, batch x d_out
  double loss = 0.0;        // mean cross entropy (nats) over scored steps
  std::size_t scored = 0;

  const Mat& final_hidden() const { return h.back(); }
};

/// Throws NumericalError naming the step when an activation is not finite.
ForwardResult forward(const RnnModel& model, const AssembledV& rec, const SequenceBatch& batch);
ForwardResult forward(const RnnModel& model, const SequenceBatch& batch);

struct ModelGrads {
  Mat u_in;
  std::vector<double> b_hidden;
  Mat w_out;
  std::vector<double> b_out;
  Mat v;              // dL/dV
  SchurGrads schur;   // NnRnn only
  std::vector<double> hidden_grad_norms;  // ||dL/dh_t||, t = 0..time

  double squared_norm(CellKind kind) const;
};

ModelGrads bptt(const RnnModel& model, const AssembledV& rec, const SequenceBatch& batch,
                const ForwardResult& fwd, const GammaMode& mode = GammaMode::free());
ModelGrads bptt(const RnnModel& model, const SequenceBatch& batch,
                const GammaMode& mode = GammaMode::free());

/// ||dL/dh_t||_2 for t = 0..time, oldest state first.
std::vector<double> gradient_norm_trace(const RnnModel& model, const SequenceBatch& batch);

}  // namespace nnrnn
