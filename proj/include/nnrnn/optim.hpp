#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nnrnn/rnn.hpp"
#include "nnrnn/schur.hpp"
#include "nnrnn/tasks.hpp"

namespace nnrnn {

inline constexpr double kRmsEps = 1e-8;

struct TrainConfig {
  double lr = 5e-4;
  double lr_orth = 1e-6;
  double rms_alpha = 0.99;
  double delta = 1e-4;
  double t_decay = 1e-6;
  GammaMode::Kind gamma_kind = GammaMode::Kind::Regularized;
  double gamma_clamp = 1.0;
  std::size_t batch_size = 10;
  std::size_t max_updates = 1000;
  std::uint64_t seed = 0;
  std::size_t log_every = 1;

  static TrainConfig copy_defaults();
  static TrainConfig char_lm_defaults();

  /// Regularized carries delta, Clamped the clamp value.
  GammaMode gamma_mode() const;
  void validate() const;
};

/// Running mean of squared gradients, sized lazily on first use.
struct RmsState {
  std::vector<double> sq;
};

/// state <- alpha state + (1 - alpha) g^2;  param <- param - lr g / (sqrt(state) + eps)
void rmsprop_step(std::span<double> param, std::span<const double> grad, RmsState& state,
                  double lr, double alpha, double eps = kRmsEps);

/// RMSprop on the lower half of the skew generator with the skew part of
/// grad_b, then mirrored so b_skew stays exactly skew-symmetric.
void stiefel_step(SchurParams& schur, const Mat& grad_b, RmsState& state, double lr_orth,
                  double alpha);

/// Optimizer state for every parameter tensor of an RnnModel.
struct ModelOptimizer {
  RmsState u_in, b_hidden, w_out, b_out, v_dense;
  RmsState b_skew, gamma, theta, t_lower;

  void step(RnnModel& model, const ModelGrads& grads, const TrainConfig& cfg);
};

struct TrainRecord {
  std::size_t update = 0;
  double loss = 0.0;
  double task_loss = 0.0;
  double reg_loss = 0.0;
  double mean_gamma = 0.0;
  double t_fro = 0.0;
  double orth_err = 0.0;  // ||P^T P - I||_F; NaN for the vanilla cell
  double grad_norm_total = 0.0;
};

struct TrainLog {
  std::vector<TrainRecord> records;  // every log_every updates and the last
  std::size_t updates = 0;
  bool diverged = false;
  bool stopped_early = false;
  std::string message;
};

/// Called after every update with that update's record; returning false
/// stops training.
using TrainCallback = std::function<bool(const TrainRecord&)>;

/// Metrics in a record describe the parameters the loss was evaluated at
/// (before the update is applied). The final hidden state of each batch is
/// fed to the next batch as h0 when the stream marks it as a continuation.
TrainLog train_loop(RnnModel& model, TaskStream& stream, const TrainConfig& cfg,
                    const TrainCallback& callback = {});

extern const char* const kTrainLogHeader;
std::string to_csv_row(const TrainRecord& r);

}  // namespace nnrnn
