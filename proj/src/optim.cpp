#include "nnrnn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <limits>
#include <optional>
#include <stdexcept>

namespace nnrnn {

namespace {

constexpr double kGammaFloor = 1e-8;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(std::string("TrainConfig: ") + msg);
}

}  // namespace

TrainConfig TrainConfig::copy_defaults() { return {}; }

TrainConfig TrainConfig::char_lm_defaults() {
  TrainConfig c;
  c.lr = 8e-4;
  c.lr_orth = 8e-5;
  c.rms_alpha = 0.9;
  c.delta = 1.0;
  c.t_decay = 1e-4;
  c.batch_size = 32;
  return c;
}

GammaMode TrainConfig::gamma_mode() const {
  switch (gamma_kind) {
    case GammaMode::Kind::Free: return GammaMode::free();
    case GammaMode::Kind::Regularized: return GammaMode::regularized(delta);
    case GammaMode::Kind::Clamped: return GammaMode::clamped(gamma_clamp);
  }
  return GammaMode::free();
}

void TrainConfig::validate() const {
  require(lr > 0.0 && lr_orth > 0.0, "learning rates must be > 0");
  require(rms_alpha > 0.0 && rms_alpha < 1.0, "rms_alpha must lie in (0, 1)");
  require(delta >= 0.0 && t_decay >= 0.0, "delta and t_decay must be >= 0");
  require(gamma_kind != GammaMode::Kind::Clamped || gamma_clamp > 0.0, "gamma_clamp must be > 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(log_every >= 1, "log_every must be >= 1");
}

void rmsprop_step(std::span<double> param, std::span<const double> grad, RmsState& state,
                  double lr, double alpha, double eps) {
  if (param.size() != grad.size()) throw std::invalid_argument("rmsprop_step: shape mismatch");
  if (state.sq.empty()) state.sq.assign(param.size(), 0.0);
  if (state.sq.size() != param.size()) throw std::invalid_argument("rmsprop_step: state shape");
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    state.sq[i] = alpha * state.sq[i] + (1.0 - alpha) * g * g;
    param[i] -= lr * g / (std::sqrt(state.sq[i]) + eps);
  }
}

void stiefel_step(SchurParams& schur, const Mat& grad_b, RmsState& state, double lr_orth,
                  double alpha) {
  const std::size_t n = schur.n;
  if (grad_b.rows() != n || grad_b.cols() != n)
    throw std::invalid_argument("stiefel_step: shape mismatch");
  const std::size_t m = n * (n - 1) / 2;
  std::vector<double> lower(m), g(m);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j, ++idx) {
      lower[idx] = schur.b_skew(i, j);
      g[idx] = 0.5 * (grad_b(i, j) - grad_b(j, i));
    }
  rmsprop_step(lower, g, state, lr_orth, alpha);
  idx = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j, ++idx) {
      schur.b_skew(i, j) = lower[idx];
      schur.b_skew(j, i) = -lower[idx];
    }
}

void ModelOptimizer::step(RnnModel& model, const ModelGrads& g, const TrainConfig& cfg) {
  const double lr = cfg.lr, a = cfg.rms_alpha;
  rmsprop_step(model.u_in.data(), g.u_in.data(), u_in, lr, a);
  rmsprop_step(model.w_out.data(), g.w_out.data(), w_out, lr, a);
  rmsprop_step(model.b_out, g.b_out, b_out, lr, a);
  if (!model.linear) rmsprop_step(model.b_hidden, g.b_hidden, b_hidden, lr, a);
  if (model.kind == CellKind::VanillaRnn) {
    rmsprop_step(model.v_dense.data(), g.v.data(), v_dense, lr, a);
    return;
  }
  SchurParams& s = model.schur;
  stiefel_step(s, g.schur.b_skew, b_skew, cfg.lr_orth, a);
  rmsprop_step(s.theta, g.schur.theta, theta, lr, a);
  if (cfg.gamma_kind != GammaMode::Kind::Clamped) {
    rmsprop_step(s.gamma, g.schur.gamma, gamma, lr, a);
    for (double& v : s.gamma) v = std::max(v, kGammaFloor);
  }
  // Only free T entries carry gradient; the rest stay exactly zero.
  const std::size_t n = s.n;
  std::vector<double> t, gt;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (t_entry_is_free(i, j)) {
        t.push_back(s.t_lower(i, j));
        gt.push_back(g.schur.t_lower(i, j));
      }
  rmsprop_step(t, gt, t_lower, lr, a);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (t_entry_is_free(i, j)) s.t_lower(i, j) = t[idx++];
}

TrainLog train_loop(RnnModel& model, TaskStream& stream, const TrainConfig& cfg,
                    const TrainCallback& callback) {
  cfg.validate();
  model.validate();
  if (stream.d_in() != model.d_in() || stream.n_classes() != model.d_out())
    throw std::invalid_argument("train_loop: model does not match the task stream");
  const bool nn = model.kind == CellKind::NnRnn;
  const GammaMode mode = cfg.gamma_mode();
  if (nn && mode.kind == GammaMode::Kind::Clamped)
    std::fill(model.schur.gamma.begin(), model.schur.gamma.end(), mode.value);

  TrainLog log;
  ModelOptimizer opt;
  std::optional<Mat> carry;
  for (std::size_t u = 0; u < cfg.max_updates; ++u) {
    SequenceBatch batch = stream.next();
    if (batch.continues_previous && carry && carry->rows() == batch.batch) batch.h0 = carry;

    TrainRecord rec;
    rec.update = u;
    ModelGrads grads;
    try {
      const AssembledV v = prepare_recurrent(model);
      const ForwardResult fwd = forward(model, v, batch);
      grads = bptt(model, v, batch, fwd, mode);
      carry = fwd.final_hidden();
      rec.task_loss = fwd.loss;
      if (nn) {
        const RegularizerResult reg = regularizer_loss_and_grads(model.schur, mode, cfg.t_decay);
        grads.schur += reg.grads;
        rec.reg_loss = reg.loss;
        rec.mean_gamma = mean_gamma(model.schur);
        rec.t_fro = frobenius_norm(model.schur.t_lower);
        rec.orth_err = orthogonality_error(v.p);
      } else {
        rec.mean_gamma = std::numeric_limits<double>::quiet_NaN();
        rec.orth_err = std::numeric_limits<double>::quiet_NaN();
      }
    } catch (const NumericalError& e) {
      log.diverged = true;
      log.message = fmt::format("update {}: {}", u, e.what());
      break;
    }
    rec.loss = rec.task_loss + rec.reg_loss;
    rec.grad_norm_total = std::sqrt(grads.squared_norm(model.kind));
    if (!std::isfinite(rec.loss) || !std::isfinite(rec.grad_norm_total)) {
      log.diverged = true;
      log.message = fmt::format("update {}: non-finite loss or gradient", u);
      log.records.push_back(rec);
      break;
    }

    opt.step(model, grads, cfg);
    log.updates = u + 1;
    const bool last = u + 1 == cfg.max_updates;
    if (u % cfg.log_every == 0 || last) log.records.push_back(rec);
    if (callback && !callback(rec)) {
      if (!last && u % cfg.log_every != 0) log.records.push_back(rec);
      log.stopped_early = !last;
      break;
    }
  }
  return log;
}

const char* const kTrainLogHeader =
    "update,loss,task_loss,reg_loss,mean_gamma,t_fro,orth_err,grad_norm_total";

std::string to_csv_row(const TrainRecord& r) {
  return fmt::format("{},{},{},{},{},{},{},{}", r.update, r.loss, r.task_loss, r.reg_loss,
                     r.mean_gamma, r.t_fro, r.orth_err, r.grad_norm_total);
}

}  // namespace nnrnn
