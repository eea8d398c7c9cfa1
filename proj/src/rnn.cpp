#include "nnrnn/rnn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace nnrnn {

namespace {

// c += a^T b
void add_matmul_tn(Mat& c, const Mat& a, const Mat& b) {
  const std::size_t m = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* __restrict brow = b.row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      double* __restrict crow = c.row(i).data();
      for (std::size_t j = 0; j < m; ++j) crow[j] += aki * brow[j];
    }
  }
}

Mat glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-a, a);
  Mat m(rows, cols);
  for (double& v : m.data()) v = u(rng);
  return m;
}

Mat step_inputs(const SequenceBatch& batch, std::size_t t) {
  Mat x(batch.batch, batch.d_in);
  for (std::size_t b = 0; b < batch.batch; ++b)
    for (std::size_t d = 0; d < batch.d_in; ++d) x(b, d) = batch.input(b, t, d);
  return x;
}

}  // namespace

void RnnModel::validate() const {
  const std::size_t n = hidden();
  auto fail = [](const char* msg) { throw std::invalid_argument(std::string("RnnModel: ") + msg); };
  if (n == 0) fail("empty hidden layer");
  if (b_hidden.size() != n) fail("b_hidden size");
  if (w_out.cols() != n) fail("w_out shape");
  if (b_out.size() != w_out.rows()) fail("b_out size");
  if (kind == CellKind::NnRnn) {
    schur.validate();
    if (schur.n != n) fail("schur size");
  } else if (v_dense.rows() != n || v_dense.cols() != n) {
    fail("v_dense shape");
  }
}

RnnModel make_nnrnn(std::size_t n, std::size_t d_in, std::size_t d_out, InitScheme scheme,
                    std::uint64_t seed) {
  RnnModel m;
  m.kind = CellKind::NnRnn;
  m.schur = init_params(n, scheme, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  m.u_in = glorot_uniform(n, d_in, rng);
  m.w_out = glorot_uniform(d_out, n, rng);
  m.b_hidden.assign(n, 0.0);
  m.b_out.assign(d_out, 0.0);
  return m;
}

RnnModel make_vanilla_rnn(std::size_t n, std::size_t d_in, std::size_t d_out, std::uint64_t seed) {
  RnnModel m;
  m.kind = CellKind::VanillaRnn;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(1.0 / static_cast<double>(n)));
  m.v_dense = Mat(n, n);
  for (double& v : m.v_dense.data()) v = gauss(rng);
  m.u_in = glorot_uniform(n, d_in, rng);
  m.w_out = glorot_uniform(d_out, n, rng);
  m.b_hidden.assign(n, 0.0);
  m.b_out.assign(d_out, 0.0);
  return m;
}

std::size_t SequenceBatch::scored_count() const {
  return static_cast<std::size_t>(std::count_if(score_mask.begin(), score_mask.end(),
                                                [](std::uint8_t m) { return m != 0; }));
}

void SequenceBatch::validate(std::size_t n_classes) const {
  if (inputs.size() != batch * time * d_in || targets.size() != batch * time ||
      score_mask.size() != batch * time)
    throw std::invalid_argument("SequenceBatch: inconsistent shapes");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (score_mask[i] != 0) {
      if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= n_classes)
        throw std::invalid_argument("SequenceBatch: scored target out of range");
    } else if (targets[i] != kMaskedTarget) {
      throw std::invalid_argument("SequenceBatch: unscored step must carry the sentinel target");
    }
  }
  if (h0 && h0->rows() != batch) throw std::invalid_argument("SequenceBatch: h0 shape");
}

std::vector<double> modrelu(std::span<const double> z, std::span<const double> b) {
  if (z.size() != b.size()) throw std::invalid_argument("modrelu: length mismatch");
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double mag = std::abs(z[i]) + b[i];
    const double sign = z[i] > 0.0 ? 1.0 : (z[i] < 0.0 ? -1.0 : 0.0);
    out[i] = mag > 0.0 ? mag * sign : 0.0;
  }
  return out;
}

double mean_cross_entropy(const std::vector<Mat>& logits, const SequenceBatch& batch) {
  if (logits.size() != batch.time) throw std::invalid_argument("mean_cross_entropy: time mismatch");
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < batch.time; ++t)
    for (std::size_t b = 0; b < batch.batch; ++b) {
      if (!batch.scored(b, t)) continue;
      const auto row = logits[t].row(b);
      const double mx = *std::max_element(row.begin(), row.end());
      double se = 0.0;
      for (double v : row) se += std::exp(v - mx);
      total += mx + std::log(se) - row[static_cast<std::size_t>(batch.target(b, t))];
      ++count;
    }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

AssembledV prepare_recurrent(const RnnModel& model) {
  if (model.kind == CellKind::NnRnn) return assemble_v(model.schur);
  return {model.v_dense, Mat(), Mat()};
}

ForwardResult forward(const RnnModel& model, const AssembledV& rec, const SequenceBatch& batch) {
  const std::size_t n = model.hidden();
  const std::size_t n_out = model.d_out();
  if (batch.d_in != model.d_in()) throw std::invalid_argument("forward: input width mismatch");
  batch.validate(n_out);

  const Mat vt = transpose(rec.v);
  const Mat ut = transpose(model.u_in);
  const Mat wt = transpose(model.w_out);

  ForwardResult out;
  out.z.reserve(batch.time);
  out.h.reserve(batch.time + 1);
  out.logits.reserve(batch.time);
  if (batch.h0) {
    if (batch.h0->cols() != n) throw std::invalid_argument("forward: h0 width mismatch");
    out.h.push_back(*batch.h0);
  } else {
    out.h.emplace_back(batch.batch, n);
  }
  out.scored = batch.scored_count();

  for (std::size_t t = 0; t < batch.time; ++t) {
    Mat z = matmul(out.h.back(), vt);
    z += matmul(step_inputs(batch, t), ut);
    if (!all_finite(z))
      throw NumericalError("forward: non-finite activation at step " + std::to_string(t));
    Mat h(batch.batch, n);
    for (std::size_t b = 0; b < batch.batch; ++b) {
      if (model.linear) {
        std::copy(z.row(b).begin(), z.row(b).end(), h.row(b).begin());
      } else {
        const auto act = modrelu(z.row(b), model.b_hidden);
        std::copy(act.begin(), act.end(), h.row(b).begin());
      }
    }
    Mat logits = matmul(h, wt);
    for (std::size_t b = 0; b < batch.batch; ++b) {
      auto row = logits.row(b);
      for (std::size_t c = 0; c < n_out; ++c) row[c] += model.b_out[c];
    }
    out.z.push_back(std::move(z));
    out.h.push_back(std::move(h));
    out.logits.push_back(std::move(logits));
  }
  out.loss = mean_cross_entropy(out.logits, batch);
  if (!std::isfinite(out.loss)) throw NumericalError("forward: non-finite loss");
  return out;
}

ForwardResult forward(const RnnModel& model, const SequenceBatch& batch) {
  return forward(model, prepare_recurrent(model), batch);
}

double ModelGrads::squared_norm(CellKind kind) const {
  double s = 0.0;
  for (double v : u_in.data()) s += v * v;
  for (double v : w_out.data()) s += v * v;
  for (double v : b_hidden) s += v * v;
  for (double v : b_out) s += v * v;
  if (kind == CellKind::NnRnn) {
    s += schur.squared_norm();
  } else {
    for (double v : this->v.data()) s += v * v;
  }
  return s;
}

ModelGrads bptt(const RnnModel& model, const AssembledV& rec, const SequenceBatch& batch,
                const ForwardResult& fwd, const GammaMode& mode) {
  const std::size_t n = model.hidden();
  const std::size_t n_out = model.d_out();
  ModelGrads g;
  g.u_in = Mat(n, model.d_in());
  g.b_hidden.assign(n, 0.0);
  g.w_out = Mat(n_out, n);
  g.b_out.assign(n_out, 0.0);
  g.v = Mat(n, n);
  g.hidden_grad_norms.assign(batch.time + 1, 0.0);

  const double inv_count = fwd.scored == 0 ? 0.0 : 1.0 / static_cast<double>(fwd.scored);
  Mat dh(batch.batch, n);
  Mat dlogits(batch.batch, n_out);
  for (std::size_t t = batch.time; t-- > 0;) {
    // Output head at step t reads h[t + 1].
    bool any = false;
    for (std::size_t b = 0; b < batch.batch; ++b) {
      auto d = dlogits.row(b);
      std::fill(d.begin(), d.end(), 0.0);
      if (!batch.scored(b, t)) continue;
      any = true;
      const auto row = fwd.logits[t].row(b);
      const double mx = *std::max_element(row.begin(), row.end());
      double se = 0.0;
      for (std::size_t c = 0; c < n_out; ++c) {
        d[c] = std::exp(row[c] - mx);
        se += d[c];
      }
      for (std::size_t c = 0; c < n_out; ++c) d[c] = d[c] / se * inv_count;
      d[static_cast<std::size_t>(batch.target(b, t))] -= inv_count;
    }
    if (any) {
      add_matmul_tn(g.w_out, dlogits, fwd.h[t + 1]);
      for (std::size_t b = 0; b < batch.batch; ++b)
        for (std::size_t c = 0; c < n_out; ++c) g.b_out[c] += dlogits(b, c);
      dh += matmul(dlogits, model.w_out);
    }
    g.hidden_grad_norms[t + 1] = frobenius_norm(dh);

    Mat& dz = dh;  // reused in place
    const Mat& z = fwd.z[t];
    if (!model.linear) {
      for (std::size_t b = 0; b < batch.batch; ++b) {
        for (std::size_t i = 0; i < n; ++i) {
          const double zi = z(b, i);
          if (std::abs(zi) + model.b_hidden[i] > 0.0) {
            const double sign = zi > 0.0 ? 1.0 : (zi < 0.0 ? -1.0 : 0.0);
            g.b_hidden[i] += dz(b, i) * sign;
          } else {
            dz(b, i) = 0.0;
          }
        }
      }
    }
    add_matmul_tn(g.v, dz, fwd.h[t]);
    add_matmul_tn(g.u_in, dz, step_inputs(batch, t));
    dh = matmul(dz, rec.v);
  }
  g.hidden_grad_norms[0] = frobenius_norm(dh);

  if (model.kind == CellKind::NnRnn)
    g.schur = backward_v(model.schur, g.v, rec, mode);
  return g;
}

ModelGrads bptt(const RnnModel& model, const SequenceBatch& batch, const GammaMode& mode) {
  const AssembledV rec = prepare_recurrent(model);
  const ForwardResult fwd = forward(model, rec, batch);
  return bptt(model, rec, batch, fwd, mode);
}

std::vector<double> gradient_norm_trace(const RnnModel& model, const SequenceBatch& batch) {
  return bptt(model, batch).hidden_grad_norms;
}

}  // namespace nnrnn
