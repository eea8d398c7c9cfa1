#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nnrnn/optim.hpp"
#include "test_helpers.hpp"

using namespace nnrnn;
using nnrnn::testing::random_mat;

namespace {

RnnModel small_copy_model(std::uint64_t seed, std::size_t n = 16) {
  return make_nnrnn(n, kCopyInputWidth, kCopyClasses, InitScheme::Henaff, seed);
}

TrainConfig quick_config(std::size_t updates) {
  TrainConfig c = TrainConfig::copy_defaults();
  c.max_updates = updates;
  c.batch_size = 4;
  return c;
}

}  // namespace

TEST(RmsProp, ZeroGradient) {
  std::vector<double> p{1.0, -2.0};
  RmsState st{{0.4, 0.2}};
  rmsprop_step(p, std::vector<double>{0.0, 0.0}, st, 0.1, 0.9);
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0}));
  EXPECT_NEAR(st.sq[0], 0.36, 1e-16);
  EXPECT_NEAR(st.sq[1], 0.18, 1e-16);
}

TEST(RmsProp, FirstScalarStep) {
  std::vector<double> p{0.0};
  RmsState st;
  rmsprop_step(p, std::vector<double>{1.0}, st, 0.1, 0.9);
  EXPECT_NEAR(st.sq[0], 0.1, 1e-16);
  EXPECT_NEAR(p[0], -0.1 / (std::sqrt(0.1) + 1e-8), 1e-15);
  EXPECT_NEAR(p[0], -0.31623, 1e-5);
}

TEST(RmsProp, StatesAreIndependent) {
  std::vector<double> a{0.0}, b{0.0};
  RmsState sa, sb;
  rmsprop_step(a, std::vector<double>{1.0}, sa, 0.1, 0.9);
  rmsprop_step(b, std::vector<double>{-3.0}, sb, 0.1, 0.9);
  rmsprop_step(a, std::vector<double>{1.0}, sa, 0.1, 0.9);
  EXPECT_NEAR(sa.sq[0], 0.9 * 0.1 + 0.1, 1e-15);
  EXPECT_NEAR(sb.sq[0], 0.9, 1e-15);
  EXPECT_THROW(rmsprop_step(a, std::vector<double>{1.0, 2.0}, sa, 0.1, 0.9),
               std::invalid_argument);
}

TEST(Stiefel, ZeroAndSymmetricGradientsLeaveP) {
  SchurParams p = init_params(8, InitScheme::RandomOrth, 1);
  const Mat before = p.b_skew;
  RmsState st;
  stiefel_step(p, Mat(8, 8), st, 1e-2, 0.9);
  EXPECT_EQ(p.b_skew, before);
  std::mt19937_64 rng(1);
  const Mat g = random_mat(8, 8, rng);
  stiefel_step(p, g + transpose(g), st, 1e-2, 0.9);
  EXPECT_EQ(p.b_skew, before);
}

TEST(Stiefel, ManyUpdatesStayOrthogonal) {
  SchurParams p = init_params(16, InitScheme::Henaff, 2);
  std::mt19937_64 rng(2);
  RmsState st;
  for (int i = 0; i < 1000; ++i) {
    stiefel_step(p, random_mat(16, 16, rng), st, 1e-2, 0.99);
    ASSERT_TRUE(is_skew_symmetric(p.b_skew));
  }
  EXPECT_LE(orthogonality_error(expm(p.b_skew)), 1e-9);
}

TEST(TrainConfigTest, DefaultsAndValidation) {
  const TrainConfig c = TrainConfig::copy_defaults();
  EXPECT_EQ(c.lr, 5e-4);
  EXPECT_EQ(c.lr_orth, 1e-6);
  EXPECT_EQ(c.rms_alpha, 0.99);
  EXPECT_EQ(c.delta, 1e-4);
  EXPECT_EQ(c.t_decay, 1e-6);
  const TrainConfig l = TrainConfig::char_lm_defaults();
  EXPECT_EQ(l.lr, 8e-4);
  EXPECT_EQ(l.lr_orth, 8e-5);
  EXPECT_EQ(l.rms_alpha, 0.9);
  EXPECT_EQ(l.delta, 1.0);
  EXPECT_EQ(l.t_decay, 1e-4);
  TrainConfig bad = c;
  bad.rms_alpha = 1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = c;
  bad.lr = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(TrainLoop, ZeroUpdates) {
  RnnModel m = small_copy_model(1);
  const RnnModel init = m;
  CopyTaskStream st({10, 4, 1});
  const TrainLog log = train_loop(m, st, quick_config(0));
  EXPECT_TRUE(log.records.empty());
  EXPECT_EQ(m.schur.b_skew, init.schur.b_skew);
  EXPECT_EQ(m.u_in, init.u_in);
}

TEST(TrainLoop, BookkeepingIdentityAndOrthogonality) {
  RnnModel m = small_copy_model(2);
  CopyTaskStream st({10, 4, 2});
  TrainConfig cfg = quick_config(60);
  cfg.delta = 0.3;
  cfg.t_decay = 0.01;
  const TrainLog log = train_loop(m, st, cfg);
  ASSERT_EQ(log.records.size(), 60u);
  for (const auto& r : log.records) {
    EXPECT_NEAR(r.loss, r.task_loss + r.reg_loss, 1e-12);
    EXPECT_LE(r.orth_err, 1e-9);
  }
  // The record at update u describes the parameters before that update.
  const auto reg = regularizer_loss_and_grads(m.schur, cfg.gamma_mode(), cfg.t_decay);
  EXPECT_GT(reg.loss, 0.0);
}

TEST(TrainLoop, Deterministic) {
  auto run = [] {
    RnnModel m = small_copy_model(3);
    CopyTaskStream st({10, 4, 3});
    std::vector<double> losses;
    for (const auto& r : train_loop(m, st, quick_config(25)).records) losses.push_back(r.loss);
    return losses;
  };
  EXPECT_EQ(run(), run());
}

TEST(TrainLoop, ClampedGammaStaysFixed) {
  for (double clamp : {1.0, 0.958}) {
    RnnModel m = small_copy_model(4);
    CopyTaskStream st({10, 4, 4});
    TrainConfig cfg = quick_config(30);
    cfg.gamma_kind = GammaMode::Kind::Clamped;
    cfg.gamma_clamp = clamp;
    const TrainLog log = train_loop(m, st, cfg);
    for (const auto& r : log.records) EXPECT_NEAR(r.mean_gamma, clamp, 1e-15);
    for (double g : m.schur.gamma) EXPECT_EQ(g, clamp);
  }
}

TEST(TrainLoop, LogCadence) {
  RnnModel m = small_copy_model(5);
  CopyTaskStream st({10, 4, 5});
  TrainConfig cfg = quick_config(23);
  cfg.log_every = 5;
  const TrainLog log = train_loop(m, st, cfg);
  std::vector<std::size_t> ups;
  for (const auto& r : log.records) ups.push_back(r.update);
  EXPECT_EQ(ups, (std::vector<std::size_t>{0, 5, 10, 15, 20, 22}));
}

TEST(TrainLoop, CallbackStopsEarly) {
  RnnModel m = small_copy_model(6);
  CopyTaskStream st({10, 4, 6});
  const TrainLog log =
      train_loop(m, st, quick_config(100), [](const TrainRecord& r) { return r.update < 9; });
  EXPECT_TRUE(log.stopped_early);
  EXPECT_EQ(log.updates, 10u);
}

TEST(TrainLoop, DivergenceDetected) {
  RnnModel m = make_vanilla_rnn(8, kCopyInputWidth, kCopyClasses, 7);
  m.v_dense = 1e150 * Mat::identity(8);
  CopyTaskStream st({10, 4, 7});
  const TrainLog log = train_loop(m, st, quick_config(10));
  EXPECT_TRUE(log.diverged);
  EXPECT_FALSE(log.message.empty());
}

TEST(TrainLoop, StrongRegularizationPullsTowardOrthogonal) {
  // Median over seeds: |1 - gamma| and ||T||_F shrink along the run.
  const std::vector<std::size_t> marks{0, 75, 150, 225, 299};
  std::vector<std::vector<double>> gaps(marks.size()), tfro(marks.size());
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    RnnModel m = small_copy_model(seed);
    for (std::size_t k = 0; k < m.schur.gamma.size(); ++k) m.schur.gamma[k] = k % 2 ? 0.7 : 1.3;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.3);
    for (std::size_t i = 0; i < 16; ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (t_entry_is_free(i, j)) m.schur.t_lower(i, j) = g(rng);
    CopyTaskStream st({10, 4, seed});
    TrainConfig cfg = quick_config(300);
    cfg.lr = 2e-3;
    cfg.delta = 1e4;
    cfg.t_decay = 1e4;
    std::vector<double> gap_now;
    train_loop(m, st, cfg, [&](const TrainRecord& r) {
      for (std::size_t i = 0; i < marks.size(); ++i)
        if (r.update == marks[i]) {
          // reg_loss = delta sum (1 - gamma)^2 + t_decay ||T||^2
          const double t_term = cfg.t_decay * r.t_fro * r.t_fro;
          gaps[i].push_back(std::sqrt(std::max(0.0, r.reg_loss - t_term) / cfg.delta));
          tfro[i].push_back(r.t_fro);
        }
      return true;
    });
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  for (std::size_t i = 1; i < marks.size(); ++i) {
    EXPECT_LT(median(gaps[i]), median(gaps[i - 1])) << marks[i];
    EXPECT_LT(median(tfro[i]), median(tfro[i - 1])) << marks[i];
  }
  EXPECT_LT(median(gaps.back()), 0.05 * median(gaps.front()));
  EXPECT_LT(median(tfro.back()), 0.2 * median(tfro.front()));
}

TEST(TrainLoop, CharStreamCarriesHiddenState) {
  std::string text;
  for (int i = 0; i < 3000; ++i) text += "abcab"[i % 5];
  CharLmStream st(text, 20, 4);
  RnnModel m = make_nnrnn(8, st.d_in(), st.n_classes(), InitScheme::Cayley, 1);
  TrainConfig cfg = TrainConfig::char_lm_defaults();
  cfg.max_updates = 5;
  const TrainLog log = train_loop(m, st, cfg);
  EXPECT_EQ(log.updates, 5u);
  EXPECT_FALSE(log.diverged);
}

TEST(TrainLoop, CsvRow) {
  TrainRecord r{3, 0.5, 0.25, 0.25, 1.0, 0.0, 1e-15, 2.0};
  EXPECT_EQ(to_csv_row(r), "3,0.5,0.25,0.25,1,0,1e-15,2");
  EXPECT_STREQ(kTrainLogHeader, "update,loss,task_loss,reg_loss,mean_gamma,t_fro,orth_err,grad_norm_total");
}
