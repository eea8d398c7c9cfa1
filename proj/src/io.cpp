#include "nnrnn/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace nnrnn {

namespace fs = std::filesystem;

Json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

namespace {

bool non_negative_int(const Json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

// Strict field access; every complaint names the dotted path.
class Fields {
 public:
  Fields(const Json& j, std::string ctx, std::initializer_list<const char*> allowed)
      : j_(j), ctx_(std::move(ctx)) {
    if (!j.is_object()) fail(ctx_.empty() ? "config must be an object" : "must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
      if (!ok.count(k)) throw ConfigError(fmt::format("unknown key '{}'", path(k)));
  }

  bool has(const char* k) const { return j_.contains(k); }
  const Json& at(const char* k) const { return j_.at(k); }
  std::string path(const std::string& k) const { return ctx_.empty() ? k : ctx_ + "." + k; }

  double num(const char* k, double def) const {
    if (!has(k)) return def;
    if (!j_[k].is_number()) fail(k, "must be a number");
    return j_[k].get<double>();
  }
  std::size_t size(const char* k, std::size_t def) const {
    if (!has(k)) return def;
    if (!non_negative_int(j_[k])) fail(k, "must be a non-negative integer");
    return j_[k].get<std::size_t>();
  }
  std::uint64_t u64(const char* k, std::uint64_t def) const {
    if (!has(k)) return def;
    if (!non_negative_int(j_[k])) fail(k, "must be a non-negative integer");
    return j_[k].get<std::uint64_t>();
  }
  bool flag(const char* k, bool def) const {
    if (!has(k)) return def;
    if (!j_[k].is_boolean()) fail(k, "must be a boolean");
    return j_[k].get<bool>();
  }
  std::string str(const char* k, const std::string& def) const {
    if (!has(k)) return def;
    if (!j_[k].is_string()) fail(k, "must be a string");
    return j_[k].get<std::string>();
  }
  const Json& object(const char* k) const {
    if (!j_[k].is_object()) fail(k, "must be an object");
    return j_[k];
  }
  const Json& array(const char* k) const {
    if (!j_[k].is_array()) fail(k, "must be an array");
    return j_[k];
  }

  [[noreturn]] void fail(const char* k, const std::string& msg) const {
    throw ConfigError(fmt::format("'{}' {}", path(k), msg));
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(ctx_.empty() ? msg : fmt::format("'{}' {}", ctx_, msg));
  }

 private:
  const Json& j_;
  std::string ctx_;
};

// Runs a module validator and reports its complaint as a config error.
template <class F>
void checked(const std::string& ctx, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(ctx + ": " + e.what());
  }
}

ModelSpec parse_model(const Json& j) {
  Fields f(j, "model", {"cell", "hidden", "init", "linear"});
  ModelSpec m;
  const std::string cell = f.str("cell", "nnrnn");
  if (cell == "nnrnn") m.cell = CellKind::NnRnn;
  else if (cell == "vanilla") m.cell = CellKind::VanillaRnn;
  else f.fail("cell", "must be 'nnrnn' or 'vanilla'");
  m.hidden = f.size("hidden", m.hidden);
  if (m.hidden < 2 || m.hidden % 2 != 0) f.fail("hidden", "must be an even number >= 2");
  try {
    m.init = init_scheme_from_string(f.str("init", to_string(m.init)));
  } catch (const std::invalid_argument&) {
    f.fail("init", "is not a known init scheme");
  }
  m.linear = f.flag("linear", m.linear);
  return m;
}

void parse_train_section(const Json& j, TrainConfig& c) {
  Fields f(j, "train", {"lr", "lr_orth", "rms_alpha", "delta", "t_decay", "gamma_mode",
                        "gamma_clamp", "batch_size", "max_updates", "log_every"});
  c.lr = f.num("lr", c.lr);
  c.lr_orth = f.num("lr_orth", c.lr_orth);
  c.rms_alpha = f.num("rms_alpha", c.rms_alpha);
  c.delta = f.num("delta", c.delta);
  c.t_decay = f.num("t_decay", c.t_decay);
  if (f.has("gamma_mode")) {
    const std::string g = f.str("gamma_mode", "");
    if (g == "free") c.gamma_kind = GammaMode::Kind::Free;
    else if (g == "regularized") c.gamma_kind = GammaMode::Kind::Regularized;
    else if (g == "clamped") c.gamma_kind = GammaMode::Kind::Clamped;
    else f.fail("gamma_mode", "must be 'free', 'regularized' or 'clamped'");
  }
  c.gamma_clamp = f.num("gamma_clamp", c.gamma_clamp);
  c.batch_size = f.size("batch_size", c.batch_size);
  c.max_updates = f.size("max_updates", c.max_updates);
  c.log_every = f.size("log_every", c.log_every);
}

FmcConfig parse_family(const Fields& f, const std::string& ctx) {
  FmcConfig c;
  c.n = f.size("n", c.n);
  c.d = f.num("d", c.d);
  c.alpha = f.num("alpha", c.alpha);
  c.beta = f.num("beta", c.beta);
  c.eps = f.num("eps", c.eps);
  checked(ctx, [&] { c.validate(); });
  return c;
}

Json rows_lower(const Mat& m, bool strict) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (std::size_t j = 0; j < (strict ? i : i + 1); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Json rows_full(const Mat& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<double> read_vector(const Json& j, const std::string& ctx) {
  if (!j.is_array()) throw ConfigError(ctx + " must be an array");
  std::vector<double> v;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(ctx + " must hold numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

// Row i holds `width(i)` numbers.
template <class Width>
Mat read_rows(const Json& j, std::size_t rows, std::size_t cols, Width width, const std::string& ctx) {
  if (!j.is_array() || j.size() != rows) throw ConfigError(ctx + " has the wrong number of rows");
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto r = read_vector(j[i], ctx);
    if (r.size() != width(i)) throw ConfigError(fmt::format("{} row {} has the wrong length", ctx, i));
    std::copy(r.begin(), r.end(), m.row(i).begin());
  }
  return m;
}

Json histogram_json(const Histogram& h) {
  return Json{{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}};
}

}  // namespace

TrainRunConfig parse_train_config(const Json& j, const fs::path& base_dir) {
  Fields f(j, "", {"task", "model", "copy", "char_lm", "train", "seed"});
  TrainRunConfig c;
  if (!f.has("task")) throw ConfigError("missing key 'task'");
  const std::string task = f.str("task", "");
  if (task == "copy") c.task = TaskKind::Copy;
  else if (task == "char_lm") c.task = TaskKind::CharLm;
  else f.fail("task", "must be 'copy' or 'char_lm'");
  c.train = c.task == TaskKind::Copy ? TrainConfig::copy_defaults() : TrainConfig::char_lm_defaults();
  c.seed = f.u64("seed", 0);
  if (f.has("model")) c.model = parse_model(f.object("model"));
  if (f.has("train")) parse_train_section(f.object("train"), c.train);
  checked("train", [&] { c.train.validate(); });

  if (c.task == TaskKind::Copy) {
    if (f.has("char_lm")) f.fail("char_lm", "is not allowed for the copy task");
    if (f.has("copy")) {
      Fields g(f.object("copy"), "copy", {"delay"});
      c.copy.delay = g.size("delay", c.copy.delay);
    }
    c.copy.batch_size = c.train.batch_size;
    checked("copy", [&] { c.copy.validate(); });
  } else {
    if (f.has("copy")) f.fail("copy", "is not allowed for the char_lm task");
    if (!f.has("char_lm")) throw ConfigError("missing key 'char_lm'");
    Fields g(f.object("char_lm"), "char_lm", {"corpus", "window"});
    if (!g.has("corpus")) throw ConfigError("missing key 'char_lm.corpus'");
    fs::path corpus = g.str("corpus", "");
    c.char_lm.corpus = corpus.is_absolute() ? corpus : base_dir / corpus;
    c.char_lm.window = g.size("window", c.char_lm.window);
    c.char_lm.batch_size = c.train.batch_size;
    checked("char_lm", [&] { c.char_lm.validate(); });
  }
  c.train.seed = c.seed;
  return c;
}

FmcSweepConfig parse_fmc_config(const Json& j) {
  Fields f(j, "", {"runs", "seed", "series_tol", "k_max"});
  FmcSweepConfig c;
  c.seed = f.u64("seed", 0);
  const double tol = f.num("series_tol", FmcConfig{}.series_tol);
  const std::size_t k_max = f.size("k_max", 0);
  if (!(tol > 0.0)) f.fail("series_tol", "must be > 0");
  if (!f.has("runs")) throw ConfigError("missing key 'runs'");
  const Json& runs = f.array("runs");
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string ctx = fmt::format("runs[{}]", i);
    Fields r(runs[i], ctx, {"name", "n", "d", "alpha", "beta", "eps"});
    FmcRun run;
    run.name = r.str("name", fmt::format("run{:02}", i + 1));
    run.cfg = parse_family(r, ctx);
    run.cfg.series_tol = tol;
    run.cfg.k_max = k_max;
    c.runs.push_back(std::move(run));
  }
  return c;
}

TransientConfig parse_transient_config(const Json& j) {
  Fields f(j, "", {"runs", "seed", "n_samples", "t_max"});
  TransientConfig c;
  c.seed = f.u64("seed", 0);
  const std::size_t samples = f.size("n_samples", 1000);
  const std::size_t t_max = f.size("t_max", 120);
  if (!f.has("runs")) throw ConfigError("missing key 'runs'");
  const Json& runs = f.array("runs");
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string ctx = fmt::format("runs[{}]", i);
    Fields r(runs[i], ctx, {"name", "n", "d", "alpha", "beta", "eps"});
    TransientRun run;
    run.name = r.str("name", fmt::format("run{:02}", i + 1));
    run.cfg = parse_family(r, ctx);
    run.n_samples = samples;
    run.t_max = t_max;
    if (samples < 1) f.fail("n_samples", "must be >= 1");
    c.runs.push_back(std::move(run));
  }
  return c;
}

PropsConfig parse_props_config(const Json& j) {
  Fields f(j, "", {"prop1", "prop2", "growth", "seed"});
  PropsConfig c;
  c.seed = f.u64("seed", 0);
  if (f.has("prop2")) {
    Fields g(f.object("prop2"), "prop2", {"n_max", "t_max"});
    c.prop2_n_max = g.size("n_max", c.prop2_n_max);
    c.prop2_t_max = g.size("t_max", c.prop2_t_max);
    if (c.prop2_n_max < 2 || c.prop2_n_max > 8) g.fail("n_max", "must lie in [2, 8]");
    if (c.prop2_t_max < 1 || c.prop2_t_max > 30) g.fail("t_max", "must lie in [1, 30]");
  }
  if (f.has("prop1")) {
    Fields g(f.object("prop1"), "prop1", {"trials", "n_min", "n_max", "alphas", "scale", "eps"});
    c.prop1.trials = g.size("trials", c.prop1.trials);
    c.prop1.n_min = g.size("n_min", c.prop1.n_min);
    c.prop1.n_max = g.size("n_max", c.prop1.n_max);
    if (g.has("alphas")) c.prop1.alphas = read_vector(g.array("alphas"), "prop1.alphas");
    c.prop1.scale = g.num("scale", c.prop1.scale);
    c.prop1.eps = g.num("eps", c.prop1.eps);
  }
  checked("prop1", [&] { c.prop1.validate(); });
  if (f.has("growth")) {
    Fields g(f.object("growth"), "growth", {"t_max"});
    c.growth_t_max = g.size("t_max", c.growth_t_max);
    if (c.growth_t_max < 4) g.fail("t_max", "must be >= 4");
  }
  return c;
}

Json to_json(const SchurParams& p) {
  return Json{{"n", p.n},
              {"scheme", to_string(p.scheme)},
              {"seed", p.seed},
              {"b_skew", rows_lower(p.b_skew, true)},
              {"gamma", p.gamma},
              {"theta", p.theta},
              {"t_lower", rows_lower(p.t_lower, true)}};
}

SchurParams schur_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("schur must be an object");
  SchurParams p;
  try {
    p.n = j.at("n").get<std::size_t>();
    p.scheme = init_scheme_from_string(j.at("scheme").get<std::string>());
    p.seed = j.at("seed").get<std::uint64_t>();
    auto lower = [](std::size_t i) { return i; };
    p.b_skew = read_rows(j.at("b_skew"), p.n, p.n, lower, "schur.b_skew");
    for (std::size_t i = 0; i < p.n; ++i)
      for (std::size_t k = 0; k < i; ++k) p.b_skew(k, i) = -p.b_skew(i, k);
    p.gamma = read_vector(j.at("gamma"), "schur.gamma");
    p.theta = read_vector(j.at("theta"), "schur.theta");
    p.t_lower = read_rows(j.at("t_lower"), p.n, p.n, lower, "schur.t_lower");
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("schur: ") + e.what());
  }
  checked("schur", [&] { p.validate(); });
  return p;
}

Json checkpoint_to_json(const RnnModel& m) {
  m.validate();
  const bool nn = m.kind == CellKind::NnRnn;
  Json j{{"cell", nn ? "nnrnn" : "vanilla"},
         {"n", m.hidden()},
         {"d_in", m.d_in()},
         {"d_out", m.d_out()},
         {"linear", m.linear}};
  j["schur"] = nn ? to_json(m.schur) : Json(nullptr);
  j["v_dense"] = nn ? Json(nullptr) : rows_full(m.v_dense);
  j["u_in"] = rows_full(m.u_in);
  j["b_hidden"] = m.b_hidden;
  j["w_out"] = rows_full(m.w_out);
  j["b_out"] = m.b_out;
  return j;
}

RnnModel model_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("checkpoint must be an object");
  for (const auto& [k, v] : j.items()) {
    static const std::set<std::string> keys{"cell", "n", "d_in", "d_out", "linear", "schur",
                                            "v_dense", "u_in", "b_hidden", "w_out", "b_out"};
    if (!keys.count(k)) throw ConfigError("checkpoint: unknown key '" + k + "'");
  }
  RnnModel m;
  try {
    const std::string cell = j.at("cell").get<std::string>();
    if (cell != "nnrnn" && cell != "vanilla") throw ConfigError("checkpoint: bad cell");
    m.kind = cell == "nnrnn" ? CellKind::NnRnn : CellKind::VanillaRnn;
    const auto n = j.at("n").get<std::size_t>();
    const auto d_in = j.at("d_in").get<std::size_t>();
    const auto d_out = j.at("d_out").get<std::size_t>();
    m.linear = j.at("linear").get<bool>();
    auto full = [](std::size_t c) { return [c](std::size_t) { return c; }; };
    if (m.kind == CellKind::NnRnn) m.schur = schur_from_json(j.at("schur"));
    else m.v_dense = read_rows(j.at("v_dense"), n, n, full(n), "v_dense");
    m.u_in = read_rows(j.at("u_in"), n, d_in, full(d_in), "u_in");
    m.b_hidden = read_vector(j.at("b_hidden"), "b_hidden");
    m.w_out = read_rows(j.at("w_out"), d_out, n, full(n), "w_out");
    m.b_out = read_vector(j.at("b_out"), "b_out");
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
  checked("checkpoint", [&] { m.validate(); });
  return m;
}

Json to_json(const ConnectivityReport& r) {
  const double ratio = r.nonnormal_ratio();
  return Json{{"n", r.n},
              {"mean_gamma", r.mean_gamma},
              {"t_frobenius", r.t_frobenius},
              {"theta_frobenius", r.theta_frobenius},
              {"nonnormal_ratio", ratio},
              {"regime", to_string(classify_regime(ratio))},
              {"sigma_max_v", r.sigma_max_v},
              {"subdiag_profile", r.subdiag_profile},
              {"gamma_histogram", histogram_json(r.gamma_histogram)},
              {"theta_histogram", histogram_json(r.theta_histogram)}};
}

Json to_json(const ReportDiff& d) {
  return Json{{"mean_gamma", d.mean_gamma},
              {"t_frobenius", d.t_frobenius},
              {"nonnormal_ratio", d.nonnormal_ratio},
              {"sigma_max_v", d.sigma_max_v},
              {"regime_a", to_string(d.regime_a)},
              {"regime_b", to_string(d.regime_b)},
              {"subdiag_profile", d.subdiag_profile},
              {"gamma_histogram", d.gamma_histogram},
              {"theta_histogram", d.theta_histogram}};
}

Json to_json(const Prop2Report& r) {
  Json fits = Json::array();
  for (const auto& f : r.fits) fits.push_back(Json{{"k", f.k}, {"l", f.l}, {"slope", f.slope}});
  return Json{{"n", r.n},
              {"t_max", r.t_max},
              {"passed", r.passed()},
              {"entries_checked", r.entries.size()},
              {"degree_failures", r.degree_failures},
              {"constant_failures", r.constant_failures},
              {"recurrence_failures", r.recurrence_failures},
              {"ratio_failures", r.ratio_failures},
              {"structure_failures", r.structure_failures},
              {"max_ratio_over_bound", r.max_ratio_over_bound},
              {"fits", std::move(fits)}};
}

std::string profile_csv(const ConnectivityReport& r) {
  std::string s = "k,m_k\n";
  for (std::size_t k = 0; k < r.subdiag_profile.size(); ++k)
    s += fmt::format("{},{}\n", k + 1, r.subdiag_profile[k]);
  return s;
}

std::string histogram_csv(const Histogram& h) {
  std::string s = "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    s += fmt::format("{},{},{}\n", h.bin_lo(i), h.bin_hi(i), h.counts[i]);
  return s;
}

std::string transients_csv(const TransientStats& st) {
  std::string s = "t,mean_unit_std,std_unit_std,mean_norm,std_norm\n";
  for (std::size_t t = 0; t < st.mean_norm.size(); ++t)
    s += fmt::format("{},{},{},{},{}\n", t, st.mean_unit_std[t], st.std_unit_std[t],
                     st.mean_norm[t], st.std_norm[t]);
  return s;
}

std::string fmc_curve_csv(const FmcResult& r) {
  std::string s = "k,J\n";
  for (std::size_t k = 0; k < r.j_curve.size(); ++k) s += fmt::format("{},{}\n", k, r.j_curve[k]);
  return s;
}

std::string train_log_csv(const TrainLog& log) {
  std::string s = std::string(kTrainLogHeader) + "\n";
  for (const auto& r : log.records) s += to_csv_row(r) + "\n";
  return s;
}

}  // namespace nnrnn
