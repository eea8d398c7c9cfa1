#include "nnrnn/commands.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "nnrnn/io.hpp"

namespace nnrnn {

namespace fs = std::filesystem;

namespace {

// Shared error mapping for all commands.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

Json read_config(const CommandOptions& opts) {
  if (opts.config.empty()) throw ConfigError("--config is required");
  return load_json(opts.config);
}

void prepare_out(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigError("cannot create output directory " + out.string() + ": " + ec.message());
}

void write_connectivity(const fs::path& out, const ConnectivityReport& r, const std::string& stem) {
  write_json(out / (stem + ".json"), to_json(r));
  write_text(out / (stem + "_profile.csv"), profile_csv(r));
  write_text(out / (stem + "_theta_hist.csv"), histogram_csv(r.theta_histogram));
  write_text(out / (stem + "_gamma_hist.csv"), histogram_csv(r.gamma_histogram));
}

RnnModel build_model(const ModelSpec& spec, std::size_t d_in, std::size_t d_out, std::uint64_t seed) {
  RnnModel m = spec.cell == CellKind::NnRnn
                   ? make_nnrnn(spec.hidden, d_in, d_out, spec.init, seed)
                   : make_vanilla_rnn(spec.hidden, d_in, d_out, seed);
  m.linear = spec.linear;
  return m;
}

}  // namespace

int cmd_train(const CommandOptions& opts, std::ostream& msg, std::ostream& err) {
  return guarded(err, [&] {
    const Json j = read_config(opts);
    TrainRunConfig cfg = parse_train_config(j, opts.config.parent_path());
    if (opts.seed) {
      cfg.seed = *opts.seed;
      cfg.train.seed = *opts.seed;
    }
    cfg.copy.seed = cfg.seed;

    std::unique_ptr<TaskStream> stream;
    if (cfg.task == TaskKind::Copy) {
      stream = std::make_unique<CopyTaskStream>(cfg.copy);
    } else {
      std::string text;
      try {
        text = read_corpus(cfg.char_lm.corpus);
      } catch (const std::exception& e) {
        throw ConfigError(e.what());
      }
      try {
        stream = std::make_unique<CharLmStream>(std::move(text), cfg.char_lm.window,
                                                cfg.char_lm.batch_size);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("char_lm: ") + e.what());
      }
    }
    prepare_out(opts.out);

    RnnModel model = build_model(cfg.model, stream->d_in(), stream->n_classes(), cfg.seed);
    const TrainLog log = train_loop(model, *stream, cfg.train);
    write_text(opts.out / "train_log.csv", train_log_csv(log));
    write_json(opts.out / "checkpoint.json", checkpoint_to_json(model));
    if (model.kind == CellKind::NnRnn)
      write_connectivity(opts.out, connectivity_report(model.schur), "connectivity");

    if (!log.records.empty()) {
      const TrainRecord& last = log.records.back();
      msg << fmt::format("updates {}  loss {:.6f}  mean_gamma {:.6f}  t_fro {:.6f}\n", log.updates,
                         last.loss, last.mean_gamma, last.t_fro);
    } else {
      msg << "updates 0\n";
    }
    if (log.diverged) {
      err << "diverged: " << log.message << "\n";
      return kExitNumerical;
    }
    return kExitOk;
  });
}

int cmd_fmc(const CommandOptions& opts, std::ostream& msg, std::ostream& err) {
  return guarded(err, [&] {
    const FmcSweepConfig cfg = parse_fmc_config(read_config(opts));
    prepare_out(opts.out);
    std::string summary = "index,name,n,d,alpha,beta,eps,j_tot,truncation_terms,covariance_terms,status\n";
    bool failed = false;
    for (std::size_t i = 0; i < cfg.runs.size(); ++i) {
      const FmcRun& run = cfg.runs[i];
      std::string status = "ok";
      FmcResult r;
      try {
        r = fisher_memory_curve(run.cfg);
        if (r.truncated) status = "truncated";
      } catch (const NumericalError& e) {
        status = "diverged";
        err << fmt::format("{}: {}\n", run.name, e.what());
      }
      if (status != "ok") failed = true;
      if (status != "diverged")
        write_text(opts.out / fmt::format("fmc_{:02}.csv", i + 1), fmc_curve_csv(r));
      summary += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", i + 1, run.name, run.cfg.n,
                             run.cfg.d, run.cfg.alpha, run.cfg.beta, run.cfg.eps,
                             status == "diverged" ? std::string("nan") : fmt::format("{}", r.j_tot),
                             r.truncation_terms, r.covariance_terms, status);
      msg << fmt::format("{:>10}  d={:<5} alpha={:<5} beta={:<5} J_tot={:<10.6f} {}\n", run.name,
                         run.cfg.d, run.cfg.alpha, run.cfg.beta,
                         status == "diverged" ? std::nan("") : r.j_tot, status);
    }
    write_text(opts.out / "fmc_summary.csv", summary);
    return failed ? kExitNumerical : kExitOk;
  });
}

int cmd_transients(const CommandOptions& opts, std::ostream& msg, std::ostream& err) {
  return guarded(err, [&] {
    TransientConfig cfg = parse_transient_config(read_config(opts));
    if (opts.seed) cfg.seed = *opts.seed;
    prepare_out(opts.out);
    std::string summary = "index,name,n,d,alpha,beta,peak_t,peak_mean_norm\n";
    for (std::size_t i = 0; i < cfg.runs.size(); ++i) {
      const TransientRun& run = cfg.runs[i];
      const TransientStats st = transient_ensemble(run.cfg, run.n_samples, run.t_max, cfg.seed);
      write_text(opts.out / fmt::format("transients_{:02}.csv", i + 1), transients_csv(st));
      // t = 0 is the unit initial state; the transient peak is taken after it
      const auto first = st.mean_norm.begin() + (st.mean_norm.size() > 1 ? 1 : 0);
      const auto peak = std::max_element(first, st.mean_norm.end());
      const auto peak_t = static_cast<std::size_t>(peak - st.mean_norm.begin());
      summary += fmt::format("{},{},{},{},{},{},{},{}\n", i + 1, run.name, run.cfg.n, run.cfg.d,
                             run.cfg.alpha, run.cfg.beta, peak_t, *peak);
      msg << fmt::format("{:>10}  peak mean norm {:.6f} at t={}\n", run.name, *peak, peak_t);
    }
    write_text(opts.out / "transients_summary.csv", summary);
    return kExitOk;
  });
}

int cmd_props(const CommandOptions& opts, std::ostream& msg, std::ostream& err) {
  return guarded(err, [&] {
    PropsConfig cfg = opts.config.empty() ? PropsConfig{} : parse_props_config(read_config(opts));
    if (opts.seed) cfg.seed = *opts.seed;
    cfg.prop1.seed = cfg.seed;
    prepare_out(opts.out);

    Json p2 = Json::array();
    std::size_t p2_fail = 0;
    for (std::size_t n = 2; n <= cfg.prop2_n_max; ++n) {
      const Prop2Report r = verify_prop2(n, cfg.prop2_t_max);
      if (!r.passed()) ++p2_fail;
      p2.push_back(to_json(r));
    }
    write_json(opts.out / "prop2_report.json", Json{{"t_max", cfg.prop2_t_max}, {"reports", p2}});

    const auto p1 = prop1_sweep(cfg.prop1);
    std::size_t p1_fail = 0;
    std::string p1csv = "trial,n,alpha,sigma_max,min_margin,violations\n";
    for (std::size_t i = 0; i < p1.size(); ++i) {
      const Prop1Report& r = p1[i];
      if (!r.holds()) ++p1_fail;
      const double min_margin = *std::min_element(r.margin.begin(), r.margin.end());
      p1csv += fmt::format("{},{},{},{},{},{}\n", i, r.n, r.alpha, r.sigma_max, min_margin,
                           r.violations);
    }
    write_text(opts.out / "prop1_report.csv", p1csv);

    const auto suite = growth_probe_suite(cfg.seed);
    std::size_t g_fail = 0;
    std::string gcsv = "name,n,expected,classified,loglog_slope,t_reached,overflow\n";
    for (const auto& c : suite) {
      const GrowthProbe p = iterate_growth_probe(c.m, cfg.growth_t_max);
      if (p.growth != c.expected) ++g_fail;
      gcsv += fmt::format("{},{},{},{},{},{},{}\n", c.name, c.m.rows(), to_string(c.expected),
                          to_string(p.growth), p.loglog_slope, p.t_reached, p.overflow ? 1 : 0);
    }
    write_text(opts.out / "growth_suite.csv", gcsv);

    std::string summary = "check,cases,failures,status\n";
    auto row = [&](const char* name, std::size_t cases, std::size_t fails) {
      summary += fmt::format("{},{},{},{}\n", name, cases, fails, fails == 0 ? "pass" : "fail");
      msg << fmt::format("{:<16} {:>5} cases  {:>3} failures  {}\n", name, cases, fails,
                         fails == 0 ? "PASS" : "FAIL");
    };
    row("prop2_exact", cfg.prop2_n_max - 1, p2_fail);
    row("prop1_bound", p1.size(), p1_fail);
    row("growth_suite", suite.size(), g_fail);
    write_text(opts.out / "props_summary.csv", summary);
    return p2_fail + p1_fail + g_fail == 0 ? kExitOk : kExitNumerical;
  });
}

int cmd_report(const CommandOptions& opts, std::ostream& msg, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.checkpoint.empty()) throw ConfigError("--checkpoint is required");
    auto load = [](const fs::path& p) {
      RnnModel m = model_from_json(load_json(p));
      if (m.kind != CellKind::NnRnn) throw ConfigError(p.string() + ": report needs an nnrnn checkpoint");
      return connectivity_report(m.schur);
    };
    const ConnectivityReport a = load(opts.checkpoint);
    prepare_out(opts.out);
    write_connectivity(opts.out, a, "report");
    msg << fmt::format("n {}  mean_gamma {:.6f}  t_fro {:.6f}  ratio {:.6f}  {}\n", a.n,
                       a.mean_gamma, a.t_frobenius, a.nonnormal_ratio(),
                       to_string(classify_regime(a.nonnormal_ratio())));
    if (!opts.compare.empty()) {
      const ConnectivityReport b = load(opts.compare);
      ReportDiff d;
      try {
        d = run_comparison(a, b);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      write_connectivity(opts.out, b, "report_b");
      write_json(opts.out / "comparison.json", to_json(d));
      msg << fmt::format("compare: {} -> {}  delta t_fro {:.6f}\n", to_string(d.regime_a),
                         to_string(d.regime_b), d.t_frobenius);
    }
    return kExitOk;
  });
}

}  // namespace nnrnn
