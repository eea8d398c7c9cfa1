#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nnrnn/commands.hpp"
#include "nnrnn/io.hpp"

using namespace nnrnn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nnrnn_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const Json& j) {
  const fs::path p = dir / "config.json";
  write_json(p, j);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

Json copy_config(std::size_t updates) {
  return Json{{"task", "copy"},
              {"seed", 3},
              {"model", {{"hidden", 8}}},
              {"copy", {{"delay", 5}}},
              {"train", {{"max_updates", updates}, {"log_every", 1}}}};
}

struct CmdResult {
  int rc;
  std::string out, err;
};

template <class F>
CmdResult run(F cmd, const CommandOptions& o) {
  std::ostringstream m, e;
  const int rc = cmd(o, m, e);
  return {rc, m.str(), e.str()};
}

}  // namespace

TEST(Config, UnknownKeysRejected) {
  Json j = copy_config(1);
  j["bogus"] = 1;
  EXPECT_THROW(parse_train_config(j), ConfigError);
  j = copy_config(1);
  j["train"]["learning_rate"] = 1e-3;
  try {
    parse_train_config(j);
    FAIL() << "accepted an unknown key";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("train.learning_rate"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_fmc_config(Json{{"runs", {{{"n", 5}, {"gamma", 1}}}}}), ConfigError);
  EXPECT_THROW(parse_props_config(Json{{"prop3", {}}}), ConfigError);
}

TEST(Config, TypeAndRangeErrors) {
  Json j = copy_config(1);
  j["train"]["max_updates"] = -1;
  EXPECT_THROW(parse_train_config(j), ConfigError);
  j = copy_config(1);
  j["train"]["lr"] = "fast";
  EXPECT_THROW(parse_train_config(j), ConfigError);
  j = copy_config(1);
  j["model"]["hidden"] = 7;
  EXPECT_THROW(parse_train_config(j), ConfigError);
  j = copy_config(1);
  j["train"]["rms_alpha"] = 1.5;
  EXPECT_THROW(parse_train_config(j), ConfigError);
  EXPECT_THROW(parse_train_config(Json{{"seed", 1}}), ConfigError);
  EXPECT_THROW(parse_fmc_config(Json{{"runs", {{{"d", 1.0}}}}}), ConfigError);
  EXPECT_THROW(parse_props_config(Json{{"prop2", {{"n_max", 9}}}}), ConfigError);
}

TEST(Config, TaskDefaults) {
  const TrainRunConfig c = parse_train_config(Json{{"task", "copy"}});
  EXPECT_EQ(c.train.lr, TrainConfig::copy_defaults().lr);
  const TrainRunConfig l = parse_train_config(
      Json{{"task", "char_lm"}, {"char_lm", {{"corpus", "x.txt"}}}}, "/data");
  EXPECT_EQ(l.train.lr, TrainConfig::char_lm_defaults().lr);
  EXPECT_EQ(l.char_lm.corpus, fs::path("/data/x.txt"));
  EXPECT_EQ(l.char_lm.batch_size, l.train.batch_size);
}

TEST(Checkpoint, RoundTripIsExact) {
  for (CellKind kind : {CellKind::NnRnn, CellKind::VanillaRnn}) {
    RnnModel m = kind == CellKind::NnRnn ? make_nnrnn(6, 3, 4, InitScheme::RandomOrth, 5)
                                         : make_vanilla_rnn(6, 3, 4, 5);
    if (kind == CellKind::NnRnn) m.schur.t_lower(4, 1) = 0.123456789012345;
    const Json j = checkpoint_to_json(m);
    const RnnModel back = model_from_json(Json::parse(j.dump()));
    EXPECT_EQ(checkpoint_to_json(back).dump(), j.dump());
    if (kind == CellKind::NnRnn) {
      EXPECT_EQ(back.schur.t_lower(4, 1), 0.123456789012345);
      EXPECT_EQ(back.schur.b_skew(0, 3), -back.schur.b_skew(3, 0));
    }
  }
}

TEST(Checkpoint, MalformedRejected) {
  Json j = checkpoint_to_json(make_nnrnn(4, 2, 2, InitScheme::Henaff, 0));
  Json bad = j;
  bad["schur"]["t_lower"][1] = Json::array({0.5});  // block-owned entry
  EXPECT_THROW(model_from_json(bad), ConfigError);
  bad = j;
  bad["u_in"].erase(0);
  EXPECT_THROW(model_from_json(bad), ConfigError);
  bad = j;
  bad["extra"] = 0;
  EXPECT_THROW(model_from_json(bad), ConfigError);
}

TEST(CmdTrain, MissingConfigExitsOne) {
  CommandOptions o;
  o.config = "/nonexistent/config.json";
  o.out = scratch("missing");
  const CmdResult r = run(cmd_train, o);
  EXPECT_EQ(r.rc, kExitConfig);
  EXPECT_NE(r.err.find("cannot open"), std::string::npos);
}

TEST(CmdTrain, ZeroUpdatesLeavesInit) {
  const fs::path dir = scratch("zero");
  CommandOptions o;
  o.config = write_config(dir, copy_config(0));
  o.out = dir / "out";
  EXPECT_EQ(run(cmd_train, o).rc, kExitOk);
  EXPECT_EQ(line_count(slurp(o.out / "train_log.csv")), 1u);
  const RnnModel init = make_nnrnn(8, kCopyInputWidth, kCopyClasses, InitScheme::Henaff, 3);
  EXPECT_EQ(load_json(o.out / "checkpoint.json").dump(), checkpoint_to_json(init).dump());
  EXPECT_EQ(load_json(o.out / "connectivity.json")["t_frobenius"].get<double>(), 0.0);
}

TEST(CmdTrain, DeterministicAndSeedOverride) {
  const fs::path dir = scratch("det");
  CommandOptions o;
  o.config = write_config(dir, copy_config(6));
  o.out = dir / "a";
  ASSERT_EQ(run(cmd_train, o).rc, kExitOk);
  o.out = dir / "b";
  ASSERT_EQ(run(cmd_train, o).rc, kExitOk);
  for (const char* f : {"train_log.csv", "checkpoint.json", "connectivity.json",
                        "connectivity_profile.csv"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  EXPECT_EQ(line_count(slurp(dir / "a" / "train_log.csv")), 7u);
  o.out = dir / "c";
  o.seed = 4;
  ASSERT_EQ(run(cmd_train, o).rc, kExitOk);
  EXPECT_NE(slurp(dir / "a" / "checkpoint.json"), slurp(dir / "c" / "checkpoint.json"));
}

TEST(CmdTrain, DivergenceExitsTwo) {
  const fs::path dir = scratch("div");
  Json j = copy_config(30);
  j["model"] = {{"hidden", 8}, {"cell", "vanilla"}, {"linear", true}};
  j["copy"]["delay"] = 50;
  j["train"]["lr"] = 1e6;
  CommandOptions o;
  o.config = write_config(dir, j);
  o.out = dir / "out";
  const CmdResult r = run(cmd_train, o);
  EXPECT_EQ(r.rc, kExitNumerical);
  EXPECT_TRUE(fs::exists(o.out / "train_log.csv"));
}

TEST(CmdTrain, CharLmRuns) {
  const fs::path dir = scratch("charlm");
  std::string text;
  for (int i = 0; i < 200; ++i) text += "abc def ghi. ";
  write_text(dir / "corpus.txt", text);
  CommandOptions o;
  o.config = write_config(dir, Json{{"task", "char_lm"},
                                    {"model", {{"hidden", 8}}},
                                    {"char_lm", {{"corpus", "corpus.txt"}, {"window", 10}}},
                                    {"train", {{"batch_size", 2}, {"max_updates", 3}}}});
  o.out = dir / "out";
  EXPECT_EQ(run(cmd_train, o).rc, kExitOk);
  EXPECT_EQ(line_count(slurp(o.out / "train_log.csv")), 4u);

  o.config = write_config(dir, Json{{"task", "char_lm"}, {"char_lm", {{"corpus", "nope.txt"}}}});
  EXPECT_EQ(run(cmd_train, o).rc, kExitConfig);
}

TEST(CmdFmc, EmptySweep) {
  const fs::path dir = scratch("fmc_empty");
  CommandOptions o;
  o.config = write_config(dir, Json{{"runs", Json::array()}});
  o.out = dir / "out";
  EXPECT_EQ(run(cmd_fmc, o).rc, kExitOk);
  EXPECT_EQ(line_count(slurp(o.out / "fmc_summary.csv")), 1u);
}

TEST(CmdFmc, DelayLineMatchesClosedForm) {
  const fs::path dir = scratch("fmc_dl");
  CommandOptions o;
  // unit sub-diagonal: J(k) = 1 / (k + 1)
  o.config = write_config(dir, Json{{"k_max", 50}, {"runs", {{{"n", 40}, {"alpha", 1.0}}}}});
  o.out = dir / "out";
  ASSERT_EQ(run(cmd_fmc, o).rc, kExitOk);
  std::istringstream in(slurp(o.out / "fmc_01.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "k,J");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    const std::size_t k = std::stoul(line.substr(0, comma));
    const double j = std::stod(line.substr(comma + 1));
    if (k < 40) EXPECT_NEAR(j, delay_line_fmc_closed_form(1.0, k), 1e-12) << k;
    ++rows;
  }
  EXPECT_GE(rows, 40u);
}

TEST(CmdFmc, NonConvergenceFlagged) {
  const fs::path dir = scratch("fmc_div");
  CommandOptions o;
  o.config = write_config(dir, Json{{"runs", {{{"n", 10}, {"d", 0.5}}, {{"n", 4}, {"d", 0.999}}}}});
  o.out = dir / "out";
  const CmdResult r = run(cmd_fmc, o);
  EXPECT_EQ(r.rc, kExitNumerical);
  const std::string summary = slurp(o.out / "fmc_summary.csv");
  EXPECT_EQ(line_count(summary), 3u);
  EXPECT_NE(summary.find("1,run01,10,0.5,1,0,1,"), std::string::npos);
  EXPECT_NE(summary.find("2,run02,4,0.999,1,0,1,nan,0,0,diverged\n"), std::string::npos);
  EXPECT_TRUE(fs::exists(o.out / "fmc_01.csv"));
  EXPECT_FALSE(fs::exists(o.out / "fmc_02.csv"));
}

TEST(CmdTransients, ReproducibleBytes) {
  const fs::path dir = scratch("tr");
  CommandOptions o;
  o.config = write_config(dir, Json{{"n_samples", 1}, {"t_max", 30}, {"seed", 11},
                                    {"runs", {{{"n", 20}, {"alpha", 1.05}, {"beta", 0.01}}}}});
  o.out = dir / "a";
  ASSERT_EQ(run(cmd_transients, o).rc, kExitOk);
  o.out = dir / "b";
  ASSERT_EQ(run(cmd_transients, o).rc, kExitOk);
  const std::string a = slurp(dir / "a" / "transients_01.csv");
  EXPECT_EQ(a, slurp(dir / "b" / "transients_01.csv"));
  EXPECT_EQ(a.substr(0, a.find('\n')), "t,mean_unit_std,std_unit_std,mean_norm,std_norm");
  EXPECT_EQ(line_count(a), 32u);
  o.out = dir / "c";
  o.seed = 12;
  ASSERT_EQ(run(cmd_transients, o).rc, kExitOk);
  EXPECT_NE(a, slurp(dir / "c" / "transients_01.csv"));
}

TEST(CmdProps, DefaultGridPasses) {
  const fs::path dir = scratch("props");
  CommandOptions o;
  o.out = dir;
  const CmdResult r = run(cmd_props, o);
  EXPECT_EQ(r.rc, kExitOk) << r.out << r.err;
  const Json p2 = load_json(dir / "prop2_report.json");
  EXPECT_EQ(p2["reports"].size(), 7u);
  for (const auto& rep : p2["reports"]) EXPECT_TRUE(rep["passed"].get<bool>());
  EXPECT_EQ(line_count(slurp(dir / "prop1_report.csv")), 201u);
  EXPECT_EQ(line_count(slurp(dir / "growth_suite.csv")), 31u);
}

TEST(CmdReport, InitCheckpointHasNoTriangle) {
  const fs::path dir = scratch("report");
  write_json(dir / "ck.json", checkpoint_to_json(make_nnrnn(10, 3, 3, InitScheme::Henaff, 1)));
  CommandOptions o;
  o.checkpoint = dir / "ck.json";
  o.out = dir / "out";
  ASSERT_EQ(run(cmd_report, o).rc, kExitOk);
  const Json rep = load_json(o.out / "report.json");
  EXPECT_EQ(rep["t_frobenius"].get<double>(), 0.0);
  EXPECT_EQ(rep["regime"].get<std::string>(), "normal");
  EXPECT_EQ(rep["subdiag_profile"].size(), 9u);

  o.compare = dir / "ck.json";
  ASSERT_EQ(run(cmd_report, o).rc, kExitOk);
  EXPECT_EQ(load_json(o.out / "comparison.json")["t_frobenius"].get<double>(), 0.0);

  write_json(dir / "ck2.json", checkpoint_to_json(make_nnrnn(12, 3, 3, InitScheme::Henaff, 1)));
  o.compare = dir / "ck2.json";
  EXPECT_EQ(run(cmd_report, o).rc, kExitConfig);
  o.checkpoint = dir / "missing.json";
  EXPECT_EQ(run(cmd_report, o).rc, kExitConfig);
}
