#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nnrnn/analysis.hpp"
#include "nnrnn/memory.hpp"
#include "nnrnn/optim.hpp"
#include "nnrnn/propcheck.hpp"
#include "nnrnn/rnn.hpp"
#include "nnrnn/tasks.hpp"

namespace nnrnn {

using Json = nlohmann::ordered_json;

/// Malformed or unreadable configuration; maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json load_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

// ---- configs ----

enum class TaskKind { Copy, CharLm };

struct ModelSpec {
  CellKind cell = CellKind::NnRnn;
  std::size_t hidden = 128;
  InitScheme init = InitScheme::Henaff;
  bool linear = false;
};

struct TrainRunConfig {
  TaskKind task = TaskKind::Copy;
  ModelSpec model;
  CopyTaskSpec copy;
  CharLmSpec char_lm;  // corpus resolved against the config file's directory
  TrainConfig train;
  std::uint64_t seed = 0;
};

/// Train defaults depend on the task; keys present in "train" override them.
TrainRunConfig parse_train_config(const Json& j, const std::filesystem::path& base_dir = {});

struct FmcRun {
  std::string name;
  FmcConfig cfg;
};

struct FmcSweepConfig {
  std::vector<FmcRun> runs;
  std::uint64_t seed = 0;
};

FmcSweepConfig parse_fmc_config(const Json& j);

struct TransientRun {
  std::string name;
  FmcConfig cfg;
  std::size_t n_samples = 1000;
  std::size_t t_max = 120;
};

struct TransientConfig {
  std::vector<TransientRun> runs;
  std::uint64_t seed = 0;
};

TransientConfig parse_transient_config(const Json& j);

struct PropsConfig {
  std::size_t prop2_n_max = 8;
  std::size_t prop2_t_max = 30;
  Prop1SweepConfig prop1;
  std::size_t growth_t_max = 400;
  std::uint64_t seed = 0;
};

PropsConfig parse_props_config(const Json& j);

// ---- models and reports ----

Json to_json(const SchurParams& p);
SchurParams schur_from_json(const Json& j);

Json checkpoint_to_json(const RnnModel& m);
/// Throws ConfigError on a malformed checkpoint.
RnnModel model_from_json(const Json& j);

Json to_json(const ConnectivityReport& r);
Json to_json(const ReportDiff& d);
Json to_json(const Prop2Report& r);

/// k,m_k
std::string profile_csv(const ConnectivityReport& r);
/// bin_lo,bin_hi,count
std::string histogram_csv(const Histogram& h);
/// t,mean_unit_std,std_unit_std,mean_norm,std_norm
std::string transients_csv(const TransientStats& s);
/// k,J
std::string fmc_curve_csv(const FmcResult& r);

std::string train_log_csv(const TrainLog& log);

}  // namespace nnrnn
