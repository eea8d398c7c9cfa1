#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>

namespace nnrnn {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out = ".";
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  std::filesystem::path checkpoint;   // report only
  std::filesystem::path compare;      // report only, optional second checkpoint
};

// Each command writes its artifacts under opts.out (created if missing),
// prints a short summary to `msg` and diagnostics to `err`, and returns an
// exit code: 0 ok, 1 config error, 2 numerical failure or failed check.
int cmd_train(const CommandOptions& opts, std::ostream& msg, std::ostream& err);
int cmd_fmc(const CommandOptions& opts, std::ostream& msg, std::ostream& err);
int cmd_transients(const CommandOptions& opts, std::ostream& msg, std::ostream& err);
int cmd_props(const CommandOptions& opts, std::ostream& msg, std::ostream& err);
int cmd_report(const CommandOptions& opts, std::ostream& msg, std::ostream& err);

}  // namespace nnrnn
