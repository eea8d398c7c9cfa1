#include <CLI11.hpp>

#include <iostream>

#include "nnrnn/commands.hpp"

using namespace nnrnn;

int main(int argc, char** argv) {
  CLI::App app{"nnrnn: non-normal RNN experiments"};
  app.require_subcommand(1);

  CommandOptions opts;
  std::uint64_t seed = 0;
  auto common = [&](CLI::App* sub, bool need_config) {
    auto* c = sub->add_option("--config", opts.config, "JSON config file");
    if (need_config) c->required();
    sub->add_option("--out", opts.out, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "overrides the config seed");
  };

  auto* train = app.add_subcommand("train", "train a model on the copy or char-LM task");
  common(train, true);
  auto* fmc = app.add_subcommand("fmc", "Fisher memory curves for a sweep of matrices");
  common(fmc, true);
  auto* tr = app.add_subcommand("transients", "transient ensembles of h <- theta h");
  common(tr, true);
  auto* props = app.add_subcommand("props", "exact and numerical proposition checks");
  common(props, false);
  auto* report = app.add_subcommand("report", "connectivity report for a checkpoint");
  report->add_option("--checkpoint", opts.checkpoint, "checkpoint JSON")->required();
  report->add_option("--compare", opts.compare, "second checkpoint to diff against");
  report->add_option("--config", opts.config, "unused, accepted for symmetry");
  report->add_option("--out", opts.out, "output directory")->capture_default_str();
  report->add_option("--seed", seed, "unused");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  for (auto* sub : {train, fmc, tr, props, report})
    if (sub->parsed() && sub->count("--seed") > 0) opts.seed = seed;

  if (train->parsed()) return cmd_train(opts, std::cout, std::cerr);
  if (fmc->parsed()) return cmd_fmc(opts, std::cout, std::cerr);
  if (tr->parsed()) return cmd_transients(opts, std::cout, std::cerr);
  if (props->parsed()) return cmd_props(opts, std::cout, std::cerr);
  return cmd_report(opts, std::cout, std::cerr);
}
