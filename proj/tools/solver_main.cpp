#include <CLI11.hpp>

#include "phireg/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"nonsmooth convex solver with certified inexact prox evaluations"};
  app.require_subcommand(1);

  phireg::CliOptions options;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_path;

  const char* commands[] = {"solve",            "verify-regularizer", "verify-lemma2",
                            "verify-lipschitz", "rate",               "suite"};
  for (const char* name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--seed", seed, "seed for all sampled randomness");
    sub->add_option("--out", out_path, "output path (prefix for solve, directory for suite)");
    sub->callback([&options, sub, name]() { options.command = name; (void)sub; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--config")) options.config_path = config_path;
  if (sub->count("--seed")) options.seed = seed;
  if (sub->count("--out")) options.out_path = out_path;
  return phireg::run_command(options);
}
