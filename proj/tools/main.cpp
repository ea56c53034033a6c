#include <CLI11.hpp>

#include "heston/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "Degenerate-elliptic Heston operator toolkit: weighted-Sobolev solves, "
      "norm evaluation, commutator checks, and a priori estimate sweeps"};

  heston::CliOptions opt;
  app.add_option("--config", opt.config_path, "configuration file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", opt.out_dir, "output directory")
      ->capture_default_str();
  app.add_option("--threads", opt.threads, "worker threads for sweeps")
      ->capture_default_str();
  app.add_option("--seed", opt.seed, "seed for sampling-based checks")
      ->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  return heston::run_cli(opt);
}
