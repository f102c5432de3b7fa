#include <CLI11.hpp>

#include <iostream>

#include "m2msim/cli/commands.hpp"

using namespace m2msim::cli;

int main(int argc, char** argv) {
  CLI::App app{"m2msim: sliced M2M random access with belief-based RB selection"};
  app.require_subcommand(1);

  RunOptions run;
  std::string run_out;
  auto* r = app.add_subcommand("run", "Simulate one scenario");
  r->add_option("--config", run.config, "Profile name or YAML file")->capture_default_str();
  r->add_option("--set", run.overrides, "Override a key, e.g. observation.epsilon=0.3 or slices.0.weight=2");
  r->add_option("--seed", run.seed, "Override the seed");
  r->add_option("--out", run_out, "Output directory (default $M2MSIM_OUT_DIR or ./m2msim-out)");

  SweepOptions sweep;
  std::string sweep_out;
  auto* s = app.add_subcommand("sweep", "Run a parameter sweep over seeds");
  s->add_option("--config", sweep.config, "Profile name or YAML file")->capture_default_str();
  s->add_option("--set", sweep.overrides, "Override a key before sweeping");
  s->add_option("--axis", sweep.axis, "rbs, epsilon, beta, omega, mu or devices")->required();
  s->add_option("--values", sweep.values, "a,b,c or start:stop[:step]")->required();
  s->add_option("--seeds", sweep.seeds, "a,b,c or start:stop")->capture_default_str();
  s->add_option("--threads", sweep.threads, "Worker threads (0 = all cores)")->capture_default_str();
  s->add_option("--out", sweep_out, "Output directory");

  VerifyOptions verify;
  auto* v = app.add_subcommand("verify", "Run the controller and planner self-checks");
  v->add_option("--only", verify.only, "deadbeat or pomdp-oracle");
  v->add_option("--plant-mu-scale", verify.plant_mu_scale, "Plant gain relative to the controller's mu")
      ->capture_default_str();
  v->add_option("--tolerance", verify.tolerance)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : validation_error;
  }

  if (*r) {
    run.out_dir = run_out;
    return cmd_run(run, std::cout, std::cerr);
  }
  if (*s) {
    sweep.out_dir = sweep_out;
    return cmd_sweep(sweep, std::cout, std::cerr);
  }
  return cmd_verify(verify, std::cout, std::cerr);
}
