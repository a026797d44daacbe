#include "hmcf/cli_runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"hmcf: prescribed harmonic-mean-curvature flow on support functions"};
  app.require_subcommand(1);

  std::string config_path, diagnostics_path, guess;
  std::vector<std::string> sweep_configs;
  hmcf::Overrides overrides;

  auto add_override_flags = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "run configuration file")->required();
    for (const char* key :
         {"dim", "resolution", "F", "R1", "R2", "initial", "dt", "dt_policy", "t_max",
          "stationarity_tol", "seed", "output_dir", "snapshot_every", "strict_conditions"}) {
      std::string k = key;
      cmd->add_option_function<std::string>(
          "--" + k, [&overrides, k](const std::string& v) { overrides[k] = v; },
          "override config key " + k);
    }
  };

  auto* check = app.add_subcommand("check", "vet F and the initial data, no time stepping");
  add_override_flags(check);

  auto* flow = app.add_subcommand("flow", "run the support-function flow to stationarity");
  add_override_flags(flow);

  auto* stationary =
      app.add_subcommand("stationary", "solve the stationary equation by damped Newton");
  add_override_flags(stationary);
  stationary->add_option("--guess", guess,
                         "initial guess: a constant radius or a field file path "
                         "(default: the config's initial data)");

  auto* plot = app.add_subcommand("plot", "render plot files from a diagnostics series");
  plot->add_option("diagnostics", diagnostics_path, "diagnostics.csv from a flow run")
      ->required();

  auto* sweep = app.add_subcommand("sweep", "run several flow configs concurrently");
  sweep->add_option("configs", sweep_configs, "config files, one run each")->required();

  CLI11_PARSE(app, argc, argv);

  if (check->parsed()) return hmcf::cmd_check(config_path, overrides, std::cout);
  if (flow->parsed()) return hmcf::cmd_flow(config_path, overrides, std::cout);
  if (stationary->parsed())
    return hmcf::cmd_stationary(config_path, overrides, guess, std::cout);
  if (plot->parsed()) return hmcf::cmd_plot(diagnostics_path, std::cout);
  if (sweep->parsed()) return hmcf::cmd_sweep(sweep_configs, std::cout);
  return 1;
}
