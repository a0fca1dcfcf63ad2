#include "ipd/cli.hpp"

#include "ipd/error.hpp"
#include "ipd/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <optional>

namespace ipd {

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

RunConfig load_run_config(const CommonFlags& f) {
  RunConfig cfg = load_config(f.config);
  if (f.seed) cfg.scenario.master_seed = *f.seed;
  if (f.threads) cfg.scenario.threads = *f.threads;
  return cfg;
}

void add_common(CLI::App* cmd, CommonFlags& f, bool out_required = true) {
  cmd->add_option("--config", f.config, "INI configuration file")->required();
  auto* out = cmd->add_option("--out", f.out, "output path ('-' for standard output)");
  if (out_required) out->required();
  cmd->add_option("--seed", f.seed, "master seed, overrides [run] seed");
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores); results do not depend on it");
}

std::vector<GridCell> grid_for(const StrategyBundle& s, const GridSettings& g, SolverMode mode) {
  return decision_grid(s, aversion_grid(g.lambda_max, g.steps), aversion_grid(g.theta_max, g.steps), mode);
}

}  // namespace

CsvInputs load_csv_inputs(const std::string& data_path, const std::string& holdout_path, const std::string& target) {
  CsvInputs in;
  in.data = load_calibration_csv(data_path);
  const auto& cols = in.data.columns;
  const auto it = std::find(cols.begin(), cols.end(), target);
  if (it == cols.end()) fail(ErrorKind::SchemaError, "target column '" + target + "' is not in the data");
  in.target = static_cast<std::size_t>(it - cols.begin());
  if (holdout_path.empty()) {
    in.holdout = in.data.points.front().lab;
  } else {
    in.holdout = load_labeled_csv(holdout_path);
    if (in.holdout.X.column_names() != cols)
      fail(ErrorKind::SchemaError, "holdout columns do not match the calibration data");
  }
  return in;
}

DecisionRun decide_from_csv(const ScenarioConfig& cfg, const CsvInputs& inputs) {
  BootstrapConfig boot = cfg.boot;
  boot.master_seed = cfg.master_seed;
  boot.threads = cfg.threads;

  DecisionRun run;
  run.seed = cfg.master_seed;
  run.strategies = estimate_all(inputs.data.points, inputs.holdout, cfg.cost, boot, cfg.t_future, inputs.target);
  if (cfg.preferences.calibrate) {
    const ResampledNullScenario null_scenario(inputs.data.points, inputs.holdout, cfg.cost, boot, cfg.t_future,
                                              inputs.target);
    Rng rng(derive_seed(cfg.master_seed, StreamTag::NullScenario));
    run.calibration =
        calibrate_preferences(null_scenario, cfg.preferences.alpha, cfg.preferences.mc_draws, rng, cfg.threads);
    run.prefs = run.calibration->prefs;
    run.calibrated = true;
  } else {
    run.prefs = {cfg.preferences.lambda, cfg.preferences.theta, cfg.preferences.alpha};
  }
  const auto& s = run.strategies;
  run.solution = solve_weights(s.refit, s.recalibrate.estimate, s.retain.estimate.mean_mse, s.covariance, run.prefs,
                               cfg.solver);
  return run;
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Retain / refit / recalibrate decisions for models whose predictions feed a regression"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonFlags decide_f, sim_f, cal_f, grid_f;
  std::string decide_data, decide_holdout, cal_data, cal_holdout, grid_data, grid_holdout, grid_out;
  std::optional<double> alpha, lambda_max, theta_max;
  std::optional<std::size_t> steps;

  auto* decide = app.add_subcommand("decide", "estimate the three strategies on a calibration CSV and decide");
  add_common(decide, decide_f);
  decide->add_option("--data", decide_data, "calibration CSV")->required();
  decide->add_option("--holdout", decide_holdout, "labeled CSV used as the refit holdout");

  auto* simulate = app.add_subcommand("simulate", "run the built-in drifting simulation end to end");
  add_common(simulate, sim_f);
  simulate->add_option("--grid-out", grid_out, "also write the decision grid CSV here");

  auto* calibrate = app.add_subcommand("calibrate-preferences", "calibrate lambda and theta at a Type-I level");
  add_common(calibrate, cal_f);
  calibrate->add_option("--data", cal_data, "calibration CSV")->required();
  calibrate->add_option("--holdout", cal_holdout, "labeled CSV used as the refit holdout");
  calibrate->add_option("--alpha", alpha, "Type-I level, overrides [preferences] alpha");

  auto* grid = app.add_subcommand("grid", "decisions over a lambda x theta grid");
  add_common(grid, grid_f);
  grid->add_option("--data", grid_data, "calibration CSV")->required();
  grid->add_option("--holdout", grid_holdout, "labeled CSV used as the refit holdout");
  grid->add_option("--lambda-max", lambda_max, "largest lambda");
  grid->add_option("--theta-max", theta_max, "largest theta");
  grid->add_option("--steps", steps, "grid points per axis (1 = only the maxima)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*decide) {
      const RunConfig cfg = load_run_config(decide_f);
      const CsvInputs in = load_csv_inputs(decide_data, decide_holdout, cfg.scenario.target);
      write_text(decide_f.out, canonical_dump(decision_json(decide_from_csv(cfg.scenario, in))));
    } else if (*simulate) {
      const RunConfig cfg = load_run_config(sim_f);
      const ScenarioReport report = run_scenario(cfg.scenario);
      write_text(sim_f.out, canonical_dump(scenario_json(report)));
      if (!grid_out.empty())
        write_text(grid_out, format_grid_csv(grid_for(report.run.strategies, cfg.grid, cfg.scenario.solver)));
    } else if (*calibrate) {
      RunConfig cfg = load_run_config(cal_f);
      if (alpha) cfg.scenario.preferences.alpha = *alpha;
      if (!(cfg.scenario.preferences.alpha > 0.0 && cfg.scenario.preferences.alpha < 1.0))
        fail(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
      const ScenarioConfig& sc = cfg.scenario;
      const CsvInputs in = load_csv_inputs(cal_data, cal_holdout, sc.target);
      BootstrapConfig boot = sc.boot;
      boot.master_seed = sc.master_seed;
      boot.threads = sc.threads;
      const ResampledNullScenario null_scenario(in.data.points, in.holdout, sc.cost, boot, sc.t_future, in.target);
      Rng rng(derive_seed(sc.master_seed, StreamTag::NullScenario));
      const PreferenceCalibration cal =
          calibrate_preferences(null_scenario, sc.preferences.alpha, sc.preferences.mc_draws, rng, sc.threads);
      write_text(cal_f.out, canonical_dump(calibration_json(cal, sc.master_seed)));
    } else if (*grid) {
      RunConfig cfg = load_run_config(grid_f);
      if (lambda_max) cfg.grid.lambda_max = *lambda_max;
      if (theta_max) cfg.grid.theta_max = *theta_max;
      if (steps) cfg.grid.steps = *steps;
      if (cfg.grid.steps < 1) fail(ErrorKind::InvalidArgument, "--steps must be >= 1");
      const ScenarioConfig& sc = cfg.scenario;
      const CsvInputs in = load_csv_inputs(grid_data, grid_holdout, sc.target);
      BootstrapConfig boot = sc.boot;
      boot.master_seed = sc.master_seed;
      boot.threads = sc.threads;
      const StrategyBundle s = estimate_all(in.data.points, in.holdout, sc.cost, boot, sc.t_future, in.target);
      write_text(grid_f.out, format_grid_csv(grid_for(s, cfg.grid, sc.solver)));
    }
  } catch (const Error& e) {
    std::cerr << "ipd-decide: " << e.what() << '\n';
    return is_input_error(e.kind()) ? kExitInput : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "ipd-decide: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}

int cli_main(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"ipd-decide"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace ipd
