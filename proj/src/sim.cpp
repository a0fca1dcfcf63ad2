#include "ipd/sim.hpp"

#include "ipd/error.hpp"

#include <algorithm>
#include <cmath>

namespace ipd {

double DriftDgp::noise_sd() const { return std::sqrt(noise_var); }

void DriftDgp::validate() const {
  if (!std::isfinite(drift_rate) || !std::isfinite(step_height)) fail(ErrorKind::InvalidArgument, "non-finite DGP");
  if (!std::isfinite(noise_var) || noise_var < 0.0) fail(ErrorKind::InvalidArgument, "noise variance must be >= 0");
}

std::vector<std::string> sim_column_names() { return {"intercept", "x1", "x2"}; }

LabeledBatch generate(const DriftDgp& dgp, double t, std::size_t n, Rng& rng) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "generate needs n >= 1");
  dgp.validate();
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::exp(dgp.drift_rate * t);
  const double sd = dgp.noise_sd();
  const auto rows = static_cast<Eigen::Index>(n);
  Matrix X(rows, 3);
  Vector y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double x1 = normal(rng);
    const double x2 = normal(rng);
    const double eps = normal(rng);
    X(i, 0) = 1.0;
    X(i, 1) = x1;
    X(i, 2) = x2;
    y(i) = x1 * scale + (x2 >= 0.0 ? dgp.step_height : 0.0) + sd * eps;
  }
  return {DesignMatrix(std::move(X), sim_column_names()), std::move(y), Vector::Zero(rows)};
}

Matrix feature_block(const DesignMatrix& X) {
  std::vector<Eigen::Index> keep;
  for (std::size_t j = 0; j < X.cols(); ++j)
    if (X.column_names()[j] != "intercept") keep.push_back(static_cast<Eigen::Index>(j));
  Matrix out(X.values().rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = X.values().col(keep[k]);
  return out;
}

ForestPredictor::ForestPredictor(RegressionForest forest, CrossValidationResult cv, std::optional<double> constant)
    : forest_(std::move(forest)), cv_(std::move(cv)), constant_(constant) {}

Vector ForestPredictor::predict(const DesignMatrix& X) const {
  if (constant_) return Vector::Constant(static_cast<Eigen::Index>(X.rows()), *constant_);
  return forest_.predict(feature_block(X));
}

std::shared_ptr<const ForestPredictor> train_predictor(const LabeledBatch& train, const ForestTraining& spec,
                                                       std::uint64_t seed, unsigned threads) {
  if (train.X.rows() < 100) fail(ErrorKind::DegenerateTraining, "predictor training needs at least 100 rows");
  if (train.y.size() != static_cast<Eigen::Index>(train.X.rows()))
    fail(ErrorKind::DimensionMismatch, "training outcomes do not match design rows");
  if (!train.y.allFinite()) fail(ErrorKind::DegenerateTraining, "training outcomes are not finite");
  if (train.y.maxCoeff() == train.y.minCoeff())
    return std::make_shared<ForestPredictor>(RegressionForest{}, CrossValidationResult{}, train.y(0));

  const Matrix features = feature_block(train.X);
  if (features.cols() == 0) fail(ErrorKind::DegenerateTraining, "training design has no feature columns");
  CrossValidationResult cv = cross_validate_forest(features, train.y, spec.grid, spec.folds, seed, threads);
  RegressionForest forest(features, train.y, cv.best, derive_seed(seed, StreamTag::Forest), threads);
  return std::make_shared<ForestPredictor>(std::move(forest), std::move(cv));
}

std::vector<double> ScenarioConfig::evenly_spaced(double lo, double hi, std::size_t count) {
  std::vector<double> out;
  if (count == 1) return {lo};
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  return out;
}

void ScenarioConfig::validate() const {
  dgp.validate();
  cost.validate();
  boot.validate();
  if (n_train < 1 || n_holdout < 1 || n_lab_per_point < 1 || n_unlab_per_point < 1)
    fail(ErrorKind::InvalidArgument, "scenario sample counts must be positive");
  if (calib_times.empty()) fail(ErrorKind::TooFewCalibrationPoints, "no calibration times");
  for (double t : calib_times)
    if (!(t >= 0.0 && t < t_future)) fail(ErrorKind::InvalidArgument, "calibration times must lie in [0, t_future)");
  if (preferences.calibrate) {
    if (!(preferences.alpha > 0.0 && preferences.alpha < 1.0))
      fail(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
  } else {
    Preferences{preferences.lambda, preferences.theta, preferences.alpha}.validate();
  }
}

ScenarioData generate_scenario_data(const ScenarioConfig& cfg, const Predictor& predictor, std::uint64_t seed) {
  ScenarioData data;
  Rng hold_rng(derive_seed(seed, StreamTag::Holdout));
  data.holdout = generate(cfg.dgp, 0.0, cfg.n_holdout, hold_rng);
  data.holdout.yhat = predictor.predict(data.holdout.X);
  data.calib.reserve(cfg.calib_times.size());
  for (std::size_t i = 0; i < cfg.calib_times.size(); ++i) {
    const double t = cfg.calib_times[i];
    Rng rng(derive_seed(seed, StreamTag::Calibration, {i}));
    CalibrationPoint p;
    p.t = t;
    p.lab = generate(cfg.dgp, t, cfg.n_lab_per_point, rng);
    p.lab.yhat = predictor.predict(p.lab.X);
    LabeledBatch u = generate(cfg.dgp, t, cfg.n_unlab_per_point, rng);
    p.unlab.yhat = predictor.predict(u.X);
    p.unlab.X = std::move(u.X);
    data.calib.push_back(std::move(p));
  }
  return data;
}

SimNullScenario::SimNullScenario(ScenarioConfig cfg, std::shared_ptr<const Predictor> predictor)
    : cfg_(std::move(cfg)), predictor_(std::move(predictor)) {
  cfg_.dgp.drift_rate = 0.0;
}

NullDraw SimNullScenario::draw(std::uint64_t seed) const {
  const ScenarioData data = generate_scenario_data(cfg_, *predictor_, seed);
  BootstrapConfig boot = cfg_.boot;
  boot.master_seed = seed;
  boot.threads = 1;
  const std::size_t target = data.holdout.X.column_index(cfg_.target);
  const StrategyBundle s = estimate_all(data.calib, data.holdout, cfg_.cost, boot, cfg_.t_future, target);
  return {s.refit, s.recalibrate.estimate, s.retain.estimate.mean_mse};
}

ScenarioReport run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.master_seed, StreamTag::Training));
  const LabeledBatch train = generate(cfg.dgp, 0.0, cfg.n_train, rng);
  return run_scenario(cfg, train_predictor(train, cfg.forest, derive_seed(cfg.master_seed, StreamTag::Forest),
                                           cfg.threads));
}

ScenarioReport run_scenario(const ScenarioConfig& cfg, std::shared_ptr<const Predictor> predictor) {
  cfg.validate();
  const auto names = sim_column_names();
  if (std::find(names.begin(), names.end(), cfg.target) == names.end())
    fail(ErrorKind::InvalidArgument, "unknown target column '" + cfg.target + "' for simulated data");
  ScenarioReport report;
  if (const auto* forest = dynamic_cast<const ForestPredictor*>(predictor.get()))
    report.forest_cv = forest->cross_validation();

  const ScenarioData data = generate_scenario_data(cfg, *predictor, cfg.master_seed);
  const Vector& y = data.holdout.y;
  const double sst = (y.array() - y.mean()).square().sum();
  report.train_r2 = sst > 0.0 ? 1.0 - (data.holdout.yhat - y).squaredNorm() / sst : 0.0;

  BootstrapConfig boot = cfg.boot;
  boot.master_seed = cfg.master_seed;
  boot.threads = cfg.threads;
  const std::size_t target = data.holdout.X.column_index(cfg.target);

  DecisionRun& run = report.run;
  run.seed = cfg.master_seed;
  run.strategies = estimate_all(data.calib, data.holdout, cfg.cost, boot, cfg.t_future, target);
  if (cfg.preferences.calibrate) {
    const SimNullScenario null_scenario(cfg, predictor);
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
  return report;
}

std::vector<double> aversion_grid(double max, std::size_t steps) {
  if (steps < 1) fail(ErrorKind::InvalidArgument, "grid needs at least one step");
  if (!std::isfinite(max) || max < 0.0) fail(ErrorKind::InvalidArgument, "grid maximum must be >= 0");
  if (steps == 1) return {max};
  return ScenarioConfig::evenly_spaced(0.0, max, steps);
}

std::vector<GridCell> decision_grid(const StrategyBundle& strategies, const std::vector<double>& lambda_grid,
                                    const std::vector<double>& theta_grid, SolverMode mode) {
  if (lambda_grid.empty() || theta_grid.empty()) fail(ErrorKind::InvalidArgument, "empty aversion grid");
  std::vector<GridCell> cells;
  cells.reserve(lambda_grid.size() * theta_grid.size());
  for (double lambda : lambda_grid)
    for (double theta : theta_grid) {
      const Preferences prefs{lambda, theta, 0.05};
      cells.push_back({lambda, theta,
                       solve_weights(strategies.refit, strategies.recalibrate.estimate,
                                     strategies.retain.estimate.mean_mse, strategies.covariance, prefs, mode)});
    }
  return cells;
}

}  // namespace ipd
