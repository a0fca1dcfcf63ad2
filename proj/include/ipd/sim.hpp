#pragma once

#include "ipd/decision.hpp"
#include "ipd/forest.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ipd {

/// Y(t) = X1 exp(drift_rate t) + step_height 1{X2 >= 0} + eps, eps ~ N(0, noise_var).
struct DriftDgp {
  double drift_rate = 0.25;
  double step_height = 10.0;
  double noise_var = 0.05;

  double noise_sd() const;
  void validate() const;
};

/// Design columns of generated data: intercept, x1, x2.
std::vector<std::string> sim_column_names();

/// X1, X2 iid standard normal; yhat is left at zero.
LabeledBatch generate(const DriftDgp& dgp, double t, std::size_t n, Rng& rng);

enum class PredictorKind { BuiltInForest, ExternalPredictions };

/// Deterministic map from a design (intercept column ignored) to predictions.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Vector predict(const DesignMatrix& X) const = 0;
  virtual PredictorKind kind() const noexcept = 0;
};

struct ForestTraining {
  std::vector<ForestParams> grid = default_forest_grid();
  std::size_t folds = 5;
};

class ForestPredictor : public Predictor {
 public:
  ForestPredictor(RegressionForest forest, CrossValidationResult cv, std::optional<double> constant = std::nullopt);
  Vector predict(const DesignMatrix& X) const override;
  PredictorKind kind() const noexcept override { return PredictorKind::BuiltInForest; }
  const CrossValidationResult& cross_validation() const noexcept { return cv_; }

 private:
  RegressionForest forest_;
  CrossValidationResult cv_;
  std::optional<double> constant_;
};

/// Feature block of a design: every column except one named "intercept".
Matrix feature_block(const DesignMatrix& X);

/// Cross-validates the forest grid and refits the winner on all rows. A
/// constant outcome yields a constant predictor. Throws DegenerateTraining
/// for fewer than 100 rows.
std::shared_ptr<const ForestPredictor> train_predictor(const LabeledBatch& train, const ForestTraining& spec,
                                                       std::uint64_t seed, unsigned threads = 0);

struct PreferenceSettings {
  double lambda = 0.0;
  double theta = 0.0;
  double alpha = 0.05;
  bool calibrate = true;
  std::size_t mc_draws = 500;
};

struct ScenarioConfig {
  DriftDgp dgp;
  std::size_t n_train = 10000;
  std::size_t n_holdout = 2000;
  std::vector<double> calib_times = evenly_spaced(0.0, 3.0, 50);
  std::size_t n_lab_per_point = 200;
  std::size_t n_unlab_per_point = 200;
  double t_future = 3.5;
  CostModel cost{200.0, 10.0, 2.0, 1.0};
  BootstrapConfig boot;
  std::string target = "x1";
  std::uint64_t master_seed = 0;
  PreferenceSettings preferences;
  SolverMode solver = SolverMode::LinearSystem;
  ForestTraining forest;
  unsigned threads = 0;

  static std::vector<double> evenly_spaced(double lo, double hi, std::size_t count);
  void validate() const;
};

struct ScenarioReport {
  DecisionRun run;
  CrossValidationResult forest_cv;
  double train_r2 = 0.0;  // forest R^2 on the t = 0 holdout
};

/// Generated data of one scenario instance.
struct ScenarioData {
  LabeledBatch holdout;
  std::vector<CalibrationPoint> calib;
};

/// Holdout at t = 0 and the calibration points, every yhat filled by the predictor.
ScenarioData generate_scenario_data(const ScenarioConfig& cfg, const Predictor& predictor, std::uint64_t seed);

/// The scenario's own data under drift_rate = 0, frozen predictor unchanged.
class SimNullScenario : public NullScenario {
 public:
  SimNullScenario(ScenarioConfig cfg, std::shared_ptr<const Predictor> predictor);
  NullDraw draw(std::uint64_t seed) const override;

 private:
  ScenarioConfig cfg_;
  std::shared_ptr<const Predictor> predictor_;
};

/// Trains the predictor, generates data, estimates strategies, calibrates preferences and decides.
ScenarioReport run_scenario(const ScenarioConfig& cfg);

/// Same, with an already trained predictor.
ScenarioReport run_scenario(const ScenarioConfig& cfg, std::shared_ptr<const Predictor> predictor);

struct GridCell {
  double lambda = 0.0;
  double theta = 0.0;
  DecisionSolution solution;
};

/// {max} for one step, otherwise `steps` evenly spaced values from 0 to max.
std::vector<double> aversion_grid(double max, std::size_t steps);

/// Row-major over lambda, then theta.
std::vector<GridCell> decision_grid(const StrategyBundle& strategies, const std::vector<double>& lambda_grid,
                                    const std::vector<double>& theta_grid, SolverMode mode = SolverMode::LinearSystem);

}  // namespace ipd
