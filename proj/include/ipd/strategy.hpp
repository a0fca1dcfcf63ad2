#pragma once

#include "ipd/forecasting.hpp"
#include "ipd/ppi.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace ipd {

enum class Strategy { Retain, Refit, Recalibrate };

std::string_view to_string(Strategy s) noexcept;

/// Budget and unit prices; sample sizes are the whole number of samples a sum of money buys.
struct CostModel {
  double budget = 0.0;
  double model_cost = 0.0;
  double labeled_cost = 0.0;
  double unlabeled_cost = 0.0;

  void validate() const;
};

/// floor(money / unit_cost), tolerant to representation error in products like 0.15 * 200.
std::size_t affordable_samples(double money, double unit_cost);

struct CalibrationPoint {
  double t = 0.0;
  LabeledBatch lab;
  UnlabeledBatch unlab;
};

/// Where recalibration replicates draw their design rows from.
enum class DesignPool { Pooled, LatestPoint };

struct BootstrapConfig {
  std::size_t replicates = 100;
  std::uint64_t master_seed = 0;
  std::vector<double> zeta_grid = default_zeta_grid();
  DesignPool pool = DesignPool::Pooled;
  /// Uncertainty carried by the gamma / W / D draws of the recalibration bootstrap.
  ForecastBand recalibration_band = ForecastBand::Mean;
  /// Refit and recalibrate replicate b share one seed so their covariance can be estimated.
  bool pair_replicates = true;
  /// Worker threads (0 = hardware concurrency); never changes results.
  unsigned threads = 0;

  static std::vector<double> default_zeta_grid();
  void validate() const;
};

struct SamplePlan {
  double zeta = 0.0;
  std::size_t n_lab = 0;
  std::size_t n_unlab = 0;
};

struct StrategyEstimate {
  Strategy strategy = Strategy::Retain;
  double mean_mse = 0.0;
  double var_risk = 0.0;
  double var_ambiguity = 0.0;
  std::optional<SamplePlan> plan;
  /// Per-replicate MSE values behind the estimate (empty for Retain).
  std::vector<double> replicates;
  bool paired = false;
};

struct RetainResult {
  StrategyEstimate estimate;
  TimeSeries mse_series;
  TrendModel trend;
  PredictiveDistribution forecast;
};

struct RecalibrateResult {
  StrategyEstimate estimate;
  TimeSeries gamma_series;
  TimeSeries w_series;
  TimeSeries d_series;
  PredictiveDistribution gamma_forecast;
  PredictiveDistribution w_forecast;
  PredictiveDistribution d_forecast;
  std::vector<double> zeta_grid;
  /// Median replicate MSE for each zeta of the grid.
  std::vector<double> zeta_median_mse;
};

/// Forecast squared error of the target coefficient when the deployed model keeps being used.
RetainResult retain_analysis(const std::vector<CalibrationPoint>& calib, const CostModel& cost,
                             const BootstrapConfig& boot, double t_future, std::size_t target);
StrategyEstimate estimate_retain(const std::vector<CalibrationPoint>& calib, const CostModel& cost,
                                 const BootstrapConfig& boot, double t_future, std::size_t target);

/// Bootstrap variance of the target coefficient after paying for a refit.
StrategyEstimate estimate_refit(const LabeledBatch& holdout, const CostModel& cost, const BootstrapConfig& boot,
                                std::size_t target);

/// Forecast rectified-estimator MSE minimised over the labeled / unlabeled split.
RecalibrateResult recalibrate_analysis(const std::vector<CalibrationPoint>& calib, const CostModel& cost,
                                       const BootstrapConfig& boot, double t_future, std::size_t target);
StrategyEstimate estimate_recalibrate(const std::vector<CalibrationPoint>& calib, const CostModel& cost,
                                      const BootstrapConfig& boot, double t_future, std::size_t target);

/// All three estimates for one decision, plus the refit / recalibrate covariance.
struct StrategyBundle {
  RetainResult retain;
  StrategyEstimate refit;
  RecalibrateResult recalibrate;
  double covariance = 0.0;
};

StrategyBundle estimate_all(const std::vector<CalibrationPoint>& calib, const LabeledBatch& holdout,
                            const CostModel& cost, const BootstrapConfig& boot, double t_future, std::size_t target);

/// Sample covariance of paired refit / recalibrate replicates; 0 when they were not paired.
double replicate_covariance(const StrategyEstimate& refit, const StrategyEstimate& recalibrate);

double median(std::vector<double> values);
/// Unbiased sample variance; 0 for fewer than two values.
double sample_variance(const std::vector<double>& values);

}  // namespace ipd
