#pragma once

#include "ipd/random.hpp"
#include "ipd/strategy.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ipd {

struct Preferences {
  double lambda = 0.0;  // risk aversion
  double theta = 0.0;   // ambiguity aversion
  double alpha = 0.05;  // Type-I level, only used when calibrating

  void validate() const;
};

/// U = -mean_mse - (lambda / 2) var_risk - (theta / 2) var_ambiguity
double utility(const StrategyEstimate& est, const Preferences& prefs);

enum class SolverMode {
  /// Stationarity conditions of the two-asset utility solved directly; weights are unconstrained.
  LinearSystem,
  /// The printed weight formulas evaluated as written.
  ClosedForm,
  /// Utility maximised over w_rec in [0, 1] with w_ref = 1 - w_rec.
  ConstrainedQuadratic,
};

std::string_view to_string(SolverMode m) noexcept;
SolverMode parse_solver_mode(const std::string& name);

struct WeightPair {
  double w_ref = 0.0;
  double w_rec = 0.0;
};

struct DecisionSolution {
  SolverMode mode = SolverMode::LinearSystem;
  double w_ref = 0.0;
  double w_rec = 0.0;
  // A = MSE_ret - E(MSE_rec), B = MSE_ret - E(MSE_ref),
  // C = lambda var_P(ref), D = lambda var_P(rec) + theta var_mu(rec), H = lambda cov.
  double A = 0.0, B = 0.0, C = 0.0, D = 0.0, H = 0.0;
  double utility_ref = 0.0;
  double utility_rec = 0.0;
  double utility_ret = 0.0;
  Strategy decision = Strategy::Retain;

  WeightPair constrained;
  /// Present whenever the printed formulas are non-singular.
  std::optional<WeightPair> closed_form;
  /// Printed formulas and the constrained solver disagree on which weight is larger.
  bool discrepancy = false;
  /// LinearSystem was singular and the constrained weights were used.
  bool singular_fallback = false;
  std::vector<std::string> notes;
};

/// Weights, intermediates and decision for one pair of estimates.
/// Throws SingularSystem in ClosedForm mode when C D - H^2 vanishes.
DecisionSolution solve_weights(const StrategyEstimate& ref, const StrategyEstimate& rec, double mse_ret,
                               double cov, const Preferences& prefs, SolverMode mode = SolverMode::LinearSystem);

/// Maximiser of the constrained two-asset objective; returns w_rec.
double constrained_weight(double e_ref, double e_rec, double var_ref, double var_rec, double cov,
                          double var_amb_rec, double lambda, double theta);

/// Sign / weight rule with a highest-utility fallback (ties: Retain, Recalibrate, Refit).
Strategy decide(const DecisionSolution& sol);

/// Two-option portfolio utility with return means m, risk variances v, ambiguity variances a.
struct PortfolioInputs {
  double mean1 = 0.0, mean2 = 0.0;
  double var1 = 0.0, var2 = 0.0, cov = 0.0;
  double amb1 = 0.0, amb2 = 0.0;
  double fixed_cost = 0.0;
};
double portfolio_utility(const PortfolioInputs& in, double w1, double lambda, double theta);

struct MlInputs {
  double e_ref = 0.0, e_rec = 0.0, mse_ret = 0.0;
  double var_ref = 0.0, var_rec = 0.0, cov = 0.0;
  double var_delta = 0.0;
};
double ml_utility(const MlInputs& in, double w_ref, double lambda, double theta);

/// Estimates from one data set generated under the no-drift hypothesis.
struct NullDraw {
  StrategyEstimate ref;
  StrategyEstimate rec;
  double mse_ret = 0.0;
};

class NullScenario {
 public:
  virtual ~NullScenario() = default;
  /// Fresh null data and estimates; must be a pure function of the seed.
  virtual NullDraw draw(std::uint64_t seed) const = 0;
};

struct PreferenceCalibration {
  Preferences prefs;
  double prob_lambda = 0.0;  // Pr[U(ref, lambda, 0) > U(ret)] at the returned lambda
  double prob_theta = 0.0;   // Pr[U(rec, lambda, theta) > U(ret)] at the returned theta
  bool non_monotone = false;
  std::size_t draws = 0;
};

inline constexpr double kSearchStart = 1e-6;
inline constexpr double kSearchLimit = 1e12;
inline constexpr double kSearchResolution = 1e-3;

/// Smallest lambda, then theta, keeping the Monte Carlo probability that a
/// strategy beats retaining at or below alpha. Throws NotAchievable.
PreferenceCalibration calibrate_preferences(const NullScenario& null_scenario, double alpha, std::size_t mc_draws,
                                            Rng& rng, unsigned threads = 0);

/// Same search on precomputed draws.
PreferenceCalibration calibrate_preferences(const std::vector<NullDraw>& draws, double alpha);

/// Null data built from observed data: every calibration time gets a
/// bootstrap resample of the earliest point's rows, so no drift is present.
class ResampledNullScenario : public NullScenario {
 public:
  ResampledNullScenario(std::vector<CalibrationPoint> calib, LabeledBatch holdout, CostModel cost,
                        BootstrapConfig boot, double t_future, std::size_t target);
  NullDraw draw(std::uint64_t seed) const override;

 private:
  std::vector<CalibrationPoint> calib_;
  LabeledBatch holdout_;
  CostModel cost_;
  BootstrapConfig boot_;
  double t_future_;
  std::size_t target_;
};

/// Everything a decision report carries.
struct DecisionRun {
  StrategyBundle strategies;
  Preferences prefs;
  bool calibrated = false;
  std::optional<PreferenceCalibration> calibration;
  DecisionSolution solution;
  std::uint64_t seed = 0;
};

}  // namespace ipd
