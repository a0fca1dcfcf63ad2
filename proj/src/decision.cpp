#include "ipd/decision.hpp"

#include "ipd/error.hpp"
#include "ipd/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace ipd {

namespace {

constexpr double kSingularRelTol = 1e-12;

bool singular(double C, double D, double H) {
  const double scale = std::max(std::abs(C * D), H * H);
  return !(scale > 0.0) || !(std::abs(C * D - H * H) > kSingularRelTol * scale);
}

int sign(double x) { return (x > 0.0) - (x < 0.0); }

struct SearchResult {
  double value = 0.0;
  double prob = 0.0;
};

// Smallest parameter with prob(parameter) <= alpha: doubling from kSearchStart,
// then bisection to kSearchResolution relative width. Every evaluation is
// recorded so monotonicity can be checked afterwards.
SearchResult search_parameter(const std::function<double(double)>& prob, double alpha, const char* name,
                              std::map<double, double>& path) {
  auto eval = [&](double x) {
    const double p = prob(x);
    path[x] = p;
    return p;
  };
  const double p0 = eval(0.0);
  if (p0 <= alpha) return {0.0, p0};

  double lo = 0.0, hi = kSearchStart;
  double p_hi = eval(hi);
  while (p_hi > alpha) {
    lo = hi;
    hi *= 2.0;
    if (hi > kSearchLimit) {
      std::ostringstream msg;
      msg << name << ": probability stays at " << p_hi << " > alpha = " << alpha << " up to "
          << kSearchLimit;
      fail(ErrorKind::NotAchievable, msg.str());
    }
    p_hi = eval(hi);
  }
  while (hi - lo > kSearchResolution * hi) {
    const double mid = 0.5 * (lo + hi);
    const double p = eval(mid);
    if (p <= alpha) {
      hi = mid;
      p_hi = p;
    } else {
      lo = mid;
    }
  }
  return {hi, p_hi};
}

bool nonincreasing(const std::map<double, double>& path) {
  double prev = 2.0;
  for (const auto& [x, p] : path) {
    if (p > prev) return false;
    prev = p;
  }
  return true;
}

}  // namespace

void Preferences::validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0) fail(ErrorKind::InvalidArgument, "lambda must be >= 0");
  if (!std::isfinite(theta) || theta < 0.0) fail(ErrorKind::InvalidArgument, "theta must be >= 0");
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
}

double utility(const StrategyEstimate& est, const Preferences& prefs) {
  return -est.mean_mse - 0.5 * prefs.lambda * est.var_risk - 0.5 * prefs.theta * est.var_ambiguity;
}

std::string_view to_string(SolverMode m) noexcept {
  switch (m) {
    case SolverMode::LinearSystem: return "LinearSystem";
    case SolverMode::ClosedForm: return "ClosedForm";
    case SolverMode::ConstrainedQuadratic: return "ConstrainedQuadratic";
  }
  return "?";
}

SolverMode parse_solver_mode(const std::string& name) {
  std::string s;
  for (char c : name)
    if (c != '_' && c != '-') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "linearsystem" || s == "linear") return SolverMode::LinearSystem;
  if (s == "closedform") return SolverMode::ClosedForm;
  if (s == "constrainedquadratic" || s == "constrained") return SolverMode::ConstrainedQuadratic;
  fail(ErrorKind::InvalidArgument, "unknown solver mode '" + name + "'");
}

double constrained_weight(double e_ref, double e_rec, double var_ref, double var_rec, double cov,
                          double var_amb_rec, double lambda, double theta) {
  // d/dw of the objective is N - Q w.
  const double N = (e_ref - e_rec) + lambda * (var_ref - cov);
  const double Q = lambda * (var_rec + var_ref - 2.0 * cov) + theta * var_amb_rec;
  if (Q > 0.0) return std::clamp(N / Q, 0.0, 1.0);
  if (Q == 0.0 && N == 0.0) return 0.5;
  auto objective = [&](double w) {
    const double v = 1.0 - w;
    return -(w * e_rec + v * e_ref) - 0.5 * lambda * (w * w * var_rec + v * v * var_ref + 2.0 * w * v * cov) -
           0.5 * theta * w * w * var_amb_rec;
  };
  return objective(1.0) > objective(0.0) ? 1.0 : 0.0;
}

DecisionSolution solve_weights(const StrategyEstimate& ref, const StrategyEstimate& rec, double mse_ret,
                               double cov, const Preferences& prefs, SolverMode mode) {
  for (double v : {ref.mean_mse, ref.var_risk, rec.mean_mse, rec.var_risk, rec.var_ambiguity, mse_ret, cov})
    if (!std::isfinite(v)) fail(ErrorKind::NonFiniteInput, "non-finite decision input");
  if (!std::isfinite(prefs.lambda) || !std::isfinite(prefs.theta) || prefs.lambda < 0.0 || prefs.theta < 0.0)
    fail(ErrorKind::InvalidArgument, "lambda and theta must be finite and >= 0");

  DecisionSolution sol;
  sol.mode = mode;
  sol.A = mse_ret - rec.mean_mse;
  sol.B = mse_ret - ref.mean_mse;
  sol.C = prefs.lambda * ref.var_risk;
  sol.D = prefs.lambda * rec.var_risk + prefs.theta * rec.var_ambiguity;
  sol.H = prefs.lambda * cov;
  sol.utility_ref = utility(ref, prefs);
  sol.utility_rec = utility(rec, prefs);
  sol.utility_ret = -mse_ret;

  const double w = constrained_weight(ref.mean_mse, rec.mean_mse, ref.var_risk, rec.var_risk, cov,
                                      rec.var_ambiguity, prefs.lambda, prefs.theta);
  sol.constrained = {1.0 - w, w};

  const double det = sol.C * sol.D - sol.H * sol.H;
  const bool is_singular = singular(sol.C, sol.D, sol.H);
  if (!is_singular) {
    sol.closed_form = WeightPair{(sol.C * sol.A - sol.H * sol.B) / det, (sol.B * sol.D - sol.H * sol.A) / det};
    sol.discrepancy = sign(sol.closed_form->w_ref - sol.closed_form->w_rec) !=
                      sign(sol.constrained.w_ref - sol.constrained.w_rec);
  }

  switch (mode) {
    case SolverMode::LinearSystem:
      if (is_singular) {
        sol.singular_fallback = true;
        sol.w_ref = sol.constrained.w_ref;
        sol.w_rec = sol.constrained.w_rec;
        sol.notes.push_back("weight system is singular; constrained weights used");
      } else {
        sol.w_ref = (sol.D * sol.B - sol.H * sol.A) / det;
        sol.w_rec = (sol.C * sol.A - sol.H * sol.B) / det;
      }
      break;
    case SolverMode::ClosedForm:
      if (is_singular) fail(ErrorKind::SingularSystem, "C D - H^2 vanishes; closed-form weights undefined");
      sol.w_ref = sol.closed_form->w_ref;
      sol.w_rec = sol.closed_form->w_rec;
      sol.notes.push_back("ambiguity term of D uses the recalibrate estimate");
      if (sol.discrepancy) sol.notes.push_back("closed-form and constrained weights disagree; decision uses constrained");
      break;
    case SolverMode::ConstrainedQuadratic:
      sol.w_ref = sol.constrained.w_ref;
      sol.w_rec = sol.constrained.w_rec;
      break;
  }
  sol.decision = decide(sol);
  return sol;
}

Strategy decide(const DecisionSolution& sol) {
  const bool use_constrained = sol.mode == SolverMode::ClosedForm && sol.discrepancy;
  const double w_ref = use_constrained ? sol.constrained.w_ref : sol.w_ref;
  const double w_rec = use_constrained ? sol.constrained.w_rec : sol.w_rec;

  if (w_ref > w_rec && sol.A > 0.0) return Strategy::Refit;
  if (w_ref < w_rec && sol.B > 0.0) return Strategy::Recalibrate;
  if (sol.A < 0.0 && sol.B < 0.0) return Strategy::Retain;

  Strategy best = Strategy::Retain;
  double best_u = sol.utility_ret;
  if (sol.utility_rec > best_u) {
    best = Strategy::Recalibrate;
    best_u = sol.utility_rec;
  }
  if (sol.utility_ref > best_u) best = Strategy::Refit;
  return best;
}

double portfolio_utility(const PortfolioInputs& in, double w1, double lambda, double theta) {
  const double w2 = 1.0 - w1;
  const double ret = w1 * in.mean1 + w2 * in.mean2 - in.fixed_cost;
  const double risk = w1 * w1 * in.var1 + w2 * w2 * in.var2 + 2.0 * w1 * w2 * in.cov;
  const double ambiguity = w1 * w1 * in.amb1 + w2 * w2 * in.amb2;
  return -ret - 0.5 * lambda * risk - 0.5 * theta * ambiguity;
}

double ml_utility(const MlInputs& in, double w_ref, double lambda, double theta) {
  const double w_rec = 1.0 - w_ref;
  const double mse = w_ref * in.e_ref + w_rec * in.e_rec - in.mse_ret;
  const double sampling = w_ref * w_ref * in.var_ref + w_rec * w_rec * in.var_rec + 2.0 * w_ref * w_rec * in.cov;
  const double model = w_rec * w_rec * in.var_delta;
  return -mse - 0.5 * lambda * sampling - 0.5 * theta * model;
}

PreferenceCalibration calibrate_preferences(const std::vector<NullDraw>& draws, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
  if (draws.empty()) fail(ErrorKind::InvalidArgument, "no null draws");
  const double n = static_cast<double>(draws.size());

  auto prob_ref = [&](double lambda) {
    std::size_t hits = 0;
    for (const auto& d : draws)
      if (-d.ref.mean_mse - 0.5 * lambda * d.ref.var_risk > -d.mse_ret) ++hits;
    return static_cast<double>(hits) / n;
  };
  std::map<double, double> lambda_path, theta_path;
  const SearchResult lam = search_parameter(prob_ref, alpha, "lambda", lambda_path);

  auto prob_rec = [&](double theta) {
    std::size_t hits = 0;
    for (const auto& d : draws)
      if (-d.rec.mean_mse - 0.5 * lam.value * d.rec.var_risk - 0.5 * theta * d.rec.var_ambiguity > -d.mse_ret)
        ++hits;
    return static_cast<double>(hits) / n;
  };
  const SearchResult th = search_parameter(prob_rec, alpha, "theta", theta_path);

  PreferenceCalibration out;
  out.prefs = {lam.value, th.value, alpha};
  out.prob_lambda = lam.prob;
  out.prob_theta = th.prob;
  out.non_monotone = !nonincreasing(lambda_path) || !nonincreasing(theta_path);
  out.draws = draws.size();
  return out;
}

PreferenceCalibration calibrate_preferences(const NullScenario& null_scenario, double alpha, std::size_t mc_draws,
                                            Rng& rng, unsigned threads) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
  if (mc_draws < 100) fail(ErrorKind::InvalidArgument, "calibration needs at least 100 Monte Carlo draws");
  const std::uint64_t master = rng();
  std::vector<NullDraw> draws(mc_draws);
  parallel_for(mc_draws, threads, [&](std::size_t i) {
    draws[i] = null_scenario.draw(derive_seed(master, StreamTag::PreferenceDraws, {i}));
  });
  return calibrate_preferences(draws, alpha);
}

namespace {

LabeledBatch resample(const LabeledBatch& b, Rng& rng) {
  const auto idx = resample_indices(b.X.rows(), b.X.rows(), rng);
  return {b.X.select_rows(idx), gather(b.y, idx), gather(b.yhat, idx)};
}

UnlabeledBatch resample(const UnlabeledBatch& b, Rng& rng) {
  const auto idx = resample_indices(b.X.rows(), b.X.rows(), rng);
  return {b.X.select_rows(idx), gather(b.yhat, idx)};
}

}  // namespace

ResampledNullScenario::ResampledNullScenario(std::vector<CalibrationPoint> calib, LabeledBatch holdout,
                                             CostModel cost, BootstrapConfig boot, double t_future,
                                             std::size_t target)
    : calib_(std::move(calib)),
      holdout_(std::move(holdout)),
      cost_(cost),
      boot_(std::move(boot)),
      t_future_(t_future),
      target_(target) {
  if (calib_.empty()) fail(ErrorKind::TooFewCalibrationPoints, "null scenario needs calibration data");
}

NullDraw ResampledNullScenario::draw(std::uint64_t seed) const {
  const CalibrationPoint& base = calib_.front();
  std::vector<CalibrationPoint> points;
  points.reserve(calib_.size());
  for (std::size_t i = 0; i < calib_.size(); ++i) {
    Rng rng(derive_seed(seed, StreamTag::NullScenario, {i}));
    CalibrationPoint p;
    p.t = calib_[i].t;
    p.lab = resample(base.lab, rng);
    p.unlab = resample(base.unlab, rng);
    points.push_back(std::move(p));
  }
  Rng rng(derive_seed(seed, StreamTag::Holdout));
  const LabeledBatch holdout = resample(holdout_, rng);

  BootstrapConfig boot = boot_;
  boot.master_seed = seed;
  boot.threads = 1;
  const StrategyBundle s = estimate_all(points, holdout, cost_, boot, t_future_, target_);
  return {s.refit, s.recalibrate.estimate, s.retain.estimate.mean_mse};
}

}  // namespace ipd
