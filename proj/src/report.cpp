#include "ipd/report.hpp"

#include "ipd/error.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace ipd {

namespace {

Json series_json(const TimeSeries& s) {
  Json out = Json::array();
  for (const auto& p : s.points) out.push_back({{"t", p.t}, {"v", p.v}});
  return out;
}

Json forecast_json(const PredictiveDistribution& d) {
  Json out = {{"mean", d.mean}, {"variance", d.variance}};
  out["lower_clip"] = d.lower_clip ? Json(*d.lower_clip) : Json(nullptr);
  out["upper_clip"] = d.upper_clip ? Json(*d.upper_clip) : Json(nullptr);
  return out;
}

Json weights_json(const WeightPair& w) { return {{"w_ref", w.w_ref}, {"w_rec", w.w_rec}}; }

double round12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

}  // namespace

Json estimate_json(const StrategyEstimate& est) {
  Json out = {{"strategy", std::string(to_string(est.strategy))},
              {"mean_mse", est.mean_mse},
              {"var_risk", est.var_risk},
              {"var_ambiguity", est.var_ambiguity}};
  if (est.plan)
    out["plan"] = {{"zeta", est.plan->zeta}, {"n_lab", est.plan->n_lab}, {"n_unlab", est.plan->n_unlab}};
  else
    out["plan"] = nullptr;
  return out;
}

Json solution_json(const DecisionSolution& sol) {
  Json out = {{"mode", std::string(to_string(sol.mode))},
              {"constrained", weights_json(sol.constrained)},
              {"discrepancy", sol.discrepancy},
              {"singular_fallback", sol.singular_fallback},
              {"notes", sol.notes}};
  out["closed_form"] = sol.closed_form ? weights_json(*sol.closed_form) : Json(nullptr);
  return out;
}

Json decision_json(const DecisionRun& run) {
  const auto& s = run.strategies;
  const auto& sol = run.solution;
  const auto& rec = s.recalibrate;

  Json doc;
  doc["version"] = kVersion;
  doc["seed"] = run.seed;
  doc["strategies"] = Json::array({estimate_json(s.retain.estimate), estimate_json(s.refit), estimate_json(rec.estimate)});
  doc["decision"] = std::string(to_string(sol.decision));
  doc["weights"] = {{"w_ref", sol.w_ref}, {"w_rec", sol.w_rec}};
  doc["intermediates"] = {{"A", sol.A}, {"B", sol.B}, {"C", sol.C}, {"D", sol.D}, {"H", sol.H}};
  doc["utilities"] = {{"retain", sol.utility_ret}, {"refit", sol.utility_ref}, {"recalibrate", sol.utility_rec}};
  doc["covariance"] = s.covariance;
  doc["solver"] = solution_json(sol);

  Json prefs = {{"lambda", run.prefs.lambda},
                {"theta", run.prefs.theta},
                {"alpha", run.prefs.alpha},
                {"calibrated", run.calibrated}};
  if (run.calibration) {
    prefs["prob_lambda"] = run.calibration->prob_lambda;
    prefs["prob_theta"] = run.calibration->prob_theta;
    prefs["non_monotone"] = run.calibration->non_monotone;
    prefs["mc_draws"] = run.calibration->draws;
  }
  doc["preferences"] = prefs;

  doc["diagnostics"] = {
      {"gamma_series", series_json(rec.gamma_series)},
      {"w_series", series_json(rec.w_series)},
      {"d_series", series_json(rec.d_series)},
      {"retain_mse_series", series_json(s.retain.mse_series)},
      {"zeta_grid", rec.zeta_grid},
      {"zeta_median_mse", rec.zeta_median_mse},
      {"forecasts",
       {{"retain_mse", forecast_json(s.retain.forecast)},
        {"gamma", forecast_json(rec.gamma_forecast)},
        {"w", forecast_json(rec.w_forecast)},
        {"d", forecast_json(rec.d_forecast)}}},
  };
  return doc;
}

Json scenario_json(const ScenarioReport& report) {
  Json doc = decision_json(report.run);
  Json cv = Json::array();
  for (std::size_t i = 0; i < report.forest_cv.grid.size(); ++i) {
    const auto& g = report.forest_cv.grid[i];
    cv.push_back({{"trees", g.trees}, {"max_depth", g.max_depth}, {"min_leaf", g.min_leaf},
                  {"cv_mse", report.forest_cv.cv_mse[i]}});
  }
  const auto& best = report.forest_cv.best;
  doc["simulation"] = {
      {"holdout_r2", report.train_r2},
      {"forest", {{"trees", best.trees}, {"max_depth", best.max_depth}, {"min_leaf", best.min_leaf}}},
      {"cross_validation", cv},
  };
  return doc;
}

Json calibration_json(const PreferenceCalibration& cal, std::uint64_t seed) {
  return {{"version", kVersion},
          {"seed", seed},
          {"preferences", {{"lambda", cal.prefs.lambda}, {"theta", cal.prefs.theta}, {"alpha", cal.prefs.alpha}}},
          {"prob_lambda", cal.prob_lambda},
          {"prob_theta", cal.prob_theta},
          {"non_monotone", cal.non_monotone},
          {"mc_draws", cal.draws}};
}

Json canonicalize(const Json& doc) {
  switch (doc.type()) {
    case Json::value_t::object: {
      Json out = Json::object();
      for (auto it = doc.begin(); it != doc.end(); ++it) out[it.key()] = canonicalize(it.value());
      return out;
    }
    case Json::value_t::array: {
      Json out = Json::array();
      for (const auto& v : doc) out.push_back(canonicalize(v));
      return out;
    }
    case Json::value_t::number_float: {
      const double v = doc.get<double>();
      if (!std::isfinite(v)) return nullptr;
      return round12(v);
    }
    default:
      return doc;
  }
}

std::string canonical_dump(const Json& doc) { return canonicalize(doc).dump(2) + "\n"; }

DecisionSolution solution_from_json(const Json& doc) {
  try {
    DecisionSolution sol;
    sol.mode = parse_solver_mode(doc.at("solver").at("mode").get<std::string>());
    sol.w_ref = doc.at("weights").at("w_ref").get<double>();
    sol.w_rec = doc.at("weights").at("w_rec").get<double>();
    const auto& m = doc.at("intermediates");
    sol.A = m.at("A").get<double>();
    sol.B = m.at("B").get<double>();
    sol.C = m.at("C").get<double>();
    sol.D = m.at("D").get<double>();
    sol.H = m.at("H").get<double>();
    const auto& u = doc.at("utilities");
    sol.utility_ret = u.at("retain").get<double>();
    sol.utility_ref = u.at("refit").get<double>();
    sol.utility_rec = u.at("recalibrate").get<double>();
    sol.constrained.w_ref = doc.at("solver").at("constrained").at("w_ref").get<double>();
    sol.constrained.w_rec = doc.at("solver").at("constrained").at("w_rec").get<double>();
    sol.discrepancy = doc.at("solver").at("discrepancy").get<bool>();
    return sol;
  } catch (const Json::exception& e) {
    fail(ErrorKind::SchemaError, std::string("report is missing decision fields: ") + e.what());
  }
}

}  // namespace ipd
