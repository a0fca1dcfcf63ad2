#include "ipd/cli.hpp"
#include "ipd/error.hpp"
#include "ipd/report.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace ipd;

namespace {

LabeledBatch labeled(const Matrix& X, const Vector& y, const Vector& yhat) {
  LabeledBatch b{DesignMatrix(X), y, yhat};
  b.validate();
  return b;
}

UnlabeledBatch unlabeled(const Matrix& X, const Vector& yhat) {
  UnlabeledBatch b{DesignMatrix(X), yhat};
  b.validate();
  return b;
}

TimeSeries series(const std::vector<double>& t, const std::vector<double>& v) {
  if (t.size() != v.size()) fail(ErrorKind::DimensionMismatch, "t and v differ in length");
  TimeSeries s;
  for (std::size_t i = 0; i < t.size(); ++i) s.points.push_back({t[i], v[i]});
  return s;
}

ForecastBand parse_band(const std::string& name) {
  if (name == "prediction") return ForecastBand::Prediction;
  if (name == "mean") return ForecastBand::Mean;
  fail(ErrorKind::InvalidArgument, "band must be 'prediction' or 'mean'");
}

py::object to_python(const Json& doc) {
  return py::module_::import("json").attr("loads")(canonical_dump(doc));
}

RunConfig config_with_overrides(const std::string& path, std::optional<std::uint64_t> seed,
                                std::optional<unsigned> threads) {
  RunConfig cfg = load_config(path);
  if (seed) cfg.scenario.master_seed = *seed;
  if (threads) cfg.scenario.threads = *threads;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Retain / refit / recalibrate decisions for predicted-outcome regressions";
  m.attr("__version__") = kVersion;

  // Leaked on purpose: the translator may run until interpreter shutdown.
  static PyObject* ipd_error = py::exception<Error>(m, "IpdError", PyExc_RuntimeError).release().ptr();
  static PyObject* input_error = py::exception<Error>(m, "InputError", ipd_error).release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(is_input_error(e.kind()) ? input_error : ipd_error, e.what());
    }
  });

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("beta", &FitResult::beta)
      .def_readonly("sigma2", &FitResult::sigma2)
      .def_readonly("cov", &FitResult::cov)
      .def_readonly("dof", &FitResult::dof);
  m.def("fit_linear", py::overload_cast<const Matrix&, const Vector&>(&fit_linear), py::arg("X"), py::arg("y"));

  py::class_<PpiFit>(m, "PpiFit")
      .def_readonly("beta_rec", &PpiFit::beta_rec)
      .def_readonly("beta_naive", &PpiFit::beta_naive)
      .def_readonly("rectifier", &PpiFit::rectifier)
      .def_readonly("gamma", &PpiFit::gamma)
      .def_readonly("w_scalar", &PpiFit::w_scalar)
      .def_readonly("d_scalar", &PpiFit::d_scalar)
      .def_readonly("var_risk", &PpiFit::var_risk)
      .def_readonly("var_ambiguity", &PpiFit::var_ambiguity);
  m.def(
      "ppi_fit",
      [](const Matrix& X_lab, const Vector& y, const Vector& yhat_lab, const Matrix& X_unlab, const Vector& yhat_unlab,
         std::size_t target, std::optional<double> gamma) {
        return ppi_fit(labeled(X_lab, y, yhat_lab), unlabeled(X_unlab, yhat_unlab), target, gamma);
      },
      py::arg("X_lab"), py::arg("y"), py::arg("yhat_lab"), py::arg("X_unlab"), py::arg("yhat_unlab"),
      py::arg("target"), py::arg("gamma") = py::none());
  m.def("select_gamma", py::overload_cast<double, double, double>(&select_gamma), py::arg("var_unlab"),
        py::arg("var_delta"), py::arg("delta"));

  py::class_<TrendModel>(m, "TrendModel")
      .def_readonly("intercept", &TrendModel::intercept)
      .def_readonly("slope", &TrendModel::slope)
      .def_readonly("resid_var", &TrendModel::resid_var)
      .def_readonly("n", &TrendModel::n);
  py::class_<PredictiveDistribution>(m, "PredictiveDistribution")
      .def_readonly("mean", &PredictiveDistribution::mean)
      .def_readonly("variance", &PredictiveDistribution::variance)
      .def_readonly("lower_clip", &PredictiveDistribution::lower_clip)
      .def_readonly("upper_clip", &PredictiveDistribution::upper_clip);
  m.def(
      "fit_trend", [](const std::vector<double>& t, const std::vector<double>& v) { return fit_trend(series(t, v)); },
      py::arg("t"), py::arg("v"));
  m.def(
      "forecast",
      [](const TrendModel& model, double t_future, const std::string& band) {
        return forecast(model, t_future, parse_band(band));
      },
      py::arg("model"), py::arg("t_future"), py::arg("band") = "prediction");

  py::enum_<Strategy>(m, "Strategy")
      .value("Retain", Strategy::Retain)
      .value("Refit", Strategy::Refit)
      .value("Recalibrate", Strategy::Recalibrate);

  py::class_<Preferences>(m, "Preferences")
      .def(py::init([](double lambda, double theta, double alpha) {
             Preferences p{lambda, theta, alpha};
             p.validate();
             return p;
           }),
           py::arg("lam"), py::arg("theta"), py::arg("alpha") = 0.05)
      .def_readwrite("lam", &Preferences::lambda)
      .def_readwrite("theta", &Preferences::theta)
      .def_readwrite("alpha", &Preferences::alpha);

  py::class_<StrategyEstimate>(m, "StrategyEstimate")
      .def(py::init([](Strategy s, double mean_mse, double var_risk, double var_ambiguity) {
             StrategyEstimate e;
             e.strategy = s;
             e.mean_mse = mean_mse;
             e.var_risk = var_risk;
             e.var_ambiguity = var_ambiguity;
             return e;
           }),
           py::arg("strategy"), py::arg("mean_mse"), py::arg("var_risk"), py::arg("var_ambiguity") = 0.0)
      .def_readonly("strategy", &StrategyEstimate::strategy)
      .def_readonly("mean_mse", &StrategyEstimate::mean_mse)
      .def_readonly("var_risk", &StrategyEstimate::var_risk)
      .def_readonly("var_ambiguity", &StrategyEstimate::var_ambiguity);
  m.def("utility", &utility, py::arg("estimate"), py::arg("prefs"));

  py::class_<DecisionSolution>(m, "DecisionSolution")
      .def_readonly("w_ref", &DecisionSolution::w_ref)
      .def_readonly("w_rec", &DecisionSolution::w_rec)
      .def_readonly("A", &DecisionSolution::A)
      .def_readonly("B", &DecisionSolution::B)
      .def_readonly("C", &DecisionSolution::C)
      .def_readonly("D", &DecisionSolution::D)
      .def_readonly("H", &DecisionSolution::H)
      .def_readonly("utility_ref", &DecisionSolution::utility_ref)
      .def_readonly("utility_rec", &DecisionSolution::utility_rec)
      .def_readonly("utility_ret", &DecisionSolution::utility_ret)
      .def_readonly("decision", &DecisionSolution::decision)
      .def_readonly("discrepancy", &DecisionSolution::discrepancy)
      .def_readonly("singular_fallback", &DecisionSolution::singular_fallback)
      .def_readonly("notes", &DecisionSolution::notes);
  m.def(
      "solve_weights",
      [](const StrategyEstimate& ref, const StrategyEstimate& rec, double mse_ret, double cov,
         const Preferences& prefs, const std::string& mode) {
        return solve_weights(ref, rec, mse_ret, cov, prefs, parse_solver_mode(mode));
      },
      py::arg("ref"), py::arg("rec"), py::arg("mse_ret"), py::arg("cov"), py::arg("prefs"),
      py::arg("mode") = "linear");
  m.def("decide", &decide, py::arg("solution"));

  m.def(
      "load_calibration_csv",
      [](const std::string& path) {
        const CalibrationData data = load_calibration_csv(path);
        py::list points;
        for (const auto& p : data.points) {
          py::dict d;
          d["t"] = p.t;
          d["X_lab"] = p.lab.X.values();
          d["y"] = p.lab.y;
          d["yhat_lab"] = p.lab.yhat;
          d["X_unlab"] = p.unlab.X.values();
          d["yhat_unlab"] = p.unlab.yhat;
          points.append(d);
        }
        return py::make_tuple(points, data.columns);
      },
      py::arg("path"), "Returns (points, design column names).");

  m.def(
      "simulate",
      [](const std::string& config, std::optional<std::uint64_t> seed, std::optional<unsigned> threads) {
        const RunConfig cfg = config_with_overrides(config, seed, threads);
        ScenarioReport report;
        {
          py::gil_scoped_release release;
          report = run_scenario(cfg.scenario);
        }
        return to_python(scenario_json(report));
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("threads") = py::none(),
      "Runs the configured simulation and returns the JSON report as a dict.");
  m.def(
      "decide_csv",
      [](const std::string& config, const std::string& data, const std::string& holdout,
         std::optional<std::uint64_t> seed, std::optional<unsigned> threads) {
        const RunConfig cfg = config_with_overrides(config, seed, threads);
        DecisionRun run;
        {
          py::gil_scoped_release release;
          run = decide_from_csv(cfg.scenario, load_csv_inputs(data, holdout, cfg.scenario.target));
        }
        return to_python(decision_json(run));
      },
      py::arg("config"), py::arg("data"), py::arg("holdout") = "", py::arg("seed") = py::none(),
      py::arg("threads") = py::none());

  m.def(
      "cli_main",
      [](const std::vector<std::string>& args) {
        py::gil_scoped_release release;
        return cli_main(args);
      },
      py::arg("args"), "Runs ipd-decide with the given arguments and returns its exit code.");
}
