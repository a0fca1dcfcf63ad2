#include "helpers.hpp"

#include "ipd/error.hpp"
#include "ipd/strategy.hpp"

#include <doctest.h>

#include <cmath>

using namespace ipd;

namespace {

const CostModel kCost{200.0, 10.0, 2.0, 1.0};

BootstrapConfig boot(std::size_t B, std::uint64_t seed = 1, unsigned threads = 1) {
  BootstrapConfig b;
  b.replicates = B;
  b.master_seed = seed;
  b.threads = threads;
  return b;
}

std::vector<CalibrationPoint> series(const test::LinearWorld& w, std::size_t points, std::size_t n,
                                     std::uint64_t seed) {
  std::vector<CalibrationPoint> out;
  for (std::size_t i = 0; i < points; ++i) out.push_back(w.point(0.3 * static_cast<double>(i), n, n, seed * 1000 + i));
  return out;
}

LabeledBatch holdout(const test::LinearWorld& w, std::size_t n, std::uint64_t seed) {
  return w.point(0.0, n, 3, seed).lab;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::IoError;
}

}  // namespace

TEST_CASE("sample sizes are floored") {
  CHECK(affordable_samples(190.0, 1.0) == 190);
  CHECK(affordable_samples(0.15 * 200.0, 2.0) == 15);
  CHECK(affordable_samples(0.7 * 10.0, 1.0) == 7);
  CHECK(affordable_samples(9.99, 2.0) == 4);
  CHECK(affordable_samples(0.0, 1.0) == 0);
}

TEST_CASE("refit on a noiseless holdout has zero risk") {
  test::LinearWorld w{Vector::Ones(3), 0.0};
  const auto est = estimate_refit(holdout(w, 500, 1), kCost, boot(20), 1);
  CHECK(est.mean_mse < 1e-25);
  CHECK(est.var_risk < 1e-50);
  CHECK(est.strategy == Strategy::Refit);
}

TEST_CASE("refit with one replicate") {
  test::LinearWorld w{Vector::Ones(2), 0.5};
  const auto est = estimate_refit(holdout(w, 300, 2), kCost, boot(1), 1);
  REQUIRE(est.replicates.size() == 1);
  CHECK(est.var_risk == 0.0);
  CHECK(est.mean_mse == est.replicates[0]);
}

TEST_CASE("refit variance tracks sigma^2 / n at the affordable size") {
  // 190 rows after paying the model cost; x1 is standard normal.
  test::LinearWorld w{Vector::Ones(2), 0.3};
  const auto est = estimate_refit(holdout(w, 4000, 3), kCost, boot(200), 1);
  const double expected = 0.09 / 190.0;
  CHECK(std::abs(est.mean_mse / expected - 1.0) < 0.15);
  CHECK(est.var_risk > 0.0);
}

TEST_CASE("retain reports zero risk and ambiguity") {
  test::LinearWorld w{Vector::Ones(2), 0.3, 0.0, 0.3};
  const auto r = retain_analysis(series(w, 6, 100, 4), kCost, boot(20), 2.5, 1);
  CHECK(r.estimate.var_risk == 0.0);
  CHECK(r.estimate.var_ambiguity == 0.0);
  CHECK(r.mse_series.points.size() == 6);
  CHECK(r.estimate.mean_mse >= 0.0);
}

TEST_CASE("retain is blind to a constant offset absorbed by the intercept") {
  test::LinearWorld offset{Vector::Ones(2), 0.3, 2.5, 0.0};
  test::LinearWorld tilted{Vector::Ones(2), 0.3, 2.5, 0.4};
  const auto a = retain_analysis(series(offset, 5, 200, 5), kCost, boot(30), 2.0, 1);
  const auto b = retain_analysis(series(tilted, 5, 200, 5), kCost, boot(30), 2.0, 1);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(a.mse_series.points[i].v < 0.01);
    CHECK(b.mse_series.points[i].v > 0.08);
  }
}

TEST_CASE("retain trend is flat without drift") {
  int flat = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    test::LinearWorld w{Vector::Ones(2), 0.3};
    const auto r = retain_analysis(series(w, 10, 100, 100 + seed), kCost, boot(20, seed), 3.5, 1);
    const double se = std::sqrt(r.trend.resid_var / r.trend.t_ss);
    if (std::abs(r.trend.slope) <= 2.0 * se) ++flat;
  }
  CHECK(flat >= 43);
}

TEST_CASE("retain stays competitive when nothing drifts") {
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    test::LinearWorld w{Vector::Ones(2), 0.3};
    const auto calib = series(w, 10, 100, 300 + seed);
    const auto s = estimate_all(calib, holdout(w, 1000, 400 + seed), kCost, boot(30, seed), 3.5, 1);
    const double ret = s.retain.estimate.mean_mse, sd = std::sqrt(s.retain.forecast.variance);
    auto beats = [&](const StrategyEstimate& e) {
      return ret <= e.mean_mse + 3.0 * std::sqrt(sd * sd + e.var_risk + e.var_ambiguity);
    };
    if (beats(s.refit) && beats(s.recalibrate.estimate)) ++ok;
  }
  CHECK(ok >= 45);
}

TEST_CASE("recalibrate with a perfect predictor has no ambiguity") {
  test::LinearWorld w{Vector::Ones(2), 0.3};
  const auto r = recalibrate_analysis(series(w, 5, 100, 6), kCost, boot(40), 2.0, 1);
  CHECK(r.estimate.var_ambiguity == 0.0);
  REQUIRE(r.estimate.plan.has_value());
  CHECK(r.estimate.plan->zeta == r.zeta_grid.front());
  for (const auto& p : r.d_series.points) CHECK(p.v < 1e-24);
}

TEST_CASE("recalibrate single path matches the two-term formula") {
  // Intercept-only design, identical points: W = D = 1 exactly and the
  // forecasts have zero variance; delta = 100 drives gamma to 1.
  const double a = std::sqrt(3.0) / 2.0;
  Matrix X = Matrix::Ones(4, 1);
  Vector e(4);
  e << a, -a, a, -a;
  const Vector y = Vector::Constant(4, 5.0);
  const Vector yhat_lab = y.array() + 100.0 + e.array();
  const Vector yhat_unlab = Vector::Constant(4, 2.0) + e;
  std::vector<CalibrationPoint> calib;
  for (double t : {0.0, 1.0, 2.0}) calib.push_back({t, test::labeled(X, y, yhat_lab), test::unlabeled(X, yhat_unlab)});

  BootstrapConfig b = boot(1);
  b.zeta_grid = {0.5};
  const auto r = recalibrate_analysis(calib, kCost, b, 3.0, 0);
  CHECK(r.gamma_forecast.mean == doctest::Approx(1.0));
  CHECK(r.w_forecast.mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.d_forecast.mean == doctest::Approx(1.0).epsilon(1e-12));
  // n_lab = 100 / 2, n_unlab = 100 / 1; (X^T X)^{-1} = 1 / n.
  const double expected = 1.0 / 100.0 + 1.0 * 1.0 / 50.0;
  CHECK(std::abs(r.estimate.mean_mse - expected) < 1e-12);
  CHECK(r.estimate.plan->n_lab == 50);
  CHECK(r.estimate.plan->n_unlab == 100);
  CHECK(r.estimate.var_risk == 0.0);
}

TEST_CASE("recalibrate picks the smallest median over the zeta grid") {
  test::LinearWorld w{Vector::Ones(3), 0.4, 0.2, 0.3};
  const auto r = recalibrate_analysis(series(w, 6, 80, 7), kCost, boot(30), 2.0, 1);
  REQUIRE(r.zeta_median_mse.size() == r.zeta_grid.size());
  for (double m : r.zeta_median_mse) CHECK(r.estimate.mean_mse <= m);
  bool hit = false;
  for (double m : r.zeta_median_mse) hit = hit || m == r.estimate.mean_mse;
  CHECK(hit);
  CHECK(r.gamma_forecast.variance >= 0.0);
}

TEST_CASE("more budget never hurts") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    test::LinearWorld w{Vector::Ones(2), 0.4, 0.1, 0.2};
    const auto calib = series(w, 5, 60, 500 + seed);
    const auto hold = holdout(w, 600, 600 + seed);
    CostModel rich = kCost;
    rich.budget *= 2.0;
    const auto b = boot(25, seed);
    CHECK(estimate_refit(hold, rich, b, 1).mean_mse <= estimate_refit(hold, kCost, b, 1).mean_mse);
    const auto lo = recalibrate_analysis(calib, kCost, b, 2.0, 1);
    const auto hi = recalibrate_analysis(calib, rich, b, 2.0, 1);
    for (std::size_t k = 0; k < lo.zeta_median_mse.size(); ++k) CHECK(hi.zeta_median_mse[k] <= lo.zeta_median_mse[k]);
  }
}

TEST_CASE("estimates do not depend on the thread count") {
  test::LinearWorld w{Vector::Ones(3), 0.4, 0.1, 0.2};
  const auto calib = series(w, 6, 80, 8);
  const auto hold = holdout(w, 500, 9);
  const auto one = estimate_all(calib, hold, kCost, boot(40, 3, 1), 2.5, 1);
  const auto many = estimate_all(calib, hold, kCost, boot(40, 3, 4), 2.5, 1);
  CHECK(one.retain.estimate.mean_mse == many.retain.estimate.mean_mse);
  CHECK(one.refit.replicates == many.refit.replicates);
  CHECK(one.recalibrate.estimate.replicates == many.recalibrate.estimate.replicates);
  CHECK(one.covariance == many.covariance);
}

TEST_CASE("paired replicates give a covariance, unpaired give zero") {
  test::LinearWorld w{Vector::Ones(2), 0.4, 0.1, 0.2};
  const auto calib = series(w, 5, 80, 10);
  const auto hold = holdout(w, 500, 11);
  auto b = boot(30);
  const auto paired = estimate_all(calib, hold, kCost, b, 2.0, 1);
  const auto& x = paired.refit.replicates;
  const auto& y = paired.recalibrate.estimate.replicates;
  double mx = 0, my = 0, c = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / x.size(), my += y[i] / y.size();
  for (std::size_t i = 0; i < x.size(); ++i) c += (x[i] - mx) * (y[i] - my) / (x.size() - 1);
  CHECK(std::abs(paired.covariance - c) < 1e-15);
  b.pair_replicates = false;
  CHECK(estimate_all(calib, hold, kCost, b, 2.0, 1).covariance == 0.0);
}

TEST_CASE("median and sample variance") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK(sample_variance({1.0}) == 0.0);
  CHECK(sample_variance({1.0, 2.0, 3.0, 4.0}) == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("estimator input errors") {
  test::LinearWorld w{Vector::Ones(2), 0.3};
  const auto calib = series(w, 4, 50, 12);
  const auto b = boot(5);
  CHECK(kind_of([&] { estimate_retain({calib[0], calib[1]}, kCost, b, 2.0, 1); }) ==
        ErrorKind::TooFewCalibrationPoints);
  CHECK(kind_of([&] { estimate_retain(calib, kCost, b, 0.5, 1); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { estimate_retain({calib[1], calib[0], calib[2]}, kCost, b, 2.0, 1); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { estimate_retain(calib, kCost, b, 2.0, 9); }) == ErrorKind::IndexOutOfRange);
  CHECK(kind_of([&] { estimate_refit(calib[0].lab, {12.0, 10.0, 2.0, 1.0}, b, 1); }) == ErrorKind::BudgetTooSmall);
  CHECK(kind_of([&] { estimate_refit(calib[0].lab, {5.0, 10.0, 2.0, 1.0}, b, 1); }) == ErrorKind::BudgetTooSmall);
  auto empty = b;
  empty.zeta_grid.clear();
  CHECK(kind_of([&] { estimate_recalibrate(calib, kCost, empty, 2.0, 1); }) == ErrorKind::EmptyZetaGrid);
  auto tiny = b;
  tiny.zeta_grid = {0.01};
  CHECK(kind_of([&] { estimate_recalibrate(calib, kCost, tiny, 2.0, 1); }) == ErrorKind::BudgetTooSmall);
  auto zero = b;
  zero.replicates = 0;
  CHECK(kind_of([&] { estimate_refit(calib[0].lab, kCost, zero, 1); }) == ErrorKind::InvalidArgument);
}
