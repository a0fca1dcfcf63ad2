#include "helpers.hpp"

#include "ipd/error.hpp"
#include "ipd/forecasting.hpp"
#include "ipd/glm.hpp"

#include <doctest.h>

#include <cmath>

using namespace ipd;

namespace {

TimeSeries make(const std::vector<double>& t, const std::vector<double>& v) {
  TimeSeries s;
  for (std::size_t i = 0; i < t.size(); ++i) s.points.push_back({t[i], v[i]});
  return s;
}

TimeSeries noisy(std::uint64_t seed, std::size_t n = 50) {
  const Vector e = test::noise(n, 0.4, seed);
  TimeSeries s;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 3.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    s.points.push_back({t, 1.0 - 0.5 * t + e(static_cast<Eigen::Index>(i))});
  }
  return s;
}

}  // namespace

TEST_CASE("exact line forecast") {
  const auto m = fit_trend(make({0, 1, 2, 3}, {2, 5, 8, 11}));
  CHECK(std::abs(m.intercept - 2.0) < 1e-12);
  CHECK(std::abs(m.slope - 3.0) < 1e-12);
  CHECK(m.resid_var < 1e-24);
  const auto f = forecast(m, 5.0);
  CHECK(std::abs(f.mean - 17.0) < 1e-9);
  CHECK(f.variance < 1e-20);
}

TEST_CASE("constant series") {
  const auto m = fit_trend(make({0, 0.5, 2, 7}, {5, 5, 5, 5}));
  CHECK(m.intercept == doctest::Approx(5.0));
  CHECK(std::abs(m.slope) < 1e-14);
  CHECK(m.resid_var < 1e-24);
  for (double t : {-10.0, 3.0, 1e3}) {
    CHECK(forecast(m, t).mean == doctest::Approx(5.0));
    CHECK(forecast(m, t).variance < 1e-20);
  }
}

TEST_CASE("noisy trend matches an ordinary least squares fit on (1, t)") {
  const auto s = noisy(3);
  Matrix X(50, 2);
  Vector y(50);
  for (Eigen::Index i = 0; i < 50; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = s.points[static_cast<std::size_t>(i)].t;
    y(i) = s.points[static_cast<std::size_t>(i)].v;
  }
  const auto ols = fit_linear(X, y);
  const auto m = fit_trend(s);
  CHECK(std::abs(m.intercept - ols.beta(0)) < 1e-10);
  CHECK(std::abs(m.slope - ols.beta(1)) < 1e-10);
  CHECK(std::abs(m.resid_var - ols.sigma2) < 1e-10);
}

TEST_CASE("prediction and mean band variances follow the closed form") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = noisy(seed, 10 + seed);
    const auto m = fit_trend(s);
    double tm = 0.0;
    for (const auto& p : s.points) tm += p.t;
    tm /= static_cast<double>(s.points.size());
    double ss = 0.0, rss = 0.0;
    for (const auto& p : s.points) ss += (p.t - tm) * (p.t - tm);
    for (const auto& p : s.points) {
      const double e = p.v - (m.intercept + m.slope * p.t);
      rss += e * e;
    }
    const double n = static_cast<double>(s.points.size());
    const double s2 = rss / (n - 2);
    const double tf = 3.5 + 0.1 * static_cast<double>(seed);
    const double lev = 1.0 / n + (tf - tm) * (tf - tm) / ss;
    CHECK(std::abs(forecast(m, tf).variance - s2 * (1.0 + lev)) < 1e-10);
    CHECK(std::abs(forecast(m, tf, ForecastBand::Mean).variance - s2 * lev) < 1e-10);
    CHECK(std::abs(forecast(m, tf).mean - (m.intercept + m.slope * tf)) < 1e-12);
  }
}

TEST_CASE("shift equivariance") {
  const auto s = noisy(4);
  const auto a = fit_trend(s);
  auto shifted = s;
  for (auto& p : shifted.points) p.v += 7.25;
  const auto b = fit_trend(shifted);
  CHECK(std::abs(b.intercept - a.intercept - 7.25) < 1e-10);
  CHECK(std::abs(b.slope - a.slope) < 1e-10);
  CHECK(std::abs(b.resid_var - a.resid_var) < 1e-10);
}

TEST_CASE("forecast variance grows away from the time mean") {
  const auto m = fit_trend(noisy(5));
  double prev = forecast(m, m.t_mean).variance;
  for (double d = 0.1; d < 5.0; d += 0.1) {
    const double right = forecast(m, m.t_mean + d).variance;
    const double left = forecast(m, m.t_mean - d).variance;
    CHECK(right >= prev);
    CHECK(std::abs(left - right) < 1e-12);
    prev = right;
  }
}

TEST_CASE("sampling") {
  Rng rng(1);
  CHECK(sample({2.5, 0.0, std::nullopt, std::nullopt}, rng) == 2.5);
  CHECK(sample({1.2, 0.0, 0.0, 1.0}, rng) == 1.0);
  CHECK(sample({-0.2, 0.0, 0.0, 1.0}, rng) == 0.0);

  Rng mc(1);
  const PredictiveDistribution std_normal{0.0, 1.0, std::nullopt, std::nullopt};
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = sample(std_normal, mc);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(sq / n - mean * mean - 1.0) < 0.05);

  const PredictiveDistribution clipped{0.9, 1.0, 0.0, 1.0};
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double x = sample(clipped, a);
    CHECK(x == sample(clipped, b));
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
}

TEST_CASE("trend errors") {
  auto kind = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IoError;
  };
  CHECK(kind([] { fit_trend(make({0, 1}, {1, 2})); }) == ErrorKind::TooFewPoints);
  CHECK(kind([] { fit_trend(make({1, 1, 1}, {1, 2, 3})); }) == ErrorKind::DegenerateTimes);
  CHECK(kind([] { fit_trend(make({0, 1, 2}, {1, NAN, 3})); }) == ErrorKind::NonFiniteInput);
}
