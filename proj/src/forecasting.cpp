#include "ipd/forecasting.hpp"

#include "ipd/error.hpp"

#include <algorithm>
#include <cmath>

namespace ipd {

TrendModel fit_trend(const TimeSeries& series) {
  const auto& pts = series.points;
  if (pts.size() < 3)
    fail(ErrorKind::TooFewPoints, "trend fit needs at least 3 points, got " + std::to_string(pts.size()));
  for (const auto& p : pts)
    if (!std::isfinite(p.t) || !std::isfinite(p.v)) fail(ErrorKind::NonFiniteInput, "non-finite point in series");

  const double n = static_cast<double>(pts.size());
  double t_mean = 0.0, v_mean = 0.0;
  for (const auto& p : pts) {
    t_mean += p.t;
    v_mean += p.v;
  }
  t_mean /= n;
  v_mean /= n;

  double t_ss = 0.0, tv = 0.0;
  for (const auto& p : pts) {
    t_ss += (p.t - t_mean) * (p.t - t_mean);
    tv += (p.t - t_mean) * (p.v - v_mean);
  }
  const double t_scale = std::max(1.0, std::abs(t_mean));
  if (!(t_ss > 1e-24 * t_scale * t_scale * n)) fail(ErrorKind::DegenerateTimes, "all calibration times are equal");

  TrendModel m;
  m.slope = tv / t_ss;
  m.intercept = v_mean - m.slope * t_mean;
  m.n = pts.size();
  m.t_mean = t_mean;
  m.t_ss = t_ss;
  double rss = 0.0;
  for (const auto& p : pts) {
    const double r = p.v - (m.intercept + m.slope * p.t);
    rss += r * r;
  }
  m.resid_var = rss / (n - 2.0);
  return m;
}

PredictiveDistribution forecast(const TrendModel& model, double t_future, ForecastBand band) {
  if (model.n < 3 || !(model.t_ss > 0.0) || model.resid_var < 0.0)
    fail(ErrorKind::InvalidArgument, "invalid trend model");
  const double dt = t_future - model.t_mean;
  const double leverage = 1.0 / static_cast<double>(model.n) + dt * dt / model.t_ss;
  PredictiveDistribution d;
  d.mean = model.intercept + model.slope * t_future;
  d.variance = model.resid_var * (band == ForecastBand::Prediction ? 1.0 + leverage : leverage);
  return d;
}

double sample(const PredictiveDistribution& dist, Rng& rng) {
  double x = dist.mean;
  if (dist.variance > 0.0) {
    std::normal_distribution<double> normal(dist.mean, std::sqrt(dist.variance));
    x = normal(rng);
  }
  if (dist.lower_clip) x = std::max(x, *dist.lower_clip);
  if (dist.upper_clip) x = std::min(x, *dist.upper_clip);
  return x;
}

}  // namespace ipd
