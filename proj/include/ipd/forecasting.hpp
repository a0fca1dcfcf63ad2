#pragma once

#include "ipd/random.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace ipd {

struct TimePoint {
  double t = 0.0;
  double v = 0.0;
};

struct TimeSeries {
  std::vector<TimePoint> points;
};

/// Simple linear regression of a series on time.
struct TrendModel {
  double intercept = 0.0;
  double slope = 0.0;
  double resid_var = 0.0;  // RSS / (n - 2)
  std::size_t n = 0;
  double t_mean = 0.0;
  double t_ss = 0.0;  // sum of (t - t_mean)^2
};

struct PredictiveDistribution {
  double mean = 0.0;
  double variance = 0.0;
  std::optional<double> lower_clip;
  std::optional<double> upper_clip;
};

/// Which uncertainty a forecast carries.
enum class ForecastBand {
  /// A new observation of the series: resid_var (1 + 1/n + (t - t_mean)^2 / t_ss).
  Prediction,
  /// The trend line itself: resid_var (1/n + (t - t_mean)^2 / t_ss).
  Mean,
};

/// Throws TooFewPoints (< 3 points), DegenerateTimes (all t equal) or NonFiniteInput.
TrendModel fit_trend(const TimeSeries& series);

PredictiveDistribution forecast(const TrendModel& model, double t_future,
                                ForecastBand band = ForecastBand::Prediction);

/// Gaussian draw clamped into the clip range; a zero-variance distribution returns its (clamped) mean.
double sample(const PredictiveDistribution& dist, Rng& rng);

}  // namespace ipd
