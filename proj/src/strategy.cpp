#include "ipd/strategy.hpp"

#include "ipd/error.hpp"
#include "ipd/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ipd {

namespace {

constexpr int kRedrawAttempts = 10;

void validate_calibration(const std::vector<CalibrationPoint>& calib, double t_future) {
  if (calib.size() < 3)
    fail(ErrorKind::TooFewCalibrationPoints,
         "need at least 3 calibration points, got " + std::to_string(calib.size()));
  const std::size_t cols = calib.front().lab.X.cols();
  for (std::size_t i = 0; i < calib.size(); ++i) {
    const auto& p = calib[i];
    p.lab.validate();
    p.unlab.validate();
    if (p.lab.X.cols() != cols || p.unlab.X.cols() != cols)
      fail(ErrorKind::DimensionMismatch, "calibration points have different design widths");
    if (p.lab.X.rows() < cols + 2)
      fail(ErrorKind::InsufficientRows, "calibration point " + std::to_string(i) + " has too few labeled rows");
    if (!std::isfinite(p.t)) fail(ErrorKind::NonFiniteInput, "non-finite calibration time");
    if (i > 0 && !(p.t > calib[i - 1].t))
      fail(ErrorKind::InvalidArgument, "calibration times must be strictly increasing");
  }
  if (!(t_future > calib.back().t))
    fail(ErrorKind::InvalidArgument, "t_future must lie after the last calibration time");
}

std::uint64_t replicate_seed(const BootstrapConfig& boot, StreamTag own, std::size_t b) {
  return derive_seed(boot.master_seed, boot.pair_replicates ? StreamTag::Paired : own, {b});
}

// Substream of a replicate seed; attempt 0 keeps the plain stream so that
// paired estimators draw identical indices on the first try.
Rng substream(std::uint64_t seed_b, std::uint64_t which, int attempt) {
  if (attempt == 0) return Rng(derive_seed(seed_b, {which}));
  return Rng(derive_seed(seed_b, {which, static_cast<std::uint64_t>(attempt)}));
}

template <class Fn>
auto with_redraws(Fn&& fn) {
  for (int attempt = 0;; ++attempt) {
    try {
      return fn(attempt);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::RankDeficient || attempt + 1 >= kRedrawAttempts) throw;
    }
  }
}

// Target coefficient (and optionally its variance) of the least-squares fit
// on rows idx, through the normal equations. Bootstrap designs here are
// narrow and well conditioned; the rank check matches fit_linear's.
struct TargetFit {
  double coef = 0.0;
  double var = 0.0;
};

TargetFit fit_target(const Matrix& X, const Vector& y, const std::vector<std::size_t>& idx, std::size_t target,
                     bool with_variance) {
  const Eigen::Index p = X.cols();
  const auto n = static_cast<Eigen::Index>(idx.size());
  if (n - p < 1) fail(ErrorKind::InsufficientRows, "bootstrap sample has too few rows");
  Matrix gram = Matrix::Zero(p, p);
  Vector xty = Vector::Zero(p);
  for (std::size_t r : idx) {
    const auto i = static_cast<Eigen::Index>(r);
    const double yi = y(i);
    for (Eigen::Index a = 0; a < p; ++a) {
      const double xa = X(i, a);
      xty(a) += xa * yi;
      for (Eigen::Index c = 0; c <= a; ++c) gram(a, c) += xa * X(i, c);
    }
  }
  gram = gram.selfadjointView<Eigen::Lower>();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  if (!(ev(p - 1) > 0.0) || ev(0) <= kRankTolerance * kRankTolerance * ev(p - 1))
    fail(ErrorKind::RankDeficient, "resampled design is not of full column rank");
  const Eigen::LLT<Matrix> llt(gram);
  const Vector beta = llt.solve(xty);
  const auto t = static_cast<Eigen::Index>(target);
  TargetFit out{beta(t), 0.0};
  if (with_variance) {
    double rss = 0.0;
    for (std::size_t r : idx) {
      const auto i = static_cast<Eigen::Index>(r);
      const double e = y(i) - X.row(i).dot(beta);
      rss += e * e;
    }
    Vector unit = Vector::Zero(p);
    unit(t) = 1.0;
    out.var = rss / static_cast<double>(n - p) * llt.solve(unit)(t);
  }
  return out;
}

Matrix stack_rows(const std::vector<const Matrix*>& parts) {
  Eigen::Index rows = 0;
  for (const auto* m : parts) rows += m->rows();
  Matrix out(rows, parts.front()->cols());
  Eigen::Index at = 0;
  for (const auto* m : parts) {
    out.middleRows(at, m->rows()) = *m;
    at += m->rows();
  }
  return out;
}

// Gram matrices of the first counts[k] rows of X[idx], counts ascending.
std::vector<Matrix> prefix_grams(const Matrix& X, const std::vector<std::size_t>& idx,
                                 const std::vector<std::size_t>& counts) {
  std::vector<Matrix> out;
  out.reserve(counts.size());
  Matrix gram = Matrix::Zero(X.cols(), X.cols());
  std::size_t done = 0;
  for (std::size_t c : counts) {
    for (; done < c; ++done) {
      const auto row = X.row(static_cast<Eigen::Index>(idx[done]));
      gram.noalias() += row.transpose() * row;
    }
    out.push_back(gram);
  }
  return out;
}

}  // namespace

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::Retain: return "Retain";
    case Strategy::Refit: return "Refit";
    case Strategy::Recalibrate: return "Recalibrate";
  }
  return "?";
}

void CostModel::validate() const {
  for (double v : {budget, model_cost, labeled_cost, unlabeled_cost})
    if (!std::isfinite(v) || !(v > 0.0)) fail(ErrorKind::InvalidArgument, "costs and budget must be positive");
  if (!(model_cost < budget)) fail(ErrorKind::BudgetTooSmall, "model cost must be below the budget");
}

std::size_t affordable_samples(double money, double unit_cost) {
  if (!(unit_cost > 0.0) || !(money > 0.0)) return 0;
  const double n = std::floor(money / unit_cost + 1e-9);
  return n <= 0.0 ? 0 : static_cast<std::size_t>(n);
}

std::vector<double> BootstrapConfig::default_zeta_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 19; ++k) g.push_back(0.05 * k);
  return g;
}

void BootstrapConfig::validate() const {
  if (replicates < 1) fail(ErrorKind::InvalidArgument, "bootstrap needs at least one replicate");
  for (std::size_t i = 0; i < zeta_grid.size(); ++i) {
    const double z = zeta_grid[i];
    if (!(z > 0.0 && z < 1.0)) fail(ErrorKind::InvalidArgument, "zeta values must lie in (0, 1)");
    if (i > 0 && !(z > zeta_grid[i - 1])) fail(ErrorKind::InvalidArgument, "zeta grid must be strictly increasing");
  }
}

double median(std::vector<double> values) {
  if (values.empty()) fail(ErrorKind::InvalidArgument, "median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  const double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

double sample_variance(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size() - 1);
}

RetainResult retain_analysis(const std::vector<CalibrationPoint>& calib, const CostModel& cost,
                             const BootstrapConfig& boot, double t_future, std::size_t target) {
  cost.validate();
  boot.validate();
  validate_calibration(calib, t_future);
  const std::size_t cols = calib.front().lab.X.cols();
  if (target >= cols) fail(ErrorKind::IndexOutOfRange, "target coefficient out of range");
  const std::size_t n = affordable_samples(cost.budget, cost.unlabeled_cost);
  if (n < cols + 2) fail(ErrorKind::BudgetTooSmall, "budget buys fewer than cols + 2 unlabeled samples");

  const auto t = static_cast<Eigen::Index>(target);
  std::vector<double> r(calib.size());
  parallel_for(calib.size(), boot.threads, [&](std::size_t i) {
    const auto& p = calib[i];
    const double truth = fit_linear(p.lab.X, p.lab.y).beta(t);
    const Matrix& X = p.unlab.X.values();
    std::vector<double> coefs(boot.replicates);
    for (std::size_t b = 0; b < boot.replicates; ++b) {
      const std::uint64_t seed_b = derive_seed(boot.master_seed, StreamTag::Retain, {i, b});
      coefs[b] = with_redraws([&](int attempt) {
        Rng rng = substream(seed_b, 1, attempt);
        const auto idx = resample_indices(X.rows(), n, rng);
        return fit_target(X, p.unlab.yhat, idx, target, false).coef;
      });
    }
    const double gap = truth - median(std::move(coefs));
    r[i] = gap * gap;
  });

  RetainResult out;
  for (std::size_t i = 0; i < calib.size(); ++i) out.mse_series.points.push_back({calib[i].t, r[i]});
  out.trend = fit_trend(out.mse_series);
  out.forecast = forecast(out.trend, t_future);
  out.estimate.strategy = Strategy::Retain;
  out.estimate.mean_mse = std::max(0.0, out.forecast.mean);
  return out;
}

StrategyEstimate estimate_retain(const std::vector<CalibrationPoint>& calib, const CostModel& cost,
                                 const BootstrapConfig& boot, double t_future, std::size_t target) {
  return retain_analysis(calib, cost, boot, t_future, target).estimate;
}

StrategyEstimate estimate_refit(const LabeledBatch& holdout, const CostModel& cost, const BootstrapConfig& boot,
                                std::size_t target) {
  cost.validate();
  boot.validate();
  holdout.validate();
  const std::size_t cols = holdout.X.cols();
  if (target >= cols) fail(ErrorKind::IndexOutOfRange, "target coefficient out of range");
  if (holdout.X.rows() < cols + 2) fail(ErrorKind::InsufficientRows, "holdout has fewer than cols + 2 rows");
  const std::size_t n = affordable_samples(cost.budget - cost.model_cost, cost.unlabeled_cost);
  if (n < cols + 2) fail(ErrorKind::BudgetTooSmall, "budget left after refitting buys fewer than cols + 2 samples");

  const Matrix& X = holdout.X.values();
  StrategyEstimate est;
  est.strategy = Strategy::Refit;
  est.paired = boot.pair_replicates;
  est.replicates.resize(boot.replicates);
  parallel_for(boot.replicates, boot.threads, [&](std::size_t b) {
    const std::uint64_t seed_b = replicate_seed(boot, StreamTag::Refit, b);
    est.replicates[b] = with_redraws([&](int attempt) {
      Rng rng = substream(seed_b, 1, attempt);
      const auto idx = resample_indices(X.rows(), n, rng);
      return fit_target(X, holdout.y, idx, target, true).var;
    });
  });
  est.mean_mse = median(est.replicates);
  est.var_risk = sample_variance(est.replicates);
  return est;
}

RecalibrateResult recalibrate_analysis(const std::vector<CalibrationPoint>& calib, const CostModel& cost,
                                       const BootstrapConfig& boot, double t_future, std::size_t target) {
  cost.validate();
  boot.validate();
  if (boot.zeta_grid.empty()) fail(ErrorKind::EmptyZetaGrid, "zeta grid is empty");
  validate_calibration(calib, t_future);
  const std::size_t cols = calib.front().lab.X.cols();
  if (target >= cols) fail(ErrorKind::IndexOutOfRange, "target coefficient out of range");

  const std::size_t nz = boot.zeta_grid.size();
  std::vector<SamplePlan> plans(nz);
  for (std::size_t k = 0; k < nz; ++k) {
    const double z = boot.zeta_grid[k];
    plans[k] = {z, affordable_samples(z * cost.budget, cost.labeled_cost),
                affordable_samples((1.0 - z) * cost.budget, cost.unlabeled_cost)};
    if (plans[k].n_lab < cols + 2 || plans[k].n_unlab < cols + 2)
      fail(ErrorKind::BudgetTooSmall, "zeta " + std::to_string(z) + " buys fewer than cols + 2 samples");
  }

  RecalibrateResult out;
  for (const auto& p : calib) {
    const PpiFit f = ppi_fit(p.lab, p.unlab, target);
    out.gamma_series.points.push_back({p.t, f.gamma});
    out.w_series.points.push_back({p.t, f.w_scalar});
    out.d_series.points.push_back({p.t, f.d_scalar});
  }
  out.gamma_forecast = forecast(fit_trend(out.gamma_series), t_future, boot.recalibration_band);
  out.gamma_forecast.lower_clip = 0.0;
  out.gamma_forecast.upper_clip = 1.0;
  out.w_forecast = forecast(fit_trend(out.w_series), t_future, boot.recalibration_band);
  out.w_forecast.lower_clip = 0.0;
  out.d_forecast = forecast(fit_trend(out.d_series), t_future, boot.recalibration_band);
  out.d_forecast.lower_clip = 0.0;

  std::vector<const Matrix*> parts;
  if (boot.pool == DesignPool::Pooled) {
    for (const auto& p : calib) {
      parts.push_back(&p.lab.X.values());
      parts.push_back(&p.unlab.X.values());
    }
  } else {
    parts.push_back(&calib.back().lab.X.values());
    parts.push_back(&calib.back().unlab.X.values());
  }
  const Matrix pool = stack_rows(parts);

  // Row counts in ascending order. Every replicate draws one index sequence
  // per kind and each zeta uses a prefix of it, so zeta values share draws.
  std::vector<std::size_t> unlab_counts, lab_counts;
  for (const auto& pl : plans) {
    unlab_counts.push_back(pl.n_unlab);
    lab_counts.push_back(pl.n_lab);
  }
  std::sort(unlab_counts.begin(), unlab_counts.end());
  std::sort(lab_counts.begin(), lab_counts.end());
  auto slot = [](const std::vector<std::size_t>& counts, std::size_t c) {
    return static_cast<std::size_t>(std::lower_bound(counts.begin(), counts.end(), c) - counts.begin());
  };

  const std::size_t B = boot.replicates;
  std::vector<std::vector<double>> risk(nz, std::vector<double>(B)), amb(nz, std::vector<double>(B));
  parallel_for(B, boot.threads, [&](std::size_t b) {
    const std::uint64_t seed_b = replicate_seed(boot, StreamTag::Recalibrate, b);
    Rng params = substream(seed_b, 0, 0);
    const double g = sample(out.gamma_forecast, params);
    const double w = sample(out.w_forecast, params);
    const double d = sample(out.d_forecast, params);

    auto inverse_entries = [&](std::uint64_t which, const std::vector<std::size_t>& counts) {
      return with_redraws([&](int attempt) {
        Rng rng = substream(seed_b, which, attempt);
        const auto idx = resample_indices(pool.rows(), counts.back(), rng);
        const auto grams = prefix_grams(pool, idx, counts);
        std::vector<double> inv(grams.size());
        for (std::size_t k = 0; k < grams.size(); ++k) inv[k] = inverse_gram_entry_from_gram(grams[k], target);
        return inv;
      });
    };
    const auto inv_unlab = inverse_entries(1, unlab_counts);
    const auto inv_lab = inverse_entries(2, lab_counts);
    for (std::size_t k = 0; k < nz; ++k) {
      risk[k][b] = w * inv_unlab[slot(unlab_counts, plans[k].n_unlab)];
      amb[k][b] = g * g * d * inv_lab[slot(lab_counts, plans[k].n_lab)];
    }
  });

  std::size_t best = 0;
  double best_mse = std::numeric_limits<double>::infinity();
  std::vector<double> totals(B);
  for (std::size_t k = 0; k < nz; ++k) {
    for (std::size_t b = 0; b < B; ++b) totals[b] = risk[k][b] + amb[k][b];
    const double m = median(totals);
    out.zeta_median_mse.push_back(m);
    if (m < best_mse) {
      best_mse = m;
      best = k;
    }
  }

  out.zeta_grid = boot.zeta_grid;
  auto& est = out.estimate;
  est.strategy = Strategy::Recalibrate;
  est.mean_mse = best_mse;
  est.var_risk = sample_variance(risk[best]);
  est.var_ambiguity = sample_variance(amb[best]);
  est.plan = plans[best];
  est.paired = boot.pair_replicates;
  est.replicates.resize(B);
  for (std::size_t b = 0; b < B; ++b) est.replicates[b] = risk[best][b] + amb[best][b];
  return out;
}

StrategyEstimate estimate_recalibrate(const std::vector<CalibrationPoint>& calib, const CostModel& cost,
                                      const BootstrapConfig& boot, double t_future, std::size_t target) {
  return recalibrate_analysis(calib, cost, boot, t_future, target).estimate;
}

StrategyBundle estimate_all(const std::vector<CalibrationPoint>& calib, const LabeledBatch& holdout,
                            const CostModel& cost, const BootstrapConfig& boot, double t_future, std::size_t target) {
  StrategyBundle out;
  out.retain = retain_analysis(calib, cost, boot, t_future, target);
  out.refit = estimate_refit(holdout, cost, boot, target);
  out.recalibrate = recalibrate_analysis(calib, cost, boot, t_future, target);
  out.covariance = replicate_covariance(out.refit, out.recalibrate.estimate);
  return out;
}

double replicate_covariance(const StrategyEstimate& refit, const StrategyEstimate& recalibrate) {
  const auto& a = refit.replicates;
  const auto& b = recalibrate.replicates;
  if (!refit.paired || !recalibrate.paired || a.size() != b.size() || a.size() < 2) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(a.size() - 1);
}

}  // namespace ipd
