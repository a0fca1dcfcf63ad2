#include "ipd/ppi.hpp"

#include "ipd/error.hpp"

#include <cmath>

namespace ipd {

void LabeledBatch::validate() const {
  const auto n = static_cast<Eigen::Index>(X.rows());
  if (y.size() != n || yhat.size() != n)
    fail(ErrorKind::DimensionMismatch, "labeled batch: y/yhat length does not match design rows");
  if (!y.allFinite() || !yhat.allFinite()) fail(ErrorKind::NonFiniteInput, "labeled batch has non-finite outcomes");
}

void UnlabeledBatch::validate() const {
  if (yhat.size() != static_cast<Eigen::Index>(X.rows()))
    fail(ErrorKind::DimensionMismatch, "unlabeled batch: yhat length does not match design rows");
  if (!yhat.allFinite()) fail(ErrorKind::NonFiniteInput, "unlabeled batch has non-finite predictions");
}

Rectifier rectifier(const LabeledBatch& lab) {
  lab.validate();
  // Least squares is linear in the response, so the difference of the two
  // fits equals a single fit on the residual yhat - y.
  const FitResult fit = fit_linear(lab.X, Vector(lab.yhat - lab.y));
  return Rectifier{fit.beta, fit.sigma2, fit.cov};
}

double select_gamma(double var_unlab, double var_delta, double delta) {
  const double bias2 = delta * delta;
  double best_gamma = 0.0;
  double best = 0.0;
  const int steps = static_cast<int>(std::lround(1.0 / kGammaStep));
  for (int k = 0; k <= steps; ++k) {
    const double g = k * kGammaStep;
    const double objective = var_unlab + g * g * var_delta + bias2 * (1.0 - g) * (1.0 - g);
    if (k == 0 || objective <= best) {
      best = objective;
      best_gamma = g;
    }
  }
  return best_gamma;
}

double select_gamma(const LabeledBatch& lab, const UnlabeledBatch& unlab, std::size_t target) {
  unlab.validate();
  const FitResult naive = fit_linear(unlab.X, unlab.yhat);
  const Rectifier rect = rectifier(lab);
  const double var_unlab = coef_variance(naive, target);
  const auto t = static_cast<Eigen::Index>(target);
  return select_gamma(var_unlab, rect.cov(t, t), rect.delta(t));
}

PpiFit ppi_fit(const LabeledBatch& lab, const UnlabeledBatch& unlab, std::size_t target,
               std::optional<double> gamma) {
  unlab.validate();
  if (lab.X.cols() != unlab.X.cols())
    fail(ErrorKind::DimensionMismatch, "labeled and unlabeled designs have different widths");
  if (gamma && !(*gamma >= 0.0 && *gamma <= 1.0))
    fail(ErrorKind::InvalidArgument, "gamma must lie in [0, 1]");

  const FitResult naive = fit_linear(unlab.X, unlab.yhat);
  const Rectifier rect = rectifier(lab);
  const double var_unlab = coef_variance(naive, target);
  const auto t = static_cast<Eigen::Index>(target);
  const double var_delta = rect.cov(t, t);

  PpiFit out;
  out.gamma = gamma ? *gamma : select_gamma(var_unlab, var_delta, rect.delta(t));
  out.beta_naive = naive.beta;
  out.rectifier = rect.delta;
  out.beta_rec = naive.beta - out.gamma * rect.delta;
  out.w_scalar = naive.sigma2;
  out.d_scalar = rect.d_scalar;
  out.var_risk = var_unlab;
  out.var_ambiguity = out.gamma * out.gamma * var_delta;
  return out;
}

}  // namespace ipd
