#pragma once

#include "ipd/glm.hpp"

#include <optional>

namespace ipd {

/// Rows with true outcomes and the deployed model's predictions.
struct LabeledBatch {
  DesignMatrix X;
  Vector y;
  Vector yhat;

  /// Throws DimensionMismatch / NonFiniteInput when the invariants fail.
  void validate() const;
};

/// Rows with features and predictions only.
struct UnlabeledBatch {
  DesignMatrix X;
  Vector yhat;

  void validate() const;
};

struct Rectifier {
  Vector delta;           // beta(X, yhat) - beta(X, y)
  double d_scalar = 0.0;  // residual variance of regressing (yhat - y) on X
  Matrix cov;             // d_scalar * (X^T X)^{-1}
};

struct PpiFit {
  Vector beta_rec;
  Vector beta_naive;
  Vector rectifier;
  double gamma = 0.0;
  double w_scalar = 0.0;  // residual variance of the naive fit on unlabeled predictions
  double d_scalar = 0.0;
  double var_risk = 0.0;
  double var_ambiguity = 0.0;
};

/// Rectifier of a labeled batch under squared loss.
Rectifier rectifier(const LabeledBatch& lab);

/// Step of the gamma search grid {0, 0.01, ..., 1}.
inline constexpr double kGammaStep = 0.01;

/// Gamma on the grid minimising
///   var_unlab + gamma^2 var_delta + delta^2 (1 - gamma)^2
/// for the target coefficient; ties go to the larger gamma.
double select_gamma(const LabeledBatch& lab, const UnlabeledBatch& unlab, std::size_t target);

/// Grid search on precomputed target-coefficient quantities.
double select_gamma(double var_unlab, double var_delta, double delta);

/// Rectified estimate beta_naive - gamma * delta with its two-term variance.
/// When gamma is not supplied it is chosen by select_gamma.
PpiFit ppi_fit(const LabeledBatch& lab, const UnlabeledBatch& unlab, std::size_t target,
               std::optional<double> gamma = std::nullopt);

}  // namespace ipd
