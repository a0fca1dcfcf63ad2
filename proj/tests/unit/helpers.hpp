#pragma once

#include "ipd/ppi.hpp"
#include "ipd/random.hpp"
#include "ipd/strategy.hpp"

#include <random>

namespace test {

using ipd::Matrix;
using ipd::Vector;

inline Matrix random_design(std::size_t n, std::size_t p, std::uint64_t seed, bool intercept = true) {
  ipd::Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = (intercept && j == 0) ? 1.0 : z(rng);
  return X;
}

inline Vector noise(std::size_t n, double sd, std::uint64_t seed) {
  ipd::Rng rng(seed);
  std::normal_distribution<double> z(0.0, sd);
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = z(rng);
  return v;
}

// Normal-equations solve, independent of the QR path under test.
inline Vector normal_equations(const Matrix& X, const Vector& y) {
  return (X.transpose() * X).ldlt().solve(X.transpose() * y);
}

inline ipd::LabeledBatch labeled(const Matrix& X, const Vector& y, const Vector& yhat) {
  return {ipd::DesignMatrix(X), y, yhat};
}

inline ipd::UnlabeledBatch unlabeled(const Matrix& X, const Vector& yhat) { return {ipd::DesignMatrix(X), yhat}; }

// Linear truth y = X beta + noise with a prediction y + bias + slope_bias * x1.
struct LinearWorld {
  Vector beta;
  double noise_sd = 0.3;
  double bias = 0.0;
  double slope_bias = 0.0;

  ipd::CalibrationPoint point(double t, std::size_t n_lab, std::size_t n_unlab, std::uint64_t seed) const {
    const auto p = static_cast<std::size_t>(beta.size());
    const Matrix Xl = random_design(n_lab, p, seed * 4 + 1);
    const Matrix Xu = random_design(n_unlab, p, seed * 4 + 2);
    const Vector yl = Xl * beta + noise(n_lab, noise_sd, seed * 4 + 3);
    const Vector yu = Xu * beta + noise(n_unlab, noise_sd, seed * 4 + 4);
    auto predict = [&](const Matrix& X, const Vector& y) {
      Vector out = y.array() + bias;
      if (p > 1) out += slope_bias * X.col(1);
      return out;
    };
    return {t, labeled(Xl, yl, predict(Xl, yl)), unlabeled(Xu, predict(Xu, yu))};
  }
};

}  // namespace test
