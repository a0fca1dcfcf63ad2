#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace ipd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Regression design with labelled columns. Construction validates shape and
/// finiteness; the values are immutable afterwards.
class DesignMatrix {
 public:
  DesignMatrix() = default;
  DesignMatrix(Matrix values, std::vector<std::string> column_names);
  /// Unnamed columns are labelled c0, c1, ...
  explicit DesignMatrix(Matrix values);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  const Matrix& values() const noexcept { return values_; }
  const std::vector<std::string>& column_names() const noexcept { return names_; }

  /// Index of the named column; throws IndexOutOfRange when absent.
  std::size_t column_index(const std::string& name) const;

  /// Rows selected by index (duplicates allowed), keeping column names.
  DesignMatrix select_rows(const std::vector<std::size_t>& rows) const;

 private:
  Matrix values_;
  std::vector<std::string> names_;
};

struct FitResult {
  Vector beta;
  double sigma2 = 0.0;  // RSS / dof
  Matrix cov;           // sigma2 * (X^T X)^{-1}
  std::size_t dof = 0;  // rows - cols
};

/// Singular values below this fraction of the largest mark a design as rank deficient.
inline constexpr double kRankTolerance = 1e-10;

/// Ordinary least squares through a Householder QR of X.
///
/// Throws DimensionMismatch when y does not match X, InsufficientRows when
/// rows - cols < 1 and RankDeficient when the singular-value ratio of X is
/// below kRankTolerance.
FitResult fit_linear(const DesignMatrix& X, const Vector& y);
FitResult fit_linear(const Matrix& X, const Vector& y);

/// cov[j, j] of a fitted model.
double coef_variance(const FitResult& fit, std::size_t j);

/// [(X^T X)^{-1}]_{jj} for a design without a response, with the same rank check as fit_linear.
double inverse_gram_entry(const Matrix& X, std::size_t j);

/// Same, for a precomputed Gram matrix X^T X.
double inverse_gram_entry_from_gram(const Matrix& gram, std::size_t j);

/// Gathers rows of a dense matrix.
Matrix gather_rows(const Matrix& X, const std::vector<std::size_t>& rows);
Vector gather(const Vector& v, const std::vector<std::size_t>& rows);

}  // namespace ipd
