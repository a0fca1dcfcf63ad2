#include "ipd/glm.hpp"

#include "ipd/error.hpp"

#include <cmath>

namespace ipd {

namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

void check_rank_from_r(const Matrix& r) {
  Eigen::JacobiSVD<Matrix> svd(r);
  const auto& s = svd.singularValues();
  const double largest = s(0);
  const double smallest = s(s.size() - 1);
  if (!(largest > 0.0) || smallest <= kRankTolerance * largest) {
    fail(ErrorKind::RankDeficient, "design is not of full column rank (singular value ratio " +
                                       std::to_string(largest > 0.0 ? smallest / largest : 0.0) + ")");
  }
}

}  // namespace

DesignMatrix::DesignMatrix(Matrix values, std::vector<std::string> column_names)
    : values_(std::move(values)), names_(std::move(column_names)) {
  if (values_.cols() < 1) fail(ErrorKind::DimensionMismatch, "design needs at least one column");
  if (values_.rows() < values_.cols())
    fail(ErrorKind::InsufficientRows, "design has fewer rows than columns");
  if (names_.size() != static_cast<std::size_t>(values_.cols()))
    fail(ErrorKind::DimensionMismatch, "column name count does not match design width");
  if (!all_finite(values_)) fail(ErrorKind::NonFiniteInput, "design contains non-finite values");
}

DesignMatrix::DesignMatrix(Matrix values)
    : DesignMatrix(values, [&] {
        std::vector<std::string> names;
        for (Eigen::Index j = 0; j < values.cols(); ++j) names.push_back("c" + std::to_string(j));
        return names;
      }()) {}

std::size_t DesignMatrix::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < names_.size(); ++j)
    if (names_[j] == name) return j;
  fail(ErrorKind::IndexOutOfRange, "no design column named '" + name + "'");
}

DesignMatrix DesignMatrix::select_rows(const std::vector<std::size_t>& rows) const {
  return DesignMatrix(gather_rows(values_, rows), names_);
}

Matrix gather_rows(const Matrix& X, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

Vector gather(const Vector& v, const std::vector<std::size_t>& rows) {
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(rows[i]));
  return out;
}

FitResult fit_linear(const DesignMatrix& X, const Vector& y) { return fit_linear(X.values(), y); }

FitResult fit_linear(const Matrix& X, const Vector& y) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (p < 1) fail(ErrorKind::DimensionMismatch, "design needs at least one column");
  if (y.size() != n)
    fail(ErrorKind::DimensionMismatch,
         "response length " + std::to_string(y.size()) + " does not match " + std::to_string(n) + " design rows");
  if (n - p < 1)
    fail(ErrorKind::InsufficientRows,
         "need more rows than columns (rows=" + std::to_string(n) + ", cols=" + std::to_string(p) + ")");
  if (!X.allFinite() || !y.allFinite()) fail(ErrorKind::NonFiniteInput, "non-finite value in regression inputs");

  Eigen::HouseholderQR<Matrix> qr(X);
  const Matrix r = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  check_rank_from_r(r);

  const Vector qty = (qr.householderQ().transpose() * y).head(p);
  FitResult fit;
  fit.beta = r.triangularView<Eigen::Upper>().solve(qty);
  const Vector resid = y - X * fit.beta;
  fit.dof = static_cast<std::size_t>(n - p);
  fit.sigma2 = resid.squaredNorm() / static_cast<double>(fit.dof);

  const Matrix r_inv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(p, p));
  Matrix cov = fit.sigma2 * (r_inv * r_inv.transpose());
  fit.cov = 0.5 * (cov + cov.transpose());
  return fit;
}

double coef_variance(const FitResult& fit, std::size_t j) {
  if (j >= static_cast<std::size_t>(fit.beta.size()))
    fail(ErrorKind::IndexOutOfRange, "coefficient index " + std::to_string(j) + " out of range");
  return fit.cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
}

double inverse_gram_entry(const Matrix& X, std::size_t j) {
  if (j >= static_cast<std::size_t>(X.cols()))
    fail(ErrorKind::IndexOutOfRange, "coefficient index " + std::to_string(j) + " out of range");
  if (X.rows() < X.cols()) fail(ErrorKind::InsufficientRows, "design has fewer rows than columns");
  Eigen::HouseholderQR<Matrix> qr(X);
  const Eigen::Index p = X.cols();
  const Matrix r = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  check_rank_from_r(r);
  // [(R^T R)^{-1}]_jj is the squared norm of row j of R^{-1}.
  const Matrix r_inv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(p, p));
  return r_inv.row(static_cast<Eigen::Index>(j)).squaredNorm();
}

double inverse_gram_entry_from_gram(const Matrix& gram, std::size_t j) {
  if (j >= static_cast<std::size_t>(gram.cols()))
    fail(ErrorKind::IndexOutOfRange, "coefficient index " + std::to_string(j) + " out of range");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  const double largest = ev(ev.size() - 1);
  const double smallest = ev(0);
  // Eigenvalues of X^T X are squared singular values of X.
  if (!(largest > 0.0) || smallest <= kRankTolerance * kRankTolerance * largest)
    fail(ErrorKind::RankDeficient, "resampled design is not of full column rank");
  Vector e = Vector::Zero(gram.cols());
  e(static_cast<Eigen::Index>(j)) = 1.0;
  const Vector col = gram.llt().solve(e);
  return col(static_cast<Eigen::Index>(j));
}

}  // namespace ipd
