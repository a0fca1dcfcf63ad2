#include "helpers.hpp"

#include "ipd/error.hpp"
#include "ipd/glm.hpp"

#include <doctest.h>

using namespace ipd;
using test::random_design;

TEST_CASE("constant response on an intercept-only design") {
  Matrix X = Matrix::Ones(3, 1);
  Vector y = Vector::Constant(3, 2.0);
  const auto fit = fit_linear(X, y);
  CHECK(fit.beta(0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(fit.sigma2 == doctest::Approx(0.0));
  CHECK(fit.dof == 2);
}

TEST_CASE("exact line") {
  Matrix X(3, 2);
  X << 1, 0, 1, 1, 1, 2;
  Vector y(3);
  y << 1, 3, 5;
  const auto fit = fit_linear(X, y);
  CHECK(std::abs(fit.beta(0) - 1.0) < 1e-12);
  CHECK(std::abs(fit.beta(1) - 2.0) < 1e-12);
  CHECK(fit.sigma2 < 1e-24);
}

TEST_CASE("random instance matches normal equations") {
  const Matrix X = random_design(50, 3, 7);
  Vector b(3);
  b << 0.5, -1.0, 2.0;
  const Vector y = X * b + test::noise(50, 0.7, 8);
  const auto fit = fit_linear(X, y);
  const Vector oracle = test::normal_equations(X, y);
  CHECK((fit.beta - oracle).cwiseAbs().maxCoeff() < 1e-9);

  const Vector resid = y - X * oracle;
  const double s2 = resid.squaredNorm() / 47.0;
  const Matrix inv = (X.transpose() * X).inverse();
  CHECK(std::abs(fit.sigma2 - s2) < 1e-12);
  CHECK(std::abs(coef_variance(fit, 1) - s2 * inv(1, 1)) < 1e-12);
  CHECK(std::abs(inverse_gram_entry(X, 2) - inv(2, 2)) < 1e-12);
  CHECK(std::abs(inverse_gram_entry_from_gram(X.transpose() * X, 0) - inv(0, 0)) < 1e-12);
}

TEST_CASE("coef_variance edge values") {
  FitResult fit;
  fit.beta = Vector::Zero(2);
  fit.cov = Matrix::Identity(2, 2);
  CHECK(coef_variance(fit, 0) == 1.0);
  CHECK_THROWS_AS(coef_variance(fit, 2), Error);

  Matrix X(3, 2);
  X << 1, 0, 1, 1, 1, 2;
  Vector y(3);
  y << 1, 3, 5;
  CHECK(coef_variance(fit_linear(X, y), 1) == doctest::Approx(0.0));
}

TEST_CASE("scaling the response scales beta, sigma2 and cov") {
  const Matrix X = random_design(40, 3, 21);
  const Vector y = X * Vector::Ones(3) + test::noise(40, 1.0, 22);
  for (double k : {-3.0, 0.5, 10.0}) {
    const auto a = fit_linear(X, y);
    const auto b = fit_linear(X, Vector(k * y));
    CHECK((b.beta - k * a.beta).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(b.sigma2 - k * k * a.sigma2) < 1e-9);
    CHECK((b.cov - k * k * a.cov).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("duplicated row equals a weighted fit") {
  const Matrix X = random_design(30, 3, 31);
  const Vector y = X * Vector::LinSpaced(3, 1, 3) + test::noise(30, 0.5, 32);
  Matrix Xd(31, 3);
  Xd << X, X.row(4);
  Vector yd(31);
  yd << y, y(4);
  Vector w = Vector::Ones(30);
  w(4) = 2.0;
  const Vector oracle = (X.transpose() * w.asDiagonal() * X).ldlt().solve(X.transpose() * w.asDiagonal() * y);
  CHECK((fit_linear(Xd, yd).beta - oracle).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("exact responses are recovered for any full-rank design") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix X = random_design(12 + seed, 4, 100 + seed);
    const Vector b = test::noise(4, 2.0, 200 + seed);
    const auto fit = fit_linear(X, Vector(X * b));
    CHECK((fit.beta - b).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(fit.sigma2 <= 1e-18);
  }
}

TEST_CASE("shape and rank errors") {
  Matrix X = random_design(10, 2, 1);
  CHECK_THROWS_AS(fit_linear(X, Vector::Zero(9)), Error);
  try {
    fit_linear(Matrix::Ones(2, 2), Vector::Zero(2));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientRows);
  }
  Matrix collinear(10, 3);
  collinear << X, 2.0 * X.col(1);
  try {
    fit_linear(collinear, Vector::Zero(10));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RankDeficient);
  }
  Matrix bad = X;
  bad(3, 1) = std::nan("");
  CHECK_THROWS_AS(DesignMatrix{bad}, Error);
}

TEST_CASE("design matrix names and row selection") {
  DesignMatrix d(random_design(5, 3, 2), {"intercept", "a", "b"});
  CHECK(d.column_index("b") == 2);
  CHECK_THROWS_AS(d.column_index("zz"), Error);
  const auto s = d.select_rows({4, 4, 0});
  CHECK(s.rows() == 3);
  CHECK(s.values()(1, 2) == d.values()(4, 2));
  CHECK(s.column_names() == d.column_names());
  CHECK(DesignMatrix(Matrix::Ones(2, 2)).column_names() == std::vector<std::string>{"c0", "c1"});
}
