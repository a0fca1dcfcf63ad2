#include "helpers.hpp"

#include "ipd/error.hpp"
#include "ipd/ppi.hpp"
#include "ipd/sim.hpp"

#include <doctest.h>

#include <cmath>

using namespace ipd;
using test::random_design;

TEST_CASE("rectifier vanishes for perfect predictions") {
  const Matrix X = random_design(40, 3, 1);
  const Vector y = X * Vector::Ones(3) + test::noise(40, 1.0, 2);
  const auto r = rectifier(test::labeled(X, y, y));
  CHECK(r.delta.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(r.d_scalar < 1e-24);
}

TEST_CASE("constant offset on an intercept-only design") {
  const Matrix X = Matrix::Ones(10, 1);
  const Vector y = test::noise(10, 1.0, 3);
  const auto r = rectifier(test::labeled(X, y, Vector(y.array() + 3.0)));
  CHECK(std::abs(r.delta(0) - 3.0) < 1e-12);
  CHECK(r.d_scalar < 1e-24);
}

TEST_CASE("rectifier is the difference of two fits") {
  const Matrix X = random_design(100, 2, 11);
  const Vector y = X * Vector::Ones(2) + test::noise(100, 1.0, 12);
  const Vector yhat = 0.7 * y + test::noise(100, 0.4, 13);
  const auto r = rectifier(test::labeled(X, y, yhat));
  const Vector oracle = test::normal_equations(X, yhat) - test::normal_equations(X, y);
  CHECK((r.delta - oracle).cwiseAbs().maxCoeff() < 1e-10);
  const Vector e = (yhat - y) - X * oracle;
  CHECK(std::abs(r.d_scalar - e.squaredNorm() / 98.0) < 1e-12);
}

TEST_CASE("gamma selection limits") {
  // Perfect model: the objective is flat, ties go to the larger gamma.
  CHECK(select_gamma(0.01, 0.0, 0.0) == 1.0);
  // Large bias, cheap correction.
  CHECK(select_gamma(0.01, 1e-6, 5.0) == 1.0);
  // Noisy correction, no bias.
  CHECK(select_gamma(0.01, 1.0, 1e-4) <= 0.01);

  const Matrix X = random_design(60, 2, 5);
  const Vector y = X * Vector::Ones(2) + test::noise(60, 1.0, 6);
  const Matrix Xu = random_design(80, 2, 7);
  CHECK(select_gamma(test::labeled(X, y, y), test::unlabeled(Xu, Xu * Vector::Ones(2)), 1) == 1.0);
}

TEST_CASE("gamma matches a direct grid evaluation") {
  Rng rng(9);
  std::uniform_real_distribution<double> u(-3.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double vu = std::pow(10.0, u(rng)), vd = std::pow(10.0, u(rng)), d = std::pow(10.0, u(rng) / 2);
    double best = 0.0, best_val = INFINITY;
    for (int k = 100; k >= 0; --k) {
      const double g = k * kGammaStep;
      const double val = vu + g * g * vd + d * d * (1 - g) * (1 - g);
      if (val < best_val) {
        best_val = val;
        best = g;
      }
    }
    CHECK(select_gamma(vu, vd, d) == best);
  }
}

TEST_CASE("noiseless linear truth is recovered exactly") {
  Vector b(3);
  b << 1.0, -2.0, 0.5;
  const Matrix Xl = random_design(30, 3, 1), Xu = random_design(30, 3, 2);
  const Vector yl = Xl * b;
  const auto f = ppi_fit(test::labeled(Xl, yl, yl), test::unlabeled(Xu, Xu * b), 1);
  CHECK((f.beta_rec - b).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(f.var_ambiguity == doctest::Approx(0.0));
}

TEST_CASE("constant bias is removed from the intercept at gamma one") {
  test::LinearWorld world{Vector::Ones(2), 0.3, 1.7, 0.0};
  const auto p = world.point(0.0, 50, 70, 4);
  const auto f = ppi_fit(p.lab, p.unlab, 1, 1.0);
  const Vector naive = test::normal_equations(p.unlab.X.values(), p.unlab.yhat);
  const Vector delta = test::normal_equations(p.lab.X.values(), p.lab.yhat) -
                       test::normal_equations(p.lab.X.values(), p.lab.y);
  CHECK(std::abs(delta(0) - 1.7) < 1e-9);
  CHECK(std::abs(f.beta_rec(0) - (naive(0) - 1.7)) < 1e-9);
}

TEST_CASE("rectified estimate identity and gamma properties") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    test::LinearWorld world{test::noise(3, 1.0, 500 + seed), 0.5, 0.3, 0.4};
    const auto p = world.point(0.0, 25 + seed, 40, seed);
    double prev_amb = -1.0;
    for (double g : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0}) {
      const auto f = ppi_fit(p.lab, p.unlab, 2, g);
      CHECK((f.beta_rec - (f.beta_naive - g * f.rectifier)).cwiseAbs().maxCoeff() < 1e-12);
      if (g == 0.0) CHECK(f.var_ambiguity == 0.0);
      CHECK(f.var_ambiguity >= prev_amb);
      prev_amb = f.var_ambiguity;
    }
    const auto perfect = test::labeled(p.lab.X.values(), p.lab.y, p.lab.y);
    for (double g : {0.0, 0.5, 1.0}) {
      const auto f = ppi_fit(perfect, p.unlab, 1, g);
      CHECK(f.rectifier.cwiseAbs().maxCoeff() < 1e-12);
      CHECK((f.beta_rec - f.beta_naive).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("gamma one is consistent under a biased predictor") {
  // yhat = y + 0.5 + 0.4 x1 biases the naive slope by 0.4.
  std::vector<double> errors;
  for (std::size_t n : {100u, 1000u, 10000u}) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      test::LinearWorld world{Vector::Ones(2), 1.0, 0.5, 0.4};
      const auto p = world.point(0.0, n, n, 1000 * n + seed);
      total += std::abs(ppi_fit(p.lab, p.unlab, 1, 1.0).beta_rec(1) - 1.0);
    }
    errors.push_back(total / 10.0);
  }
  CHECK(errors[1] < errors[0]);
  CHECK(errors[2] < errors[1]);
  CHECK(errors[2] < 0.05);
}

TEST_CASE("interval coverage on the simulated drift process at t = 0") {
  const DriftDgp dgp;
  Rng train_rng(77);
  const auto train = generate(dgp, 0.0, 2000, train_rng);
  ForestTraining spec;
  spec.grid = {{50, 8, 5}};
  spec.folds = 2;
  const auto predictor = train_predictor(train, spec, 78, 1);

  int covered = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(1000 + seed);
    auto lab = generate(dgp, 0.0, 200, rng);
    lab.yhat = predictor->predict(lab.X);
    const auto u = generate(dgp, 0.0, 200, rng);
    const UnlabeledBatch unlab{u.X, predictor->predict(u.X)};
    const auto f = ppi_fit(lab, unlab, 1);
    if (std::abs(f.beta_rec(1) - 1.0) < 3.0 * std::sqrt(f.var_risk + f.var_ambiguity)) ++covered;
  }
  CHECK(covered >= 90);
}

TEST_CASE("ppi input validation") {
  const Matrix X = random_design(10, 2, 1);
  const Vector y = Vector::Zero(10);
  CHECK_THROWS_AS(ppi_fit(test::labeled(X, y, y), test::unlabeled(random_design(10, 3, 2), y), 0), Error);
  CHECK_THROWS_AS(ppi_fit(test::labeled(X, y, y), test::unlabeled(X, y), 5), Error);
  CHECK_THROWS_AS(ppi_fit(test::labeled(X, y, y), test::unlabeled(X, y), 0, 1.5), Error);
}
