#pragma once

#include "ipd/glm.hpp"

#include <cstdint>
#include <vector>

namespace ipd {

struct ForestParams {
  std::size_t trees = 100;
  std::size_t max_depth = 8;
  std::size_t min_leaf = 5;
};

/// CART regression tree on squared error, stored as a flat node array.
class RegressionTree {
 public:
  /// Fits on the rows `sample` of X (duplicates allowed).
  void fit(const Matrix& X, const Vector& y, const std::vector<std::size_t>& sample, std::size_t max_depth,
           std::size_t min_leaf);
  /// x points at one row of features, contiguous.
  double predict(const double* x) const;
  /// Adds the predictions for `n` row-major rows of width `stride` to out.
  void accumulate(const double* rows, std::size_t n, std::size_t stride, double* out) const;
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t depth() const noexcept { return depth_; }

 private:
  // Leaves point to themselves, so every row takes exactly depth_ steps.
  struct Node {
    double threshold = 0.0;
    std::int32_t child[2] = {0, 0};  // [x <= threshold, x > threshold]
    std::int32_t feature = 0;
  };
  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::size_t depth_ = 0;
};

/// Bagged regression trees, each fit on a bootstrap sample of the rows.
class RegressionForest {
 public:
  RegressionForest() = default;
  RegressionForest(const Matrix& X, const Vector& y, const ForestParams& params, std::uint64_t seed,
                   unsigned threads = 0);

  Vector predict(const Matrix& X) const;
  /// Prediction of the first `k` trees only.
  Vector predict(const Matrix& X, std::size_t k) const;
  std::size_t size() const noexcept { return trees_.size(); }

 private:
  std::vector<RegressionTree> trees_;
};

struct CrossValidationResult {
  ForestParams best;
  std::vector<ForestParams> grid;
  std::vector<double> cv_mse;  // aligned with grid
};

/// trees {50, 100} x max depth {4, 8, 16} x min leaf {5, 10}.
std::vector<ForestParams> default_forest_grid();

/// K-fold cross-validated MSE for each grid entry; ties keep the earlier entry.
CrossValidationResult cross_validate_forest(const Matrix& X, const Vector& y, const std::vector<ForestParams>& grid,
                                            std::size_t folds, std::uint64_t seed, unsigned threads = 0);

}  // namespace ipd
