#include "ipd/forest.hpp"

#include "ipd/error.hpp"
#include "ipd/parallel.hpp"
#include "ipd/random.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <utility>

namespace ipd {

namespace {

// Per-fit working state. Every feature keeps its own ordering of the sample;
// a node owns the same segment [begin, end) in each ordering, so splitting
// only needs a stable partition of that segment.
struct TreeBuilder {
  Matrix xs;
  Vector ys;
  std::vector<std::vector<std::int32_t>> order;
  std::vector<std::int32_t> scratch;
  std::vector<char> goes_left;
  std::size_t max_depth = 0;
  std::size_t min_leaf = 1;
};

}  // namespace

void RegressionTree::fit(const Matrix& X, const Vector& y, const std::vector<std::size_t>& sample,
                         std::size_t max_depth, std::size_t min_leaf) {
  if (sample.empty()) fail(ErrorKind::InvalidArgument, "tree needs at least one row");
  const auto n = static_cast<Eigen::Index>(sample.size());
  const Eigen::Index p = X.cols();

  TreeBuilder b;
  b.xs = gather_rows(X, sample);
  b.ys = gather(y, sample);
  b.max_depth = max_depth;
  b.min_leaf = std::max<std::size_t>(1, min_leaf);
  b.order.resize(static_cast<std::size_t>(p));
  for (Eigen::Index f = 0; f < p; ++f) {
    auto& o = b.order[static_cast<std::size_t>(f)];
    o.resize(static_cast<std::size_t>(n));
    std::iota(o.begin(), o.end(), 0);
    std::stable_sort(o.begin(), o.end(), [&](std::int32_t a, std::int32_t c) { return b.xs(a, f) < b.xs(c, f); });
  }
  b.scratch.resize(static_cast<std::size_t>(n));
  b.goes_left.assign(static_cast<std::size_t>(n), 0);
  nodes_.clear();
  values_.clear();
  depth_ = 0;

  auto build = [&](auto&& self, std::size_t begin, std::size_t end, std::size_t depth) -> std::int32_t {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({0.0, {id, id}, 0});
    values_.push_back(0.0);
    depth_ = std::max(depth_, depth);
    const auto& seg = b.order[0];
    const std::size_t count = end - begin;
    double sum = 0.0, lo = b.ys(seg[begin]), hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = b.ys(seg[i]);
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    values_[static_cast<std::size_t>(id)] = sum / static_cast<double>(count);
    if (depth >= b.max_depth || count < 2 * b.min_leaf || !(hi > lo)) return id;

    const double base = sum * sum / static_cast<double>(count);
    double best_gain = 0.0;
    int best_f = -1;
    std::size_t best_cut = 0;
    double best_threshold = 0.0;
    for (Eigen::Index f = 0; f < p; ++f) {
      const auto& o = b.order[static_cast<std::size_t>(f)];
      double left = 0.0;
      for (std::size_t i = begin; i + 1 < end; ++i) {
        left += b.ys(o[i]);
        const std::size_t nl = i + 1 - begin;
        const std::size_t nr = count - nl;
        if (nl < b.min_leaf) continue;
        if (nr < b.min_leaf) break;
        const double xa = b.xs(o[i], f), xb = b.xs(o[i + 1], f);
        if (!(xa < xb)) continue;
        const double right = sum - left;
        const double gain = left * left / static_cast<double>(nl) + right * right / static_cast<double>(nr) - base;
        if (gain > best_gain) {
          best_gain = gain;
          best_f = static_cast<int>(f);
          best_cut = nl;
          best_threshold = 0.5 * (xa + xb);
        }
      }
    }
    if (best_f < 0) return id;

    const auto& split_order = b.order[static_cast<std::size_t>(best_f)];
    for (std::size_t i = begin; i < end; ++i) b.goes_left[static_cast<std::size_t>(split_order[i])] = i < begin + best_cut;
    for (auto& o : b.order) {
      std::size_t l = begin, r = 0;
      for (std::size_t i = begin; i < end; ++i) {
        if (b.goes_left[static_cast<std::size_t>(o[i])])
          o[l++] = o[i];
        else
          b.scratch[r++] = o[i];
      }
      std::copy(b.scratch.begin(), b.scratch.begin() + static_cast<std::ptrdiff_t>(r), o.begin() + static_cast<std::ptrdiff_t>(l));
    }

    const std::size_t mid = begin + best_cut;
    const std::int32_t left_id = self(self, begin, mid, depth + 1);
    const std::int32_t right_id = self(self, mid, end, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = best_f;
    node.threshold = best_threshold;
    node.child[0] = left_id;
    node.child[1] = right_id;
    return id;
  };
  build(build, 0, static_cast<std::size_t>(n), 0);
}

double RegressionTree::predict(const double* x) const {
  const Node* nodes = nodes_.data();
  std::int32_t at = 0;
  for (std::size_t s = 0; s < depth_; ++s) {
    const Node& node = nodes[at];
    at = node.child[x[node.feature] > node.threshold];
  }
  return values_[static_cast<std::size_t>(at)];
}

void RegressionTree::accumulate(const double* rows, std::size_t n, std::size_t stride, double* out) const {
  // Rows advance in lockstep blocks so the dependent node loads of
  // different rows overlap.
  constexpr std::size_t kBlock = 8;
  const Node* nodes = nodes_.data();
  std::size_t i = 0;
  for (; i + kBlock <= n; i += kBlock) {
    std::int32_t at[kBlock] = {};
    for (std::size_t s = 0; s < depth_; ++s)
      for (std::size_t j = 0; j < kBlock; ++j) {
        const Node& node = nodes[at[j]];
        at[j] = node.child[rows[(i + j) * stride + static_cast<std::size_t>(node.feature)] > node.threshold];
      }
    for (std::size_t j = 0; j < kBlock; ++j) out[i + j] += values_[static_cast<std::size_t>(at[j])];
  }
  for (; i < n; ++i) out[i] += predict(rows + i * stride);
}

RegressionForest::RegressionForest(const Matrix& X, const Vector& y, const ForestParams& params, std::uint64_t seed,
                                   unsigned threads) {
  if (X.rows() != y.size()) fail(ErrorKind::DimensionMismatch, "forest: X and y row counts differ");
  if (X.rows() < 1 || params.trees < 1) fail(ErrorKind::InvalidArgument, "forest needs rows and at least one tree");
  const auto n = static_cast<std::size_t>(X.rows());
  trees_.resize(params.trees);
  parallel_for(params.trees, threads, [&](std::size_t t) {
    Rng rng(derive_seed(seed, {t}));
    trees_[t].fit(X, y, resample_indices(n, n, rng), params.max_depth, params.min_leaf);
  });
}

Vector RegressionForest::predict(const Matrix& X) const { return predict(X, trees_.size()); }

Vector RegressionForest::predict(const Matrix& X, std::size_t k) const {
  k = std::min(k, trees_.size());
  if (k == 0) fail(ErrorKind::InvalidArgument, "forest has no trees");
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = X;
  Vector out = Vector::Zero(X.rows());
  const auto n = static_cast<std::size_t>(X.rows());
  const auto stride = static_cast<std::size_t>(X.cols());
  for (std::size_t t = 0; t < k; ++t) trees_[t].accumulate(rows.data(), n, stride, out.data());
  return out / static_cast<double>(k);
}

std::vector<ForestParams> default_forest_grid() {
  std::vector<ForestParams> grid;
  for (std::size_t trees : {50, 100})
    for (std::size_t depth : {4, 8, 16})
      for (std::size_t leaf : {5, 10}) grid.push_back({trees, depth, leaf});
  return grid;
}

CrossValidationResult cross_validate_forest(const Matrix& X, const Vector& y, const std::vector<ForestParams>& grid,
                                            std::size_t folds, std::uint64_t seed, unsigned threads) {
  if (grid.empty()) fail(ErrorKind::InvalidArgument, "empty forest grid");
  const auto n = static_cast<std::size_t>(X.rows());
  if (folds < 2 || folds > n) fail(ErrorKind::InvalidArgument, "fold count must lie in [2, rows]");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, StreamTag::CrossValidation));
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(perm[i], perm[pick(rng)]);
  }
  std::vector<std::size_t> fold_of(n);
  for (std::size_t i = 0; i < n; ++i) fold_of[perm[i]] = i % folds;

  // Entries differing only in tree count share one forest per fold: the
  // smaller ensemble is a prefix of the larger one.
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> group_trees;
  for (const auto& g : grid) {
    auto& t = group_trees[{g.max_depth, g.min_leaf}];
    t = std::max(t, g.trees);
  }
  struct Task {
    std::size_t depth, leaf, trees, fold;
  };
  std::vector<Task> tasks;
  for (const auto& [key, trees] : group_trees)
    for (std::size_t k = 0; k < folds; ++k) tasks.push_back({key.first, key.second, trees, k});

  // Squared error sums per task and per tree-count prefix.
  std::vector<std::map<std::size_t, double>> sse(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    const Task& task = tasks[i];
    std::vector<std::size_t> train, test;
    for (std::size_t r = 0; r < n; ++r) (fold_of[r] == task.fold ? test : train).push_back(r);
    const RegressionForest forest(gather_rows(X, train), gather(y, train), {task.trees, task.depth, task.leaf},
                                  derive_seed(seed, StreamTag::Forest, {task.fold, task.depth, task.leaf}), 1);
    const Matrix Xt = gather_rows(X, test);
    const Vector yt = gather(y, test);
    for (const auto& g : grid) {
      if (g.max_depth != task.depth || g.min_leaf != task.leaf || sse[i].count(g.trees)) continue;
      sse[i][g.trees] = (forest.predict(Xt, g.trees) - yt).squaredNorm();
    }
  });

  CrossValidationResult out;
  out.grid = grid;
  for (const auto& g : grid) {
    double total = 0.0;
    for (std::size_t i = 0; i < tasks.size(); ++i)
      if (tasks[i].depth == g.max_depth && tasks[i].leaf == g.min_leaf) total += sse[i].at(g.trees);
    out.cv_mse.push_back(total / static_cast<double>(n));
  }
  const auto best = std::min_element(out.cv_mse.begin(), out.cv_mse.end()) - out.cv_mse.begin();
  out.best = grid[static_cast<std::size_t>(best)];
  return out;
}

}  // namespace ipd
