#pragma once

#include "metabench/error.hpp"
#include "metabench/models/hyperparams.hpp"
#include "metabench/random.hpp"
#include "metabench/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace metabench {

// Flat binary tree. Internal nodes send x[feature] <= threshold left.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf prediction (class-1 fraction or boosting weight)
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  template <typename Row>
  double predict(const Row& x) const {
    int n = 0;
    while (nodes[n].feature >= 0) n = x[nodes[n].feature] <= nodes[n].threshold ? nodes[n].left : nodes[n].right;
    return nodes[n].value;
  }

  std::size_t depth() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      best = std::max(best, d[i]);
      if (nodes[i].feature >= 0) d[nodes[i].left] = d[nodes[i].right] = d[i] + 1;
    }
    return best;
  }
};

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_leaf = 1;
  std::size_t mtry = 0;       // 0 = floor(sqrt(p))
  bool bootstrap = true;

  static ForestParams from(const Hyperparams& h) {
    check_hyperparam_names(ModelFamily::RandomForest, h);
    ForestParams p;
    p.n_trees = hp::count(h, "n_trees", p.n_trees);
    p.max_depth = hp::depth(h, "max_depth", p.max_depth);
    p.min_leaf = hp::count(h, "min_leaf", p.min_leaf);
    p.mtry = hp::count(h, "mtry", p.mtry);
    p.bootstrap = hp::flag(h, "bootstrap", p.bootstrap);
    if (p.n_trees < 1) throw Error(ErrorCode::InvalidSpec, "n_trees must be >= 1");
    if (p.min_leaf < 1) throw Error(ErrorCode::InvalidSpec, "min_leaf must be >= 1");
    return p;
  }
};

namespace detail {

inline double gini(double n0, double n1) {
  const double n = n0 + n1;
  if (n <= 0.0) return 0.0;
  const double p0 = n0 / n, p1 = n1 / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

// CART on Gini impurity over a (possibly repeated) list of row indices.
class CartBuilder {
 public:
  CartBuilder(const Matrix& X, const Labels& y, const ForestParams& params, std::size_t mtry, Rng& rng)
      : X_(X), y_(y), params_(params), mtry_(mtry), rng_(rng), features_(static_cast<std::size_t>(X.cols())) {
    for (std::size_t j = 0; j < features_.size(); ++j) features_[j] = static_cast<int>(j);
  }

  DecisionTree build(std::vector<std::size_t> rows) {
    DecisionTree tree;
    tree.nodes.emplace_back();
    grow(tree, 0, rows, 0);
    return tree;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
  };

  void grow(DecisionTree& tree, int node, std::vector<std::size_t>& rows, std::size_t depth) {
    double n1 = 0;
    for (auto r : rows) n1 += y_[r];
    const auto n = static_cast<double>(rows.size());
    tree.nodes[node].value = n > 0 ? n1 / n : 0.0;
    const bool pure = n1 == 0.0 || n1 == n;
    const bool depth_capped = params_.max_depth != 0 && depth >= params_.max_depth;
    if (pure || depth_capped || rows.size() < 2 * params_.min_leaf) return;

    const Split split = best_split(rows);
    if (split.feature < 0) return;

    std::vector<std::size_t> left, right;
    for (auto r : rows) (X_(static_cast<Index>(r), split.feature) <= split.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const int l = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    tree.nodes[node].feature = split.feature;
    tree.nodes[node].threshold = split.threshold;
    tree.nodes[node].left = l;
    tree.nodes[node].right = l + 1;
    grow(tree, l, left, depth + 1);
    grow(tree, l + 1, right, depth + 1);
  }

  // Evaluates mtry random features; keeps drawing beyond mtry only while no
  // feature has produced a valid split.
  Split best_split(const std::vector<std::size_t>& rows) {
    Split best;
    const std::size_t p = features_.size();
    std::vector<std::pair<double, int>> column(rows.size());
    double total1 = 0;
    for (auto r : rows) total1 += y_[r];
    const auto n = static_cast<double>(rows.size());
    for (std::size_t drawn = 0; drawn < p; ++drawn) {
      if (drawn >= mtry_ && best.feature >= 0) break;
      const auto pick = drawn + static_cast<std::size_t>(rng_.below(p - drawn));
      std::swap(features_[drawn], features_[pick]);
      const int f = features_[drawn];
      for (std::size_t i = 0; i < rows.size(); ++i)
        column[i] = {X_(static_cast<Index>(rows[i]), f), y_[rows[i]]};
      std::sort(column.begin(), column.end());
      double left0 = 0, left1 = 0;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        (column[i].second == 1 ? left1 : left0) += 1;
        if (column[i].first == column[i + 1].first) continue;
        const double nl = left0 + left1;
        const double nr = n - nl;
        if (nl < static_cast<double>(params_.min_leaf) || nr < static_cast<double>(params_.min_leaf)) continue;
        const double right1 = total1 - left1;
        const double right0 = nr - right1;
        const double impurity = (nl * gini(left0, left1) + nr * gini(right0, right1)) / n;
        if (impurity < best.impurity) {
          best.impurity = impurity;
          best.feature = f;
          best.threshold = 0.5 * (column[i].first + column[i + 1].first);
          // Midpoint can round onto the upper value for adjacent doubles.
          if (!(best.threshold < column[i + 1].first)) best.threshold = column[i].first;
        }
      }
    }
    return best;
  }

  const Matrix& X_;
  const Labels& y_;
  const ForestParams& params_;
  std::size_t mtry_;
  Rng& rng_;
  std::vector<int> features_;
};

}  // namespace detail

struct ForestModel {
  std::vector<DecisionTree> trees;

  Vector scores(const Matrix& X) const {
    Vector s = Vector::Zero(X.rows());
    for (Index i = 0; i < X.rows(); ++i) {
      const auto row = X.row(i);
      double acc = 0.0;
      for (const auto& t : trees) acc += t.predict(row);
      s[i] = acc / static_cast<double>(trees.size());
    }
    return s;
  }
};

inline ForestModel fit_random_forest(const Matrix& X, const Labels& y, const ForestParams& params,
                                     std::uint64_t seed) {
  if (!X.allFinite()) throw Error(ErrorCode::NonFinite, "random forest input contains non-finite values");
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  std::size_t mtry = params.mtry == 0 ? static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p))))
                                      : params.mtry;
  mtry = std::clamp<std::size_t>(mtry, 1, std::max<std::size_t>(p, 1));
  ForestModel model;
  model.trees.reserve(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(seed, {stream::tree, t}));
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = params.bootstrap ? static_cast<std::size_t>(rng.below(n)) : i;
    detail::CartBuilder builder(X, y, params, mtry, rng);
    model.trees.push_back(builder.build(std::move(rows)));
  }
  return model;
}

}  // namespace metabench
