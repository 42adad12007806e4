#pragma once

#include "metabench/error.hpp"
#include "metabench/models/forest.hpp"
#include "metabench/models/hyperparams.hpp"
#include "metabench/models/logistic.hpp"
#include "metabench/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace metabench {

struct GbdtParams {
  std::size_t n_rounds = 100;
  double eta = 0.3;
  double lambda = 1.0;
  double gamma = 0.0;
  std::size_t max_depth = 6;

  static GbdtParams from(const Hyperparams& h) {
    check_hyperparam_names(ModelFamily::Gbdt, h);
    GbdtParams p;
    p.n_rounds = hp::count(h, "n_rounds", p.n_rounds);
    p.eta = hp::number(h, "eta", p.eta);
    p.lambda = hp::number(h, "lambda", p.lambda);
    p.gamma = hp::number(h, "gamma", p.gamma);
    p.max_depth = hp::depth(h, "max_depth", p.max_depth);
    if (!(p.eta > 0.0 && p.eta <= 1.0)) throw Error(ErrorCode::InvalidSpec, "eta must be in (0, 1]");
    if (!(p.lambda >= 0.0)) throw Error(ErrorCode::InvalidSpec, "lambda must be >= 0");
    if (!(p.gamma >= 0.0)) throw Error(ErrorCode::InvalidSpec, "gamma must be >= 0");
    return p;
  }
};

struct GbdtModel {
  double base_margin = 0.0;
  double eta = 0.3;
  std::vector<DecisionTree> trees;
  // Set when training saw a single class; scores are then that constant.
  bool constant = false;
  double constant_score = 0.0;

  // Scores using only the first `rounds` trees.
  Vector scores(const Matrix& X, std::size_t rounds) const {
    Vector s(X.rows());
    if (constant) return s.setConstant(constant_score);
    rounds = std::min(rounds, trees.size());
    for (Index i = 0; i < X.rows(); ++i) {
      const auto row = X.row(i);
      double m = base_margin;
      for (std::size_t t = 0; t < rounds; ++t) m += eta * trees[t].predict(row);
      s[i] = sigmoid(m);
    }
    return s;
  }

  Vector scores(const Matrix& X) const { return scores(X, trees.size()); }
};

namespace detail {

// Second-order (Newton) regression tree grown level by level with exact
// greedy splits. Each level costs one pass over every presorted feature.
class BoostTreeBuilder {
 public:
  BoostTreeBuilder(const Matrix& X, const GbdtParams& params) : X_(X), params_(params) {
    const auto n = static_cast<std::size_t>(X.rows());
    sorted_.resize(static_cast<std::size_t>(X.cols()));
    for (Index f = 0; f < X.cols(); ++f) {
      auto& order = sorted_[static_cast<std::size_t>(f)];
      order.resize(n);
      std::iota(order.begin(), order.end(), 0u);
      std::stable_sort(order.begin(), order.end(), [&](unsigned a, unsigned b) { return X(a, f) < X(b, f); });
    }
  }

  DecisionTree build(const std::vector<double>& g, const std::vector<double>& h) const {
    const auto n = g.size();
    DecisionTree tree;
    tree.nodes.emplace_back();
    std::vector<int> node_of(n, 0);
    struct Stat {
      double G = 0, H = 0;
    };
    std::vector<Stat> stats(1);
    for (std::size_t i = 0; i < n; ++i) stats[0].G += g[i], stats[0].H += h[i];
    std::vector<int> active{0};

    for (std::size_t depth = 0; depth < params_.max_depth && !active.empty(); ++depth) {
      std::vector<int> slot(tree.nodes.size(), -1);
      for (std::size_t s = 0; s < active.size(); ++s) slot[active[s]] = static_cast<int>(s);
      struct Best {
        double gain = 0.0;
        int feature = -1;
        double threshold = 0.0;
      };
      std::vector<Best> best(active.size());
      struct Acc {
        double GL = 0, HL = 0, last = 0;
        bool any = false;
      };
      std::vector<Acc> acc(active.size());
      for (std::size_t f = 0; f < sorted_.size(); ++f) {
        std::fill(acc.begin(), acc.end(), Acc{});
        for (unsigned i : sorted_[f]) {
          const int nd = node_of[i];
          if (nd < 0 || slot[nd] < 0) continue;
          const int s = slot[nd];
          const double x = X_(i, static_cast<Index>(f));
          Acc& a = acc[s];
          if (a.any && x != a.last) {
            const Stat& tot = stats[nd];
            const double GR = tot.G - a.GL, HR = tot.H - a.HL;
            const double gain = 0.5 * (a.GL * a.GL / (a.HL + params_.lambda) + GR * GR / (HR + params_.lambda) -
                                       tot.G * tot.G / (tot.H + params_.lambda)) -
                                params_.gamma;
            if (gain > best[s].gain) {
              double thr = 0.5 * (a.last + x);
              if (!(thr < x)) thr = a.last;
              best[s] = {gain, static_cast<int>(f), thr};
            }
          }
          a.GL += g[i];
          a.HL += h[i];
          a.last = x;
          a.any = true;
        }
      }

      std::vector<int> next;
      for (std::size_t s = 0; s < active.size(); ++s) {
        if (best[s].feature < 0) continue;
        const int nd = active[s];
        const int l = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        stats.resize(tree.nodes.size());
        tree.nodes[nd].feature = best[s].feature;
        tree.nodes[nd].threshold = best[s].threshold;
        tree.nodes[nd].left = l;
        tree.nodes[nd].right = l + 1;
        next.push_back(l);
        next.push_back(l + 1);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const int nd = node_of[i];
        if (nd < 0 || tree.nodes[nd].feature < 0) continue;
        const auto& node = tree.nodes[nd];
        const int child = X_(static_cast<Index>(i), node.feature) <= node.threshold ? node.left : node.right;
        node_of[i] = child;
        stats[child].G += g[i];
        stats[child].H += h[i];
      }
      active = std::move(next);
    }
    for (std::size_t k = 0; k < tree.nodes.size(); ++k)
      if (tree.nodes[k].feature < 0) tree.nodes[k].value = -stats[k].G / (stats[k].H + params_.lambda);
    return tree;
  }

 private:
  const Matrix& X_;
  const GbdtParams& params_;
  std::vector<std::vector<unsigned>> sorted_;
};

}  // namespace detail

inline GbdtModel fit_gbdt(const Matrix& X, const Labels& y, const GbdtParams& params) {
  if (!X.allFinite()) throw Error(ErrorCode::NonFinite, "GBDT input contains non-finite values");
  const auto n = y.size();
  GbdtModel model;
  model.eta = params.eta;
  const double prior = static_cast<double>(std::count(y.begin(), y.end(), 1)) / static_cast<double>(n);
  if (prior == 0.0 || prior == 1.0) {
    model.constant = true;
    model.constant_score = prior;
    return model;
  }
  model.base_margin = std::log(prior / (1.0 - prior));
  detail::BoostTreeBuilder builder(X, params);
  std::vector<double> margin(n, model.base_margin), g(n), h(n);
  for (std::size_t round = 0; round < params.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      g[i] = p - y[i];
      h[i] = p * (1.0 - p);
    }
    DecisionTree tree = builder.build(g, h);
    for (std::size_t i = 0; i < n; ++i) margin[i] += params.eta * tree.predict(X.row(static_cast<Index>(i)));
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace metabench
