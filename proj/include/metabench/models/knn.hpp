#pragma once

#include "metabench/error.hpp"
#include "metabench/models/hyperparams.hpp"
#include "metabench/types.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace metabench {

struct KnnParams {
  std::size_t k = 5;

  static KnnParams from(const Hyperparams& h) {
    check_hyperparam_names(ModelFamily::Knn, h);
    KnnParams p;
    p.k = hp::count(h, "k", p.k);
    if (p.k < 1) throw Error(ErrorCode::InvalidSpec, "k must be >= 1");
    return p;
  }
};

struct KnnModel {
  Matrix train;
  Labels labels;
  std::size_t k = 5;

  // Indices of the k nearest training rows; equal distances keep the lower
  // training index first.
  std::vector<std::size_t> neighbours(const auto& query) const {
    const auto n = static_cast<std::size_t>(train.rows());
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = (train.row(static_cast<Index>(i)) - query).squaredNorm();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto closer = [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), closer);
    idx.resize(k);
    return idx;
  }

  // Fraction of class 1 among the k nearest neighbours.
  Vector scores(const Matrix& X) const {
    Vector s(X.rows());
    for (Index q = 0; q < X.rows(); ++q) {
      std::size_t ones = 0;
      for (auto i : neighbours(X.row(q))) ones += labels[i] == 1;
      s[q] = static_cast<double>(ones) / static_cast<double>(k);
    }
    return s;
  }
};

inline KnnModel fit_knn(const Matrix& X, const Labels& y, const KnnParams& params) {
  if (!X.allFinite()) throw Error(ErrorCode::NonFinite, "k-NN input contains non-finite values");
  if (params.k > static_cast<std::size_t>(X.rows()))
    throw Error(ErrorCode::InvalidSpec, "k exceeds the number of training samples");
  return KnnModel{X, y, params.k};
}

}  // namespace metabench
