#pragma once

#include "metabench/error.hpp"
#include "metabench/random.hpp"
#include "metabench/types.hpp"

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace metabench {

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::vector<std::size_t>> folds;  // each sorted ascending
  std::uint64_t seed = 0;

  std::size_t sample_count() const {
    std::size_t n = 0;
    for (const auto& f : folds) n += f.size();
    return n;
  }

  // Indices of every fold except `fold`, ascending.
  std::vector<std::size_t> training_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    out.reserve(sample_count() - folds[fold].size());
    for (std::size_t f = 0; f < folds.size(); ++f)
      if (f != fold) out.insert(out.end(), folds[f].begin(), folds[f].end());
    std::sort(out.begin(), out.end());
    return out;
  }

  friend bool operator==(const FoldPlan&, const FoldPlan&) = default;
};

// Each class's indices are shuffled with `seed` and dealt round-robin into k
// folds; the deal cursor carries over from class 0 to class 1, so per-class
// counts and overall fold sizes both differ by at most one.
inline FoldPlan stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidSpec, "k must be at least 2");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw Error(ErrorCode::BadLabel, "labels must be 0 or 1");
    by_class[labels[i]].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (!by_class[c].empty() && by_class[c].size() < k)
      throw Error(ErrorCode::TooFewPerClass, "class " + std::to_string(c) + " has " +
                                                 std::to_string(by_class[c].size()) + " members, fewer than k=" +
                                                 std::to_string(k));
  }
  if (labels.size() < k) throw Error(ErrorCode::TooFewPerClass, "fewer samples than folds");

  FoldPlan plan{k, std::vector<std::vector<std::size_t>>(k), seed};
  Rng rng(seed);
  std::size_t cursor = 0;
  for (auto& members : by_class) {
    rng.shuffle(members);
    for (std::size_t idx : members) {
      plan.folds[cursor].push_back(idx);
      cursor = (cursor + 1) % k;
    }
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

inline FoldPlan leave_one_out(std::size_t n) {
  FoldPlan plan{n, std::vector<std::vector<std::size_t>>(n), 0};
  for (std::size_t i = 0; i < n; ++i) plan.folds[i] = {i};
  return plan;
}

template <typename T>
std::vector<T> gather(std::span<const T> values, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(values[i]);
  return out;
}

inline Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(static_cast<Index>(idx.size()), m.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Index>(r)) = m.row(static_cast<Index>(idx[r]));
  return out;
}

}  // namespace metabench
