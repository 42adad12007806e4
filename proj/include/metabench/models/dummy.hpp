#pragma once

#include "metabench/random.hpp"
#include "metabench/types.hpp"

#include <algorithm>
#include <cstdint>

namespace metabench {

// Input-ignoring baselines. most_frequent: modal training class (ties go to
// class 1) with the class-1 prior as the constant score. uniform: a fair
// seeded coin per query with constant score 0.5.
struct DummyModel {
  bool uniform = false;
  double prior = 0.5;
  int majority = 1;
  std::uint64_t seed = 0;

  Vector scores(const Matrix& X) const { return Vector::Constant(X.rows(), uniform ? 0.5 : prior); }

  Labels labels(const Matrix& X) const {
    Labels out(static_cast<std::size_t>(X.rows()), majority);
    if (uniform) {
      Rng rng(derive_seed(seed, {stream::query}));
      for (auto& v : out) v = static_cast<int>(rng.next() >> 63);
    }
    return out;
  }
};

inline DummyModel fit_dummy(const Labels& y, bool uniform, std::uint64_t seed) {
  const auto ones = static_cast<double>(std::count(y.begin(), y.end(), 1));
  const auto n = static_cast<double>(y.size());
  DummyModel m;
  m.uniform = uniform;
  m.prior = n > 0 ? ones / n : 0.5;
  m.majority = ones * 2.0 >= n ? 1 : 0;
  m.seed = seed;
  return m;
}

}  // namespace metabench
