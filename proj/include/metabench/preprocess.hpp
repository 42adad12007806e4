#pragma once

#include "metabench/data.hpp"
#include "metabench/error.hpp"
#include "metabench/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string_view>
#include <vector>

namespace metabench {

// GLOBAL fits on the whole table before any split; FOLD_SAFE refits on each
// training split so test rows never influence the fitted statistics.
enum class PreprocessMode { Global, FoldSafe };

inline std::string_view to_string(PreprocessMode m) { return m == PreprocessMode::Global ? "global" : "fold-safe"; }

inline PreprocessMode parse_preprocess_mode(std::string_view s) {
  if (s == "global" || s == "GLOBAL") return PreprocessMode::Global;
  if (s == "fold-safe" || s == "fold_safe" || s == "FOLD_SAFE") return PreprocessMode::FoldSafe;
  throw Error(ErrorCode::Config, "unknown preprocessing mode '" + std::string(s) + "'");
}

struct PreprocessParams {
  std::vector<double> means;      // per-feature mean of log2 intensities
  std::vector<double> sds;        // per-feature sample SD (n-1) of log2 intensities
  std::vector<double> reference;  // per-rank mean of sorted standardized rows
  std::size_t fitted_on = 0;
};

inline Matrix log2_matrix(const Matrix& raw) {
  Matrix out(raw.rows(), raw.cols());
  for (Index i = 0; i < raw.rows(); ++i)
    for (Index j = 0; j < raw.cols(); ++j) out(i, j) = std::log2(raw(i, j));
  return out;
}

// x_hat = (log2 x - mean) / sd per feature; sd == 0 maps to 0.
inline Matrix standardize(const PreprocessParams& params, const Matrix& raw) {
  if (static_cast<std::size_t>(raw.cols()) != params.means.size())
    throw Error(ErrorCode::ShapeMismatch, "feature count differs from fitted parameters");
  Matrix out(raw.rows(), raw.cols());
  for (Index i = 0; i < raw.rows(); ++i) {
    for (Index j = 0; j < raw.cols(); ++j) {
      const double sd = params.sds[j];
      out(i, j) = sd > 0.0 ? (std::log2(raw(i, j)) - params.means[j]) / sd : 0.0;
    }
  }
  return out;
}

// Mean over rows of each row's sorted values.
inline std::vector<double> fit_quantile_reference(const Matrix& rows) {
  const auto n = rows.rows();
  const auto p = rows.cols();
  std::vector<double> sum(static_cast<std::size_t>(p), 0.0);
  std::vector<double> sorted(static_cast<std::size_t>(p));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) sorted[j] = rows(i, j);
    std::sort(sorted.begin(), sorted.end());
    for (Index j = 0; j < p; ++j) sum[j] += sorted[j];
  }
  for (auto& s : sum) s /= static_cast<double>(n);
  return sum;
}

// Replaces the r-th smallest value of each row by reference[r]; a run of tied
// values gets the mean of the reference entries it spans.
inline Matrix apply_quantile_reference(const std::vector<double>& reference, const Matrix& rows) {
  const auto p = rows.cols();
  if (static_cast<std::size_t>(p) != reference.size())
    throw Error(ErrorCode::ShapeMismatch, "row length differs from quantile reference");
  Matrix out(rows.rows(), p);
  std::vector<Index> order(static_cast<std::size_t>(p));
  for (Index i = 0; i < rows.rows(); ++i) {
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return rows(i, a) < rows(i, b); });
    Index r = 0;
    while (r < p) {
      Index end = r + 1;
      while (end < p && rows(i, order[end]) == rows(i, order[r])) ++end;
      double value = reference[r];
      if (end - r > 1) {
        double s = 0.0;
        for (Index t = r; t < end; ++t) s += reference[t];
        value = s / static_cast<double>(end - r);
      }
      for (Index t = r; t < end; ++t) out(i, order[t]) = value;
      r = end;
    }
  }
  return out;
}

inline PreprocessParams fit_preprocessor(const Matrix& raw) {
  if (raw.rows() == 0 || raw.cols() == 0) throw Error(ErrorCode::EmptyTable, "cannot fit on an empty table");
  const Matrix logs = log2_matrix(raw);
  const auto n = logs.rows();
  PreprocessParams params;
  params.fitted_on = static_cast<std::size_t>(n);
  params.means.resize(static_cast<std::size_t>(logs.cols()));
  params.sds.resize(static_cast<std::size_t>(logs.cols()));
  for (Index j = 0; j < logs.cols(); ++j) {
    double mean = 0.0;
    for (Index i = 0; i < n; ++i) mean += logs(i, j);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (Index i = 0; i < n; ++i) ss += (logs(i, j) - mean) * (logs(i, j) - mean);
    params.means[j] = mean;
    params.sds[j] = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  }
  params.reference = fit_quantile_reference(standardize(params, raw));
  return params;
}

inline PreprocessParams fit_preprocessor(const MetaboliteTable& train) { return fit_preprocessor(train.values()); }

inline Matrix transform(const PreprocessParams& params, const Matrix& raw) {
  return apply_quantile_reference(params.reference, standardize(params, raw));
}

inline Matrix transform(const PreprocessParams& params, const MetaboliteTable& table) {
  return transform(params, table.values());
}

inline Matrix preprocess_global(const Matrix& raw) { return transform(fit_preprocessor(raw), raw); }

inline Matrix preprocess_global(const MetaboliteTable& table) { return preprocess_global(table.values()); }

}  // namespace metabench
