#pragma once

#include "metabench/error.hpp"
#include "metabench/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace metabench {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Class 1 is the positive (disease) class.
inline ConfusionCounts confusion(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size())
    throw Error(ErrorCode::LengthMismatch, "truth and prediction lengths differ");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) throw Error(ErrorCode::BadLabel, "labels must be 0 or 1");
    if (t == 1) (p == 1 ? c.tp : c.fn)++;
    else (p == 1 ? c.fp : c.tn)++;
  }
  return c;
}

// Each ratio is defined as 0 when its denominator is 0; callers that care
// check the matching *_undefined predicate.
inline bool specificity_undefined(const ConfusionCounts& c) { return c.tn + c.fp == 0; }
inline bool sensitivity_undefined(const ConfusionCounts& c) { return c.tp + c.fn == 0; }
inline bool precision_undefined(const ConfusionCounts& c) { return c.tp + c.fp == 0; }
inline bool mcc_undefined(const ConfusionCounts& c) {
  return c.tp + c.fp == 0 || c.tp + c.fn == 0 || c.tn + c.fp == 0 || c.tn + c.fn == 0;
}

inline double specificity(const ConfusionCounts& c) {
  return specificity_undefined(c) ? 0.0 : static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
}

inline double sensitivity(const ConfusionCounts& c) {
  return sensitivity_undefined(c) ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

inline double precision(const ConfusionCounts& c) {
  return precision_undefined(c) ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

inline double balanced_accuracy(const ConfusionCounts& c) { return (sensitivity(c) + specificity(c)) / 2.0; }

inline double mcc(const ConfusionCounts& c) {
  if (mcc_undefined(c)) return 0.0;
  const auto tp = static_cast<double>(c.tp);
  const auto tn = static_cast<double>(c.tn);
  const auto fp = static_cast<double>(c.fp);
  const auto fn = static_cast<double>(c.fn);
  return (tp * tn - fp * fn) / std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
}

inline double f1(const ConfusionCounts& c) {
  const double p = precision(c);
  const double r = sensitivity(c);
  if (precision_undefined(c) || p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

struct RocPoint {
  double fpr;
  double tpr;
  double threshold;
};

// ROC vertices from the highest threshold down, one per distinct score.
inline std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> truth) {
  if (scores.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  const auto pos = static_cast<double>(std::count(truth.begin(), truth.end(), 1));
  const auto neg = static_cast<double>(truth.size()) - pos;
  std::vector<RocPoint> pts{{0.0, 0.0, INFINITY}};
  double tp = 0, fp = 0;
  for (std::size_t r = 0; r < order.size();) {
    const double s = scores[order[r]];
    for (; r < order.size() && scores[order[r]] == s; ++r) (truth[order[r]] == 1 ? tp : fp) += 1;
    pts.push_back({neg > 0 ? fp / neg : 0.0, pos > 0 ? tp / pos : 0.0, s});
  }
  return pts;
}

struct AucResult {
  double value = 0.5;
  bool single_class = false;
};

// Trapezoidal area over the full threshold sweep. Accumulated in integer
// counts so the result equals the pairwise P(s+ > s-) + P(s+ = s-)/2.
inline AucResult roc_auc_checked(std::span<const double> scores, std::span<const int> truth) {
  if (scores.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "scores and labels differ in length");
  for (double s : scores)
    if (!std::isfinite(s)) throw Error(ErrorCode::NonFinite, "non-finite score");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  std::int64_t pos = 0, neg = 0;
  for (int t : truth) (t == 1 ? pos : neg)++;
  if (pos == 0 || neg == 0) return {0.5, true};
  std::int64_t tp = 0, fp = 0;
  double twice_area = 0.0;  // sum of dFP * (TP_prev + TP_new); exact in double
  for (std::size_t r = 0; r < order.size();) {
    const double s = scores[order[r]];
    std::int64_t dtp = 0, dfp = 0;
    for (; r < order.size() && scores[order[r]] == s; ++r) (truth[order[r]] == 1 ? dtp : dfp)++;
    twice_area += static_cast<double>(dfp * (2 * tp + dtp));
    tp += dtp;
    fp += dfp;
  }
  return {twice_area / (2.0 * static_cast<double>(pos) * static_cast<double>(neg)), false};
}

inline double roc_auc(std::span<const double> scores, std::span<const int> truth) {
  return roc_auc_checked(scores, truth).value;
}

struct DegenerateFlags {
  bool specificity = false;
  bool sensitivity = false;
  bool precision = false;
  bool mcc = false;
  bool auc = false;

  bool any() const { return specificity || sensitivity || precision || mcc || auc; }
  friend bool operator==(const DegenerateFlags&, const DegenerateFlags&) = default;
};

struct FoldMetrics {
  double auc = 0.0;
  double balanced_accuracy = 0.0;
  double mcc = 0.0;
  double specificity = 0.0;
  double sensitivity = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  DegenerateFlags degenerate;

  friend bool operator==(const FoldMetrics&, const FoldMetrics&) = default;
};

struct MetricField {
  std::string_view name;
  double FoldMetrics::*member;
};

inline constexpr std::array<MetricField, 7> kMetricFields{{
    {"auc", &FoldMetrics::auc},
    {"balanced_accuracy", &FoldMetrics::balanced_accuracy},
    {"mcc", &FoldMetrics::mcc},
    {"specificity", &FoldMetrics::specificity},
    {"sensitivity", &FoldMetrics::sensitivity},
    {"f1", &FoldMetrics::f1},
    {"precision", &FoldMetrics::precision},
}};

inline FoldMetrics fold_metrics(std::span<const int> truth, std::span<const double> scores,
                                std::span<const int> predicted) {
  const auto c = confusion(truth, predicted);
  const auto auc = roc_auc_checked(scores, truth);
  FoldMetrics m;
  m.auc = auc.value;
  m.specificity = specificity(c);
  m.sensitivity = sensitivity(c);
  m.balanced_accuracy = (m.sensitivity + m.specificity) / 2.0;
  m.mcc = mcc(c);
  m.f1 = f1(c);
  m.precision = precision(c);
  m.degenerate = {specificity_undefined(c), sensitivity_undefined(c), precision_undefined(c), mcc_undefined(c),
                  auc.single_class};
  return m;
}

struct MetricSummary {
  FoldMetrics mean;
  FoldMetrics sd;  // sample SD (n-1); 0 for a single fold
  std::size_t folds = 0;
};

inline MetricSummary aggregate_folds(std::span<const FoldMetrics> per_fold) {
  if (per_fold.empty()) throw Error(ErrorCode::Empty, "no folds to aggregate");
  MetricSummary out;
  out.folds = per_fold.size();
  const auto n = static_cast<double>(per_fold.size());
  for (const auto& field : kMetricFields) {
    double mean = 0.0;
    for (const auto& f : per_fold) mean += f.*field.member;
    mean /= n;
    double ss = 0.0;
    for (const auto& f : per_fold) ss += (f.*field.member - mean) * (f.*field.member - mean);
    out.mean.*field.member = mean;
    out.sd.*field.member = per_fold.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }
  for (const auto& f : per_fold) {
    out.mean.degenerate.specificity |= f.degenerate.specificity;
    out.mean.degenerate.sensitivity |= f.degenerate.sensitivity;
    out.mean.degenerate.precision |= f.degenerate.precision;
    out.mean.degenerate.mcc |= f.degenerate.mcc;
    out.mean.degenerate.auc |= f.degenerate.auc;
  }
  return out;
}

}  // namespace metabench
