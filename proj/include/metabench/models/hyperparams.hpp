#pragma once

#include "metabench/error.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace metabench {

enum class ModelFamily {
  LogisticRidge,
  RandomForest,
  Gbdt,
  SvmRbf,
  Mlp,
  Knn,
  DummyMostFrequent,
  DummyUniform,
};

// Report row order (GBDT first, dummies last).
inline constexpr std::array<ModelFamily, 8> kReportOrder{
    ModelFamily::Gbdt, ModelFamily::RandomForest, ModelFamily::SvmRbf,            ModelFamily::Mlp,
    ModelFamily::LogisticRidge, ModelFamily::Knn, ModelFamily::DummyMostFrequent, ModelFamily::DummyUniform,
};

// Short names used in tables and on the command line.
inline std::string_view short_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::LogisticRidge: return "LR";
    case ModelFamily::RandomForest: return "RF";
    case ModelFamily::Gbdt: return "XGB";
    case ModelFamily::SvmRbf: return "SVM";
    case ModelFamily::Mlp: return "MLP";
    case ModelFamily::Knn: return "K-NN";
    case ModelFamily::DummyMostFrequent: return "DCM";
    case ModelFamily::DummyUniform: return "DCU";
  }
  return "?";
}

inline std::string_view family_id(ModelFamily f) {
  switch (f) {
    case ModelFamily::LogisticRidge: return "LOGISTIC_RIDGE";
    case ModelFamily::RandomForest: return "RANDOM_FOREST";
    case ModelFamily::Gbdt: return "GBDT";
    case ModelFamily::SvmRbf: return "SVM_RBF";
    case ModelFamily::Mlp: return "MLP";
    case ModelFamily::Knn: return "KNN";
    case ModelFamily::DummyMostFrequent: return "DUMMY_MOST_FREQUENT";
    case ModelFamily::DummyUniform: return "DUMMY_UNIFORM";
  }
  return "?";
}

inline ModelFamily parse_family(std::string_view s) {
  for (auto f : kReportOrder)
    if (s == short_name(f) || s == family_id(f)) return f;
  if (s == "GBDT" || s == "GBM") return ModelFamily::Gbdt;
  if (s == "KNN") return ModelFamily::Knn;
  throw Error(ErrorCode::Config, "unknown model family '" + std::string(s) + "'");
}

using HyperValue = std::variant<double, std::string>;
using Hyperparams = std::map<std::string, HyperValue, std::less<>>;

inline std::string to_string(const HyperValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", std::get<double>(v));
  return buf;
}

inline std::string to_string(const Hyperparams& hp) {
  std::string out;
  for (const auto& [k, v] : hp) {
    if (!out.empty()) out += ", ";
    out += k + "=" + to_string(v);
  }
  return out;
}

inline const std::set<std::string, std::less<>>& allowed_hyperparams(ModelFamily f) {
  static const std::map<ModelFamily, std::set<std::string, std::less<>>> table{
      {ModelFamily::LogisticRidge, {"C", "solver", "class_weight", "max_iter", "tol"}},
      {ModelFamily::RandomForest, {"n_trees", "max_depth", "min_leaf", "mtry", "bootstrap"}},
      {ModelFamily::Gbdt, {"n_rounds", "eta", "lambda", "gamma", "max_depth"}},
      {ModelFamily::SvmRbf, {"C", "gamma", "class_weight", "tol", "max_passes"}},
      {ModelFamily::Mlp, {"hidden", "activation", "alpha", "step", "max_epochs", "patience", "tol"}},
      {ModelFamily::Knn, {"k"}},
      {ModelFamily::DummyMostFrequent, {}},
      {ModelFamily::DummyUniform, {}},
  };
  return table.at(f);
}

inline void check_hyperparam_names(ModelFamily f, const Hyperparams& hp) {
  const auto& allowed = allowed_hyperparams(f);
  for (const auto& [name, value] : hp)
    if (!allowed.contains(name))
      throw Error(ErrorCode::InvalidSpec,
                  "hyperparameter '" + name + "' is not valid for " + std::string(family_id(f)));
}

namespace hp {

inline double number(const Hyperparams& h, std::string_view name, double fallback) {
  auto it = h.find(name);
  if (it == h.end()) return fallback;
  if (const auto* d = std::get_if<double>(&it->second)) return *d;
  throw Error(ErrorCode::InvalidSpec, "hyperparameter '" + std::string(name) + "' must be numeric");
}

inline std::string text(const Hyperparams& h, std::string_view name, std::string_view fallback) {
  auto it = h.find(name);
  if (it == h.end()) return std::string(fallback);
  if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
  throw Error(ErrorCode::InvalidSpec, "hyperparameter '" + std::string(name) + "' must be a string");
}

inline std::size_t count(const Hyperparams& h, std::string_view name, std::size_t fallback) {
  const double v = number(h, name, static_cast<double>(fallback));
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e12)
    throw Error(ErrorCode::InvalidSpec, "hyperparameter '" + std::string(name) + "' must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

// Depth limits accept "none" (unlimited, encoded as 0) or a positive count.
inline std::size_t depth(const Hyperparams& h, std::string_view name, std::size_t fallback) {
  auto it = h.find(name);
  if (it == h.end()) return fallback;
  if (const auto* s = std::get_if<std::string>(&it->second)) {
    if (*s == "none" || *s == "None" || *s == "inf") return 0;
    throw Error(ErrorCode::InvalidSpec, "max_depth must be a count or \"none\"");
  }
  const std::size_t d = count(h, name, fallback);
  if (d == 0) throw Error(ErrorCode::InvalidSpec, "max_depth must be >= 1 or \"none\"");
  return d;
}

inline bool flag(const Hyperparams& h, std::string_view name, bool fallback) {
  auto it = h.find(name);
  if (it == h.end()) return fallback;
  if (const auto* d = std::get_if<double>(&it->second)) return *d != 0.0;
  const auto& s = std::get<std::string>(it->second);
  if (s == "true" || s == "True") return true;
  if (s == "false" || s == "False") return false;
  throw Error(ErrorCode::InvalidSpec, "hyperparameter '" + std::string(name) + "' must be boolean");
}

}  // namespace hp

// Balanced weights n / (2 * n_class); unit weights otherwise.
inline std::vector<double> sample_weights(const std::vector<int>& y, std::string_view class_weight) {
  std::vector<double> w(y.size(), 1.0);
  if (class_weight == "none" || class_weight == "None") return w;
  if (class_weight != "balanced")
    throw Error(ErrorCode::InvalidSpec, "class_weight must be \"none\" or \"balanced\"");
  double counts[2] = {0, 0};
  for (int v : y) counts[v] += 1;
  const auto n = static_cast<double>(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) w[i] = n / (2.0 * counts[y[i]]);
  return w;
}

}  // namespace metabench
