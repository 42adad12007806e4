#pragma once

#include "metabench/cv.hpp"
#include "metabench/error.hpp"
#include "metabench/model.hpp"
#include "metabench/parallel.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace metabench {

// Named Cartesian grid. Configurations are enumerated with the first axis
// varying slowest and values in declared order; that order breaks ties.
struct HyperGrid {
  ModelFamily family = ModelFamily::LogisticRidge;
  std::vector<std::pair<std::string, std::vector<HyperValue>>> axes;

  std::size_t size() const {
    if (axes.empty()) return 0;
    std::size_t n = 1;
    for (const auto& [name, values] : axes) n *= values.size();
    return n;
  }

  Hyperparams config(std::size_t index) const {
    Hyperparams h;
    for (std::size_t a = axes.size(); a-- > 0;) {
      const auto& values = axes[a].second;
      h[axes[a].first] = values[index % values.size()];
      index /= values.size();
    }
    return h;
  }

  std::vector<Hyperparams> configs() const {
    std::vector<Hyperparams> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(config(i));
    return out;
  }

  void validate() const {
    if (size() == 0) throw Error(ErrorCode::EmptyGrid, "grid for " + std::string(family_id(family)) + " is empty");
    Hyperparams names;
    for (const auto& [name, values] : axes) names[name] = 0.0;
    check_hyperparam_names(family, names);
  }
};

// LOGISTIC_RIDGE follows the published search space; the other grids are
// stand-ins of comparable size.
inline std::optional<HyperGrid> default_grid(ModelFamily f) {
  using S = std::string;
  switch (f) {
    case ModelFamily::LogisticRidge:
      return HyperGrid{f,
                       {{"C", {1.0, 0.1}},
                        {"solver", {S("lbfgs"), S("newton-cg")}},
                        {"class_weight", {S("none"), S("balanced")}},
                        {"max_iter", {100.0}}}};
    case ModelFamily::RandomForest:
      return HyperGrid{f, {{"n_trees", {100.0, 300.0}}, {"max_depth", {S("none"), 10.0}}}};
    case ModelFamily::Gbdt:
      return HyperGrid{f, {{"eta", {0.1, 0.3}}, {"max_depth", {3.0, 6.0}}}};
    case ModelFamily::SvmRbf:
      return HyperGrid{f, {{"C", {1.0, 10.0}}, {"gamma", {S("scale"), S("auto")}}}};
    case ModelFamily::Mlp:
      return HyperGrid{f, {{"hidden", {50.0, 100.0}}, {"alpha", {1e-4, 1e-3}}}};
    case ModelFamily::Knn:
      return HyperGrid{f, {{"k", {3.0, 5.0, 7.0}}}};
    default:
      return std::nullopt;
  }
}

inline std::string_view grid_provenance(ModelFamily f) {
  return f == ModelFamily::LogisticRidge ? "published" : "stand-in";
}

struct GridSearchResult {
  std::size_t best_index = 0;
  Hyperparams best;
  std::vector<GridScore> scores;  // enumeration order
};

inline Hyperparams merge_hyperparams(Hyperparams base, const Hyperparams& overrides) {
  for (const auto& [k, v] : overrides) base[k] = v;
  return base;
}

// Scores every configuration by mean inner-fold AUC. All configurations share
// one FoldPlan and the same per-fold model seeds, so each configuration's
// score equals run_cv(X, y, config, {k_inner, seed}).summary().mean.auc.
inline GridSearchResult grid_search(const Matrix& X, const Labels& y, const ModelSpec& base, const HyperGrid& grid,
                                    std::size_t k_inner, std::uint64_t seed,
                                    PreprocessMode preprocess = PreprocessMode::Global, std::size_t threads = 1) {
  if (grid.family != base.family) throw Error(ErrorCode::InvalidSpec, "grid family differs from the model family");
  grid.validate();
  CvOptions opt;
  opt.k = k_inner;
  opt.seed = seed;
  opt.preprocess = preprocess;
  opt.plan = stratified_kfold(y, k_inner, derive_seed(seed, {stream::outer_plan}));

  GridSearchResult out;
  out.scores.resize(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t c) {
    ModelSpec spec = base;
    spec.hyperparams = merge_hyperparams(base.hyperparams, grid.config(c));
    const auto cv = run_cv(X, y, spec, opt);
    out.scores[c] = {grid.config(c), cv.summary().mean.auc};
  });
  for (std::size_t c = 1; c < out.scores.size(); ++c)
    if (out.scores[c].mean_auc > out.scores[out.best_index].mean_auc) out.best_index = c;
  out.best = out.scores[out.best_index].config;
  return out;
}

}  // namespace metabench
