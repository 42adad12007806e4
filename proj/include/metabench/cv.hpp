#pragma once

#include "metabench/error.hpp"
#include "metabench/folds.hpp"
#include "metabench/metrics.hpp"
#include "metabench/model.hpp"
#include "metabench/parallel.hpp"
#include "metabench/preprocess.hpp"
#include "metabench/random.hpp"
#include "metabench/types.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace metabench {

// PER_FOLD averages fold metrics (table convention); POOLED additionally
// scores the concatenated out-of-fold predictions.
enum class Aggregation { PerFold, Pooled };

inline std::string_view to_string(Aggregation a) { return a == Aggregation::PerFold ? "per_fold" : "pooled"; }

struct CvOptions {
  std::size_t k = 10;
  std::uint64_t seed = 0;
  // Global: the matrix is used as given (already preprocessed, or raw on
  // purpose). FoldSafe: the matrix holds raw intensities and preprocessing is
  // fitted on each training split only.
  PreprocessMode preprocess = PreprocessMode::Global;
  Aggregation aggregation = Aggregation::PerFold;
  std::size_t threads = 1;
  bool keep_models = false;
  std::optional<FoldPlan> plan;  // overrides the seeded stratified plan
};

struct GridScore {
  Hyperparams config;
  double mean_auc = 0.0;
};

struct FoldRecord {
  std::size_t fold = 0;
  std::uint64_t model_seed = 0;
  std::vector<std::size_t> test_indices;
  std::vector<double> scores;
  Labels predicted;
  Labels truth;
  FoldMetrics metrics;
  std::optional<Hyperparams> chosen;  // tuned runs only
  std::vector<GridScore> grid_scores;
  bool iteration_cap = false;
};

struct FoldArtifacts {
  std::shared_ptr<const TrainedModel> model;
  std::optional<PreprocessParams> preprocess;
};

struct CvResult {
  ModelFamily family = ModelFamily::LogisticRidge;
  Aggregation aggregation = Aggregation::PerFold;
  PreprocessMode preprocess = PreprocessMode::Global;
  std::uint64_t seed = 0;
  FoldPlan plan;
  bool tuned = false;
  std::vector<FoldRecord> folds;
  std::optional<FoldMetrics> pooled;
  std::vector<FoldArtifacts> artifacts;  // filled when keep_models is set

  std::vector<FoldMetrics> fold_metrics() const {
    std::vector<FoldMetrics> out;
    for (const auto& f : folds) out.push_back(f.metrics);
    return out;
  }

  MetricSummary summary() const { return aggregate_folds(fold_metrics()); }
};

inline FoldPlan outer_plan(const Labels& labels, const CvOptions& opt) {
  if (opt.plan) {
    if (opt.plan->sample_count() != labels.size())
      throw Error(ErrorCode::ShapeMismatch, "fold plan does not cover the samples");
    return *opt.plan;
  }
  return stratified_kfold(labels, opt.k, derive_seed(opt.seed, {stream::outer_plan}));
}

inline std::uint64_t fold_model_seed(std::uint64_t seed, std::size_t fold) {
  return derive_seed(seed, {stream::fold_model, fold});
}

struct PreparedSplit {
  Matrix train;
  Matrix test;
  std::optional<PreprocessParams> params;
};

inline PreparedSplit prepare_split(const Matrix& X, std::span<const std::size_t> train_idx,
                                   std::span<const std::size_t> test_idx, PreprocessMode mode) {
  PreparedSplit s{gather_rows(X, train_idx), gather_rows(X, test_idx), std::nullopt};
  if (mode == PreprocessMode::FoldSafe) {
    s.params = fit_preprocessor(s.train);
    s.train = transform(*s.params, s.train);
    s.test = transform(*s.params, s.test);
  }
  return s;
}

namespace detail {

inline void check_cv_inputs(const Matrix& X, const Labels& y) {
  if (static_cast<std::size_t>(X.rows()) != y.size())
    throw Error(ErrorCode::ShapeMismatch, "matrix rows and labels differ in length");
}

inline Error annotate(const Error& e, std::size_t fold) {
  return Error(e.code(), "fold " + std::to_string(fold) + ": " + e.detail());
}

inline void finish(CvResult& r) {
  if (r.aggregation != Aggregation::Pooled) return;
  std::vector<double> scores;
  Labels truth, predicted;
  for (const auto& f : r.folds) {
    scores.insert(scores.end(), f.scores.begin(), f.scores.end());
    truth.insert(truth.end(), f.truth.begin(), f.truth.end());
    predicted.insert(predicted.end(), f.predicted.begin(), f.predicted.end());
  }
  r.pooled = fold_metrics(truth, scores, predicted);
}

inline void evaluate_fold(FoldRecord& rec, const TrainedModel& model, const Matrix& test, const Labels& y) {
  const Vector s = model.predict_scores(test);
  rec.scores.assign(s.data(), s.data() + s.size());
  rec.predicted = model.predict_labels(test);
  rec.truth = gather<int>(y, rec.test_indices);
  rec.metrics = fold_metrics(rec.truth, rec.scores, rec.predicted);
  rec.iteration_cap = model.hit_iteration_cap();
}

}  // namespace detail

// Plain (untuned) k-fold CV: each fold is scored by a model trained on the
// other k-1 folds. Deterministic given (data, spec, options).
inline CvResult run_cv(const Matrix& X, const Labels& y, const ModelSpec& spec, const CvOptions& opt) {
  detail::check_cv_inputs(X, y);
  validate_spec(spec);
  CvResult r;
  r.family = spec.family;
  r.aggregation = opt.aggregation;
  r.preprocess = opt.preprocess;
  r.seed = opt.seed;
  r.plan = outer_plan(y, opt);
  const std::size_t k = r.plan.folds.size();
  r.folds.resize(k);
  if (opt.keep_models) r.artifacts.resize(k);

  parallel_for(k, opt.threads, [&](std::size_t i) {
    try {
      FoldRecord& rec = r.folds[i];
      rec.fold = i;
      rec.model_seed = fold_model_seed(opt.seed, i);
      rec.test_indices = r.plan.folds[i];
      const auto train_idx = r.plan.training_indices(i);
      auto split = prepare_split(X, train_idx, rec.test_indices, opt.preprocess);
      ModelSpec fold_spec = spec;
      fold_spec.seed = rec.model_seed;
      auto model = std::make_shared<const TrainedModel>(fit_model(fold_spec, split.train, gather<int>(y, train_idx)));
      detail::evaluate_fold(rec, *model, split.test, y);
      if (opt.keep_models) r.artifacts[i] = {std::move(model), std::move(split.params)};
    } catch (const Error& e) {
      throw detail::annotate(e, i);
    }
  });
  detail::finish(r);
  return r;
}

// ---- JSON ------------------------------------------------------------------

inline json to_json(const FoldMetrics& m) {
  json j;
  for (const auto& f : kMetricFields) j[std::string(f.name)] = m.*f.member;
  json d;
  d["specificity"] = m.degenerate.specificity;
  d["sensitivity"] = m.degenerate.sensitivity;
  d["precision"] = m.degenerate.precision;
  d["mcc"] = m.degenerate.mcc;
  d["auc"] = m.degenerate.auc;
  j["degenerate"] = std::move(d);
  return j;
}

inline FoldMetrics fold_metrics_from_json(const json& j) {
  FoldMetrics m;
  for (const auto& f : kMetricFields) m.*f.member = j.at(std::string(f.name)).get<double>();
  if (j.contains("degenerate")) {
    const auto& d = j["degenerate"];
    m.degenerate = {d.at("specificity"), d.at("sensitivity"), d.at("precision"), d.at("mcc"), d.at("auc")};
  }
  return m;
}

inline json to_json(const CvResult& r) {
  json j;
  j["family"] = std::string(family_id(r.family));
  j["aggregation"] = std::string(to_string(r.aggregation));
  j["preprocess"] = std::string(to_string(r.preprocess));
  j["seed"] = r.seed;
  j["plan_seed"] = r.plan.seed;
  j["tuned"] = r.tuned;
  json folds = json::array();
  for (const auto& f : r.folds) {
    json fj;
    fj["fold"] = f.fold;
    fj["model_seed"] = f.model_seed;
    fj["test_indices"] = f.test_indices;
    fj["truth"] = f.truth;
    fj["scores"] = f.scores;
    fj["predicted"] = f.predicted;
    fj["metrics"] = to_json(f.metrics);
    if (f.chosen) fj["chosen_hyperparameters"] = to_json(*f.chosen);
    if (!f.grid_scores.empty()) {
      json gs = json::array();
      for (const auto& g : f.grid_scores) gs.push_back({{"config", to_json(g.config)}, {"mean_auc", g.mean_auc}});
      fj["grid_scores"] = std::move(gs);
    }
    fj["iteration_cap"] = f.iteration_cap;
    folds.push_back(std::move(fj));
  }
  j["folds"] = std::move(folds);
  if (r.pooled) j["pooled"] = to_json(*r.pooled);
  return j;
}

}  // namespace metabench
