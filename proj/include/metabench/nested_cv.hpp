#pragma once

#include "metabench/cv.hpp"
#include "metabench/tuning.hpp"

#include <memory>

namespace metabench {

inline std::uint64_t inner_search_seed(std::uint64_t model_seed) {
  return derive_seed(model_seed, {stream::inner_plan});
}

// Nested CV: within each outer training set a grid search over k_inner folds
// picks the configuration with the best mean AUC; the model is then refit on
// the whole outer training set with that configuration and the same fold
// seed plain run_cv would use, and scored on the held-out fold.
inline CvResult run_nested_cv(const Matrix& X, const Labels& y, const ModelSpec& spec, const HyperGrid& grid,
                              std::size_t k_inner, const CvOptions& opt) {
  detail::check_cv_inputs(X, y);
  validate_spec(spec);
  grid.validate();
  if (grid.family != spec.family) throw Error(ErrorCode::InvalidSpec, "grid family differs from the model family");
  CvResult r;
  r.family = spec.family;
  r.aggregation = opt.aggregation;
  r.preprocess = opt.preprocess;
  r.seed = opt.seed;
  r.tuned = true;
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
      const Labels y_train = gather<int>(y, train_idx);
      // In FOLD_SAFE mode the inner search sees raw outer-training rows and
      // refits preprocessing on every inner split.
      const Matrix raw_train = gather_rows(X, train_idx);
      const auto search = grid_search(raw_train, y_train, spec, grid, k_inner, inner_search_seed(rec.model_seed),
                                      opt.preprocess);
      rec.chosen = search.best;
      rec.grid_scores = search.scores;

      auto split = prepare_split(X, train_idx, rec.test_indices, opt.preprocess);
      ModelSpec fold_spec = spec;
      fold_spec.seed = rec.model_seed;
      fold_spec.hyperparams = merge_hyperparams(spec.hyperparams, search.best);
      auto model = std::make_shared<const TrainedModel>(fit_model(fold_spec, split.train, y_train));
      detail::evaluate_fold(rec, *model, split.test, y);
      if (opt.keep_models) r.artifacts[i] = {std::move(model), std::move(split.params)};
    } catch (const Error& e) {
      throw detail::annotate(e, i);
    }
  });
  detail::finish(r);
  return r;
}

}  // namespace metabench
