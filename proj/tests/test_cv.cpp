#include "metabench/cv.hpp"
#include "metabench/data.hpp"
#include "metabench/nested_cv.hpp"
#include "metabench/tuning.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <chrono>

using namespace metabench;
using testing_support::blobs;
using testing_support::shuffled_labels;

namespace {

struct Dataset {
  Matrix raw;
  Matrix global;
  Labels y;
};

Dataset small_synthetic(std::uint64_t seed, std::size_t n0 = 20, std::size_t n1 = 40, double effect = 1.5) {
  SynthSpec s;
  s.n_class0 = n0;
  s.n_class1 = n1;
  s.n_samples = n0 + n1;
  s.n_features_pos = 24;
  s.n_features_neg = 16;
  s.n_informative = 8;
  s.effect_size = effect;
  s.seed = seed;
  const auto d = synthesize(s);
  const auto m = merge_modes(d.pos, d.neg);
  return {m.values(), preprocess_global(m), m.labels()};
}

CvOptions options(std::size_t k, std::uint64_t seed, PreprocessMode mode = PreprocessMode::Global) {
  CvOptions o;
  o.k = k;
  o.seed = seed;
  o.preprocess = mode;
  return o;
}

void expect_same_predictions(const CvResult& a, const CvResult& b) {
  ASSERT_EQ(a.folds.size(), b.folds.size());
  for (std::size_t i = 0; i < a.folds.size(); ++i) {
    EXPECT_EQ(a.folds[i].test_indices, b.folds[i].test_indices);
    EXPECT_EQ(a.folds[i].scores, b.folds[i].scores) << "fold " << i;
    EXPECT_EQ(a.folds[i].predicted, b.folds[i].predicted) << "fold " << i;
    EXPECT_EQ(a.folds[i].metrics, b.folds[i].metrics);
  }
}

}  // namespace

TEST(RunCv, MostFrequentDummyOnStudyCounts) {
  Rng rng(1);
  const auto y = shuffled_labels(27, 54, rng);
  const Matrix X = blobs(y, 3, 0.0, rng);
  for (std::uint64_t seed : {0u, 1u, 2024u}) {
    const auto r = run_cv(X, y, {ModelFamily::DummyMostFrequent, {}, seed}, options(10, seed));
    for (const auto& f : r.folds) {
      EXPECT_EQ(f.metrics.auc, 0.5);
      EXPECT_EQ(f.metrics.specificity, 0.0);
      EXPECT_EQ(f.metrics.mcc, 0.0);
    }
    const auto s = r.summary();
    EXPECT_EQ(s.mean.balanced_accuracy, 0.5);
    EXPECT_GE(s.mean.f1, 0.79);
    EXPECT_LE(s.mean.f1, 0.81);
  }
}

TEST(RunCv, LeaveOneOutNearestDuplicate) {
  Rng rng(2);
  Matrix base(6, 2);
  for (Index i = 0; i < 6; ++i) base.row(i) << 10.0 * static_cast<double>(i), rng.uniform();
  Matrix X(12, 2);
  X << base, base;
  const Labels y{0, 1, 1, 0, 1, 0, 0, 1, 1, 0, 1, 0};
  CvOptions o;
  o.plan = leave_one_out(12);
  const auto r = run_cv(X, y, {ModelFamily::Knn, {{"k", 1.0}}, 0}, o);
  for (const auto& f : r.folds) EXPECT_EQ(f.predicted[0], y[f.test_indices[0]]);
}

TEST(RunCv, RecordShapesAndPooledMode) {
  const auto d = small_synthetic(3);
  auto o = options(5, 7);
  o.aggregation = Aggregation::Pooled;
  const auto r = run_cv(d.global, d.y, {ModelFamily::LogisticRidge, {}, 0}, o);
  ASSERT_EQ(r.folds.size(), 5u);
  std::size_t covered = 0;
  for (const auto& f : r.folds) {
    EXPECT_EQ(f.scores.size(), f.test_indices.size());
    EXPECT_EQ(f.truth.size(), f.test_indices.size());
    covered += f.test_indices.size();
  }
  EXPECT_EQ(covered, d.y.size());
  ASSERT_TRUE(r.pooled.has_value());
  EXPECT_GT(r.pooled->auc, 0.5);
}

TEST(RunCv, DeterministicAcrossRunsAndThreads) {
  const auto d = small_synthetic(4);
  for (auto f : {ModelFamily::RandomForest, ModelFamily::Mlp, ModelFamily::DummyUniform}) {
    Hyperparams h;
    if (f == ModelFamily::RandomForest) h["n_trees"] = 15.0;
    if (f == ModelFamily::Mlp) h["hidden"] = 8.0;
    auto o = options(5, 11);
    const auto a = run_cv(d.global, d.y, {f, h, 0}, o);
    o.threads = 4;
    const auto b = run_cv(d.global, d.y, {f, h, 0}, o);
    expect_same_predictions(a, b);
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  }
}

TEST(RunCv, FoldErrorsCarryTheFoldIndex) {
  Rng rng(5);
  const auto y = shuffled_labels(6, 6, rng);
  Matrix X = blobs(y, 2, 1.0, rng);
  X(0, 0) = std::nan("");
  try {
    run_cv(X, y, {ModelFamily::LogisticRidge, {}, 0}, options(3, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFinite);
    EXPECT_NE(std::string(e.what()).find("fold "), std::string::npos);
  }
}

TEST(RunCv, ShapeMismatchIsRejected) {
  try {
    run_cv(Matrix::Zero(3, 2), Labels{0, 1}, {ModelFamily::DummyUniform, {}, 0}, options(2, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(HyperGrid, EnumerationOrderAndValidation) {
  const auto g = *default_grid(ModelFamily::LogisticRidge);
  EXPECT_EQ(g.size(), 8u);
  const auto first = g.config(0), second = g.config(1), last = g.config(7);
  EXPECT_EQ(std::get<double>(first.at("C")), 1.0);
  EXPECT_EQ(std::get<std::string>(first.at("class_weight")), "none");
  EXPECT_EQ(std::get<std::string>(second.at("class_weight")), "balanced");
  EXPECT_EQ(std::get<double>(last.at("C")), 0.1);
  EXPECT_EQ(std::get<double>(last.at("max_iter")), 100.0);
  try {
    HyperGrid{ModelFamily::Knn, {}}.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyGrid);
  }
  EXPECT_THROW((HyperGrid{ModelFamily::Knn, {{"C", {1.0}}}}.validate()), Error);
  EXPECT_FALSE(default_grid(ModelFamily::DummyUniform).has_value());
}

TEST(GridSearch, SingleConfigScoreEqualsRunCvMean) {
  const auto d = small_synthetic(6);
  HyperGrid g{ModelFamily::LogisticRidge, {{"C", {0.5}}}};
  const ModelSpec base{ModelFamily::LogisticRidge, {}, 0};
  const auto r = grid_search(d.global, d.y, base, g, 5, 99);
  ASSERT_EQ(r.scores.size(), 1u);
  ModelSpec spec = base;
  spec.hyperparams["C"] = 0.5;
  EXPECT_EQ(r.scores[0].mean_auc, run_cv(d.global, d.y, spec, options(5, 99)).summary().mean.auc);
}

TEST(GridSearch, WinnerScoreMatchesIndependentRecomputation) {
  const auto d = small_synthetic(7, 20, 40, 1.0);
  const ModelSpec base{ModelFamily::LogisticRidge, {}, 0};
  const auto g = *default_grid(ModelFamily::LogisticRidge);
  const auto r = grid_search(d.global, d.y, base, g, 5, 5);
  ASSERT_EQ(r.scores.size(), 8u);
  for (const auto& s : r.scores) EXPECT_LE(s.mean_auc, r.scores[r.best_index].mean_auc);
  EXPECT_GT(r.scores[r.best_index].mean_auc, 0.7);
  ModelSpec spec = base;
  spec.hyperparams = r.best;
  EXPECT_NEAR(run_cv(d.global, d.y, spec, options(5, 5)).summary().mean.auc, r.scores[r.best_index].mean_auc, 1e-12);
  EXPECT_EQ(grid_search(d.global, d.y, base, g, 5, 5, PreprocessMode::Global, 3).scores.size(), 8u);
  const auto threaded = grid_search(d.global, d.y, base, g, 5, 5, PreprocessMode::Global, 3);
  EXPECT_EQ(threaded.best_index, r.best_index);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(threaded.scores[i].mean_auc, r.scores[i].mean_auc);
}

TEST(GridSearch, TiesGoToFirstEnumeratedConfig) {
  const auto d = small_synthetic(8);
  const ModelSpec base{ModelFamily::Knn, {}, 0};
  HyperGrid dup{ModelFamily::Knn, {{"k", {5.0, 5.0}}}};
  const auto r = grid_search(d.global, d.y, base, dup, 5, 1);
  EXPECT_EQ(r.scores[0].mean_auc, r.scores[1].mean_auc);
  EXPECT_EQ(r.best_index, 0u);

  HyperGrid solvers{ModelFamily::LogisticRidge,
                    {{"C", {1e6}}, {"solver", {std::string("newton-cg"), std::string("lbfgs")}}}};
  const auto s = grid_search(d.global, d.y, {ModelFamily::LogisticRidge, {}, 0}, solvers, 5, 1);
  if (s.scores[0].mean_auc == s.scores[1].mean_auc) {
    EXPECT_EQ(s.best_index, 0u);
  }
}

TEST(GridSearch, TooFewPerClass) {
  Rng rng(9);
  const auto y = shuffled_labels(3, 10, rng);
  const Matrix X = blobs(y, 2, 1.0, rng);
  try {
    grid_search(X, y, {ModelFamily::Knn, {}, 0}, *default_grid(ModelFamily::Knn), 5, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewPerClass);
  }
}

TEST(NestedCv, SingleConfigGridEqualsPlainCv) {
  const auto d = small_synthetic(10);
  for (auto mode : {PreprocessMode::Global, PreprocessMode::FoldSafe}) {
    const Matrix& X = mode == PreprocessMode::Global ? d.global : d.raw;
    for (auto f : {ModelFamily::LogisticRidge, ModelFamily::RandomForest, ModelFamily::Knn}) {
      HyperGrid g{f, {}};
      Hyperparams h;
      if (f == ModelFamily::LogisticRidge) g.axes = {{"C", {0.3}}};
      if (f == ModelFamily::RandomForest) g.axes = {{"n_trees", {10.0}}};
      if (f == ModelFamily::Knn) g.axes = {{"k", {3.0}}};
      const auto nested = run_nested_cv(X, d.y, {f, {}, 0}, g, 5, options(5, 21, mode));
      ModelSpec spec{f, g.config(0), 0};
      const auto plain = run_cv(X, d.y, spec, options(5, 21, mode));
      expect_same_predictions(nested, plain);
      for (const auto& fold : nested.folds) {
        ASSERT_TRUE(fold.chosen.has_value());
        EXPECT_EQ(*fold.chosen, g.config(0));
      }
    }
  }
}

TEST(NestedCv, RecordsChoicesPerFold) {
  const auto d = small_synthetic(12);
  const auto r = run_nested_cv(d.global, d.y, {ModelFamily::LogisticRidge, {}, 0},
                               *default_grid(ModelFamily::LogisticRidge), 5, options(5, 3));
  EXPECT_TRUE(r.tuned);
  for (const auto& f : r.folds) {
    EXPECT_TRUE(f.chosen.has_value());
    EXPECT_EQ(f.grid_scores.size(), 8u);
  }
  const auto j = to_json(r);
  EXPECT_TRUE(j["folds"][0].contains("chosen_hyperparameters"));
  EXPECT_EQ(j["folds"][0]["grid_scores"].size(), 8u);
}

TEST(NestedCv, FamilyMismatchAndEmptyGridAreErrors) {
  const auto d = small_synthetic(13);
  EXPECT_THROW(run_nested_cv(d.global, d.y, {ModelFamily::Knn, {}, 0}, *default_grid(ModelFamily::LogisticRidge), 5,
                             options(5, 0)),
               Error);
  try {
    run_nested_cv(d.global, d.y, {ModelFamily::Knn, {}, 0}, HyperGrid{ModelFamily::Knn, {}}, 5, options(5, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyGrid);
  }
}

// Mutating a held-out fold must not change the model fitted for that fold.
TEST(NestedCv, FoldSafeModelsIgnoreTheirTestFold) {
  const auto d = small_synthetic(14);
  Rng rng(15);
  Matrix probe(6, d.raw.cols());
  for (Index i = 0; i < probe.rows(); ++i)
    for (Index j = 0; j < probe.cols(); ++j) probe(i, j) = std::exp2(rng.uniform(8, 20));
  auto o = options(5, 31, PreprocessMode::FoldSafe);
  o.keep_models = true;
  const ModelSpec spec{ModelFamily::LogisticRidge, {}, 0};
  const auto grid = *default_grid(ModelFamily::LogisticRidge);
  const auto before = run_nested_cv(d.raw, d.y, spec, grid, 5, o);
  for (std::size_t fold = 0; fold < before.folds.size(); ++fold) {
    Matrix X = d.raw;
    Labels y = d.y;
    for (auto i : before.folds[fold].test_indices) {
      for (Index j = 0; j < X.cols(); ++j) X(static_cast<Index>(i), j) = std::exp2(rng.uniform(0, 30));
      y[i] = 1 - y[i];
    }
    auto o2 = o;
    o2.plan = before.plan;  // the class swap would otherwise change the stratified plan
    const auto after = run_nested_cv(X, y, spec, grid, 5, o2);
    const auto& a = before.artifacts[fold];
    const auto& b = after.artifacts[fold];
    const Vector pa = a.model->predict_scores(transform(*a.preprocess, probe));
    const Vector pb = b.model->predict_scores(transform(*b.preprocess, probe));
    EXPECT_EQ(pa, pb) << "fold " << fold;
    EXPECT_EQ(before.folds[fold].chosen, after.folds[fold].chosen);
  }
}
