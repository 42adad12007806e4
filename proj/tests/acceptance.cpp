// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include "metabench/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace metabench;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::path(METABENCH_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Labels shuffled_labels(std::size_t n0, std::size_t n1, Rng& rng) {
  Labels y(n0, 0);
  y.insert(y.end(), n1, 1);
  rng.shuffle(y);
  return y;
}

Labels random_labels(std::size_t n, Rng& rng) {
  Labels y(n);
  for (auto& v : y) v = static_cast<int>(rng.below(2));
  y[0] = 0;
  y[1] = 1;
  return y;
}

Matrix blobs(const Labels& y, Index cols, double shift, Rng& rng) {
  Matrix m(static_cast<Index>(y.size()), cols);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal() + (y[static_cast<std::size_t>(i)] == 1 ? shift : 0.0);
  return m;
}

Matrix positive_matrix(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = std::exp2(rng.uniform(2.0, 14.0));
  return m;
}

std::vector<double> sorted_row(const Matrix& m, Index i) {
  std::vector<double> v(m.row(i).data(), m.row(i).data() + m.cols());
  std::sort(v.begin(), v.end());
  return v;
}

// ---- 1 ------------------------------------------------------------------------

Outcome dummy_baseline() {
  Outcome o;
  const auto t0 = Clock::now();
  RunConfig cfg;
  cfg.models = {ModelFamily::DummyMostFrequent};
  cfg.modes = {RunMode::Base};
  cfg.seed = 2024;
  cfg.out = scratch("dummy").string();
  const auto report = cmd_benchmark(cfg);
  for (const auto& d : cfg.datasets) {
    const auto* c = report.find(d, ModelFamily::DummyMostFrequent, RunMode::Base);
    o.check(c != nullptr, "missing cell " + d);
    if (!c) continue;
    const auto& m = c->summary.mean;
    o.check(m.auc == 0.5, d + " AUC " + fmt("%.17g", m.auc));
    o.check(m.balanced_accuracy == 0.5, d + " balanced accuracy " + fmt("%.17g", m.balanced_accuracy));
    o.check(m.mcc == 0.0, d + " MCC " + fmt("%.17g", m.mcc));
    o.check(m.specificity == 0.0, d + " specificity " + fmt("%.17g", m.specificity));
    o.check(m.f1 >= 0.79 && m.f1 <= 0.81, d + " F1 " + fmt("%.6f", m.f1));
    if (o.pass) o.detail = "F1 " + fmt("%.6f", m.f1);
  }
  const double s = seconds_since(t0);
  o.check(s < 10.0, "runtime " + fmt("%.2f s", s));
  if (o.pass) o.detail += ", " + fmt("%.2f s", s);
  return o;
}

// ---- 2 ------------------------------------------------------------------------

double mann_whitney(const std::vector<double>& s, const Labels& t) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (t[i] == 1 && t[j] == 0) {
        pairs += 1;
        if (s[i] > s[j]) wins += 1;
        else if (s[i] == s[j]) wins += 0.5;
      }
  return wins / pairs;
}

Outcome metric_oracles() {
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(20240601);
  std::size_t auc_checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(60);
    Labels t(n), p(n);
    std::vector<double> s(n);
    const bool coarse = trial % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<int>(rng.below(2));
      p[i] = static_cast<int>(rng.below(2));
      s[i] = coarse ? static_cast<double>(rng.below(5)) / 4.0 : rng.uniform(0, 1);
    }
    double tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      tp += t[i] == 1 && p[i] == 1;
      tn += t[i] == 0 && p[i] == 0;
      fp += t[i] == 0 && p[i] == 1;
      fn += t[i] == 1 && p[i] == 0;
    }
    const double spec = tn + fp > 0 ? tn / (tn + fp) : 0.0;
    const double sens = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double den = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
    const double mc = den > 0 ? (tp * tn - fp * fn) / den : 0.0;
    const double f = prec + sens > 0 ? 2 * prec * sens / (prec + sens) : 0.0;
    const double ba = (sens + spec) / 2.0;
    const auto m = fold_metrics(t, s, p);
    const std::string at = "trial " + std::to_string(trial);
    o.check(std::abs(m.specificity - spec) <= 1e-12, at + " specificity");
    o.check(std::abs(m.sensitivity - sens) <= 1e-12, at + " sensitivity");
    o.check(std::abs(m.balanced_accuracy - ba) <= 1e-12, at + " balanced accuracy");
    o.check(std::abs(m.mcc - mc) <= 1e-12, at + " MCC");
    o.check(std::abs(m.f1 - f) <= 1e-12, at + " F1");
    if (tp + fn > 0 && tn + fp > 0) {
      o.check(std::abs(roc_auc(s, t) - mann_whitney(s, t)) <= 1e-12, at + " AUC");
      ++auc_checked;
    }
  }
  const double sec = seconds_since(t0);
  o.check(sec < 30.0, "runtime " + fmt("%.2f s", sec));
  if (o.pass) o.detail = std::to_string(auc_checked) + " AUC comparisons, " + fmt("%.2f s", sec);
  return o;
}

// ---- 3 ------------------------------------------------------------------------

void check_plan(Outcome& o, const FoldPlan& plan, const Labels& y, const std::string& at) {
  std::vector<int> seen(y.size(), 0);
  std::size_t lo = y.size(), hi = 0;
  std::size_t lo0 = y.size(), hi0 = 0, lo1 = y.size(), hi1 = 0;
  for (const auto& f : plan.folds) {
    std::size_t n1 = 0;
    for (auto i : f) {
      if (i < y.size()) seen[i] += 1;
      else o.check(false, at + " index out of range");
      n1 += i < y.size() ? y[i] : 0;
    }
    lo = std::min(lo, f.size());
    hi = std::max(hi, f.size());
    lo0 = std::min(lo0, f.size() - n1);
    hi0 = std::max(hi0, f.size() - n1);
    lo1 = std::min(lo1, n1);
    hi1 = std::max(hi1, n1);
  }
  o.check(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }), at + " not a partition");
  o.check(hi - lo <= 1, at + " fold sizes differ by more than one");
  o.check(hi0 - lo0 <= 1 && hi1 - lo1 <= 1, at + " class counts differ by more than one");
}

Outcome stratification() {
  Outcome o;
  Rng rng(31337);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 2 + rng.below(11);
    const std::size_t n0 = k + rng.below(40);
    const std::size_t n1 = k + rng.below(40);
    const auto y = shuffled_labels(n0, n1, rng);
    const auto plan = stratified_kfold(y, k, rng.next());
    o.check(plan.folds.size() == k, "trial " + std::to_string(trial) + " fold count");
    check_plan(o, plan, y, "trial " + std::to_string(trial));
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng r(seed);
    const auto y = shuffled_labels(27, 54, r);
    const auto plan = stratified_kfold(y, 10, seed * 7 + 1);
    std::multiset<std::size_t> c0, c1;
    for (const auto& f : plan.folds) {
      std::size_t n1 = 0;
      for (auto i : f) n1 += y[i];
      c0.insert(f.size() - n1);
      c1.insert(n1);
    }
    o.check(c0 == std::multiset<std::size_t>{2, 2, 2, 3, 3, 3, 3, 3, 3, 3}, "27/54 class-0 composition");
    o.check(c1 == std::multiset<std::size_t>{5, 5, 5, 5, 5, 5, 6, 6, 6, 6}, "27/54 class-1 composition");
  }
  if (o.pass) o.detail = "500 fuzzed plans, 20 study-shaped plans";
  return o;
}

// ---- 4 ------------------------------------------------------------------------

Outcome preprocessing() {
  Outcome o;
  {
    Matrix raw(3, 1);
    raw << 1, 2, 4;
    const Matrix z = standardize(fit_preprocessor(raw), raw);
    o.check(z(0, 0) == -1.0 && z(1, 0) == 0.0 && z(2, 0) == 1.0, "standardization worked example");
    Matrix rows(2, 3);
    rows << 2, 6, 4, 8, 3, 1;
    o.check(fit_quantile_reference(rows) == std::vector<double>{1.5, 3.5, 7.0}, "rank-mean worked example");
  }
  Rng rng(404);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 3 + static_cast<Index>(rng.below(40)), p = 2 + static_cast<Index>(rng.below(60));
    const Matrix raw = positive_matrix(n, p, rng);
    const auto params = fit_preprocessor(raw);
    const Matrix out = transform(params, raw);
    const auto first = sorted_row(out, 0);
    for (Index i = 1; i < n; ++i) {
      const auto v = sorted_row(out, i);
      for (std::size_t r = 0; r < v.size(); ++r)
        o.check(std::abs(v[r] - first[r]) <= 1e-12, "sorted rows differ, trial " + std::to_string(trial));
    }
    const Matrix z = standardize(params, raw);
    for (Index j = 0; j < p; ++j) {
      double mean = 0;
      for (Index i = 0; i < n; ++i) mean += z(i, j);
      mean /= static_cast<double>(n);
      double ss = 0;
      for (Index i = 0; i < n; ++i) ss += (z(i, j) - mean) * (z(i, j) - mean);
      const double sd = std::sqrt(ss / static_cast<double>(n - 1));
      o.check(std::abs(mean) <= 1e-10, "standardized mean " + fmt("%.3g", mean));
      o.check(std::abs(sd - 1.0) <= 1e-10, "standardized SD " + fmt("%.17g", sd));
    }
  }
  if (o.pass) o.detail = "50 random matrices plus worked examples";
  return o;
}

// ---- 5 ------------------------------------------------------------------------

TrainedModel fit(ModelFamily f, const Matrix& X, const Labels& y, Hyperparams h = {}, std::uint64_t seed = 1) {
  return fit_model(ModelSpec{f, std::move(h), seed}, X, y);
}

double log_loss(const Vector& p, const Labels& y) {
  double s = 0;
  for (Index i = 0; i < p.size(); ++i) s -= y[static_cast<std::size_t>(i)] == 1 ? std::log(p[i]) : std::log(1.0 - p[i]);
  return s / static_cast<double>(p.size());
}

Outcome solvers() {
  Outcome o;
  Rng rng(5150);
  double worst_lr = 0, worst_mlp = 0, worst_obj = 0, worst_dual = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 10 + static_cast<Index>(rng.below(40)), p = 1 + static_cast<Index>(rng.below(10));
    Matrix X(n, p);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p; ++j) X(i, j) = rng.uniform(-2, 2);
    const Labels y = random_labels(static_cast<std::size_t>(n), rng);
    LogisticObjective obj(X, y, sample_weights(y, trial % 2 ? "balanced" : "none"), rng.uniform(0.1, 5.0));
    Vector theta(p + 1);
    for (Index j = 0; j <= p; ++j) theta[j] = rng.uniform(-1, 1);
    Vector g;
    obj.value_grad(theta, g);
    Vector fd(p + 1);
    for (Index j = 0; j <= p; ++j) {
      Vector a = theta, b = theta;
      a[j] += 1e-5;
      b[j] -= 1e-5;
      fd[j] = (obj.value(a) - obj.value(b)) / 2e-5;
    }
    worst_lr = std::max(worst_lr, (g - fd).norm() / std::max(g.norm(), 1e-12));
  }
  o.check(worst_lr < 1e-5, "logistic gradient error " + fmt("%.3g", worst_lr));

  for (int trial = 0; trial < 10; ++trial) {
    const Labels y = random_labels(60, rng);
    const Matrix X = blobs(y, 15, 0.4, rng);
    for (const char* cw : {"none", "balanced"}) {
      const auto a = fit(ModelFamily::LogisticRidge, X, y, {{"solver", std::string("lbfgs")}, {"class_weight", std::string(cw)}});
      const auto b =
          fit(ModelFamily::LogisticRidge, X, y, {{"solver", std::string("newton-cg")}, {"class_weight", std::string(cw)}});
      worst_obj = std::max(worst_obj, std::abs(a.as<LogisticModel>().objective - b.as<LogisticModel>().objective));
      o.check(a.predict_labels(X) == b.predict_labels(X), "solver labels differ");
    }
  }
  o.check(worst_obj <= 1e-4, "solver objective gap " + fmt("%.3g", worst_obj));

  for (int trial = 0; trial < 10; ++trial) {
    Matrix X(6, 3);
    for (Index i = 0; i < 6; ++i)
      for (Index j = 0; j < 3; ++j) X(i, j) = rng.uniform(-1, 1);
    const Labels y = random_labels(6, rng);
    MlpWeights w = init_mlp(3, 5, rng.next());
    w.b1 = Vector::Constant(5, 0.1);
    MlpWeights grad = w;
    mlp_loss_grad(w, X, y, 1e-2, grad);
    const Vector gv = grad.flatten(), theta = w.flatten();
    Vector fd(theta.size());
    MlpWeights probe = w, scratch_w = w;
    for (Index k = 0; k < theta.size(); ++k) {
      Vector a = theta, b = theta;
      a[k] += 1e-6;
      b[k] -= 1e-6;
      probe.assign(a);
      const double fa = mlp_loss_grad(probe, X, y, 1e-2, scratch_w);
      probe.assign(b);
      const double fb = mlp_loss_grad(probe, X, y, 1e-2, scratch_w);
      fd[k] = (fa - fb) / 2e-6;
    }
    worst_mlp = std::max(worst_mlp, (gv - fd).norm() / std::max(gv.norm(), 1e-12));
  }
  o.check(worst_mlp < 1e-4, "MLP gradient error " + fmt("%.3g", worst_mlp));

  for (int trial = 0; trial < 15; ++trial) {
    const Labels y = random_labels(40 + rng.below(40), rng);
    const Matrix X = blobs(y, 1 + static_cast<Index>(rng.below(6)), rng.uniform(0, 1.5), rng);
    const auto m = fit(ModelFamily::Gbdt, X, y,
                       {{"n_rounds", 30.0}, {"eta", rng.uniform(0.05, 1.0)},
                        {"max_depth", 1.0 + static_cast<double>(rng.below(5))}, {"lambda", rng.uniform(0, 3)}});
    const auto& gb = m.as<GbdtModel>();
    double prev = log_loss(gb.scores(X, 0), y);
    for (std::size_t r = 1; r <= 30; ++r) {
      const double cur = log_loss(gb.scores(X, r), y);
      o.check(cur <= prev + 1e-12, "GBDT loss rose at round " + std::to_string(r));
      prev = cur;
    }
  }

  for (int trial = 0; trial < 10; ++trial) {
    const Labels y = random_labels(30 + rng.below(30), rng);
    const Matrix X = blobs(y, 4, rng.uniform(0, 2), rng);
    const auto m = fit(ModelFamily::SvmRbf, X, y,
                       {{"C", rng.uniform(0.1, 10)}, {"class_weight", std::string(trial % 2 ? "balanced" : "none")}});
    const auto& s = m.as<SvmModel>();
    double balance = 0;
    for (std::size_t i = 0; i < s.alpha.size(); ++i) {
      worst_dual = std::max({worst_dual, -s.alpha[i], s.alpha[i] - s.upper[i]});
      balance += s.alpha[i] * s.signs[i];
    }
    worst_dual = std::max(worst_dual, std::abs(balance));
  }
  o.check(worst_dual <= 1e-8, "SVM dual violation " + fmt("%.3g", worst_dual));
  if (o.pass)
    o.detail = "LR grad " + fmt("%.2g", worst_lr) + ", solver gap " + fmt("%.2g", worst_obj) + ", MLP grad " +
               fmt("%.2g", worst_mlp) + ", SVM dual " + fmt("%.2g", worst_dual);
  return o;
}

// ---- 6, 7 ---------------------------------------------------------------------

struct SmallData {
  Matrix raw;
  Matrix global;
  Labels y;
};

SmallData small_synthetic(std::uint64_t seed) {
  SynthSpec s;
  s.n_class0 = 20;
  s.n_class1 = 40;
  s.n_samples = 60;
  s.n_features_pos = 24;
  s.n_features_neg = 16;
  s.n_informative = 8;
  s.seed = seed;
  const auto d = synthesize(s);
  const auto m = merge_modes(d.pos, d.neg);
  return {m.values(), preprocess_global(m), m.labels()};
}

CvOptions options(std::size_t k, std::uint64_t seed, PreprocessMode mode) {
  CvOptions o;
  o.k = k;
  o.seed = seed;
  o.preprocess = mode;
  return o;
}

Outcome leakage() {
  Outcome o;
  const auto d = small_synthetic(61);
  Rng rng(62);
  Matrix probe(8, d.raw.cols());
  for (Index i = 0; i < probe.rows(); ++i)
    for (Index j = 0; j < probe.cols(); ++j) probe(i, j) = std::exp2(rng.uniform(8, 20));
  std::size_t checked = 0;
  for (auto family : {ModelFamily::LogisticRidge, ModelFamily::Knn}) {
    auto opt = options(5, 63, PreprocessMode::FoldSafe);
    opt.keep_models = true;
    const ModelSpec spec{family, {}, 0};
    const auto grid = *default_grid(family);
    const auto before = run_nested_cv(d.raw, d.y, spec, grid, 5, opt);
    for (std::size_t fold = 0; fold < before.folds.size(); ++fold) {
      Matrix X = d.raw;
      Labels y = d.y;
      for (auto i : before.folds[fold].test_indices) {
        for (Index j = 0; j < X.cols(); ++j) X(static_cast<Index>(i), j) = std::exp2(rng.uniform(0, 30));
        y[i] = 1 - y[i];
      }
      auto opt2 = opt;
      opt2.plan = before.plan;
      const auto after = run_nested_cv(X, y, spec, grid, 5, opt2);
      const auto& a = before.artifacts[fold];
      const auto& b = after.artifacts[fold];
      const Vector pa = a.model->predict_scores(transform(*a.preprocess, probe));
      const Vector pb = b.model->predict_scores(transform(*b.preprocess, probe));
      o.check(pa == pb, std::string(short_name(family)) + " fold " + std::to_string(fold) + " probe changed");
      ++checked;
    }
  }
  if (o.pass) o.detail = std::to_string(checked) + " perturbed folds";
  return o;
}

Outcome nested_degeneracy() {
  Outcome o;
  const auto d = small_synthetic(71);
  std::size_t checked = 0;
  for (auto mode : {PreprocessMode::Global, PreprocessMode::FoldSafe}) {
    const Matrix& X = mode == PreprocessMode::Global ? d.global : d.raw;
    const std::vector<std::pair<ModelFamily, std::pair<std::string, HyperValue>>> cases{
        {ModelFamily::LogisticRidge, {"C", 0.3}},
        {ModelFamily::RandomForest, {"n_trees", 25.0}},
        {ModelFamily::Gbdt, {"n_rounds", 20.0}},
        {ModelFamily::SvmRbf, {"C", 2.0}},
        {ModelFamily::Mlp, {"hidden", 6.0}},
        {ModelFamily::Knn, {"k", 5.0}}};
    for (const auto& [family, axis] : cases) {
      const HyperGrid grid{family, {{axis.first, {axis.second}}}};
      const ModelSpec base{family, {}, 0};
      ModelSpec fixed = base;
      fixed.hyperparams[axis.first] = axis.second;
      const auto opt = options(5, 72, mode);
      const auto nested = run_nested_cv(X, d.y, base, grid, 3, opt);
      const auto plain = run_cv(X, d.y, fixed, opt);
      for (std::size_t i = 0; i < plain.folds.size(); ++i) {
        const std::string at = std::string(short_name(family)) + " fold " + std::to_string(i);
        o.check(nested.folds[i].test_indices == plain.folds[i].test_indices, at + " test indices");
        o.check(nested.folds[i].scores == plain.folds[i].scores, at + " scores");
        o.check(nested.folds[i].predicted == plain.folds[i].predicted, at + " labels");
        ++checked;
      }
    }
  }
  if (o.pass) o.detail = std::to_string(checked) + " folds compared";
  return o;
}

// ---- 8 ------------------------------------------------------------------------

Outcome synthetic_end_to_end() {
  Outcome o;
  const auto t0 = Clock::now();
  RunConfig cfg;
  cfg.synth = SynthSpec{};
  cfg.synth.seed = 7;
  cfg.synth_seed_set = true;
  cfg.datasets = {std::string(kMerged)};
  cfg.models = {ModelFamily::LogisticRidge, ModelFamily::DummyMostFrequent, ModelFamily::DummyUniform};
  cfg.modes = {RunMode::Tuned};
  cfg.seed = 11;
  cfg.threads = std::max(1u, std::thread::hardware_concurrency());
  const auto input = load_inputs(cfg);
  const auto merged_cols = merge_modes(input.pos, input.neg).cols();
  o.check(merged_cols == 2861, "merged features " + std::to_string(merged_cols));
  const auto report = run_benchmark(cfg, input);
  const auto* lr = report.find(kMerged, ModelFamily::LogisticRidge, RunMode::Tuned);
  o.check(lr != nullptr, "missing LR cell");
  if (!lr) return o;
  const auto& m = lr->summary.mean;
  o.check(m.auc > 0.8, "LR AUC " + fmt("%.4f", m.auc));
  for (auto dummy : {ModelFamily::DummyMostFrequent, ModelFamily::DummyUniform}) {
    const auto* c = report.find(kMerged, dummy, RunMode::Tuned);
    o.check(c != nullptr, "missing dummy cell");
    if (!c) continue;
    const auto& dm = c->summary.mean;
    const std::string who = std::string(short_name(dummy));
    o.check(m.auc > dm.auc, "AUC not above " + who);
    o.check(m.balanced_accuracy > dm.balanced_accuracy, "balanced accuracy not above " + who);
    o.check(m.mcc > dm.mcc, "MCC not above " + who);
  }
  const double s = seconds_since(t0);
  o.check(s < 900.0, "runtime " + fmt("%.1f s", s));
  if (o.pass)
    o.detail = "LR AUC " + fmt("%.4f", m.auc) + ", BA " + fmt("%.4f", m.balanced_accuracy) + ", MCC " +
               fmt("%.4f", m.mcc) + ", " + fmt("%.1f s", s);
  return o;
}

// ---- 9 ------------------------------------------------------------------------

Outcome determinism() {
  Outcome o;
  RunConfig cfg;
  cfg.synth.n_samples = 60;
  cfg.synth.n_class0 = 20;
  cfg.synth.n_class1 = 40;
  cfg.synth.n_features_pos = 40;
  cfg.synth.n_features_neg = 25;
  cfg.synth.n_informative = 10;
  cfg.k_outer = 5;
  cfg.k_inner = 3;
  cfg.seed = 99;
  cfg.grids[ModelFamily::RandomForest] = HyperGrid{ModelFamily::RandomForest, {{"n_trees", {10.0, 20.0}}}};
  cfg.grids[ModelFamily::Gbdt] = HyperGrid{ModelFamily::Gbdt, {{"n_rounds", {10.0, 20.0}}}};
  cfg.grids[ModelFamily::Mlp] = HyperGrid{ModelFamily::Mlp, {{"hidden", {4.0, 8.0}}}};
  cfg.hyperparameters[ModelFamily::RandomForest] = {{"n_trees", 15.0}};
  cfg.hyperparameters[ModelFamily::Gbdt] = {{"n_rounds", 15.0}};
  cfg.hyperparameters[ModelFamily::Mlp] = {{"hidden", 6.0}};
  std::vector<std::string> texts;
  for (std::size_t threads : {1u, 1u, 3u, 8u}) {
    cfg.threads = threads;
    cfg.out = scratch("determinism_" + std::to_string(texts.size())).string();
    cmd_benchmark(cfg);
    texts.push_back(slurp(fs::path(cfg.out) / "report.json"));
  }
  o.check(!texts[0].empty(), "empty report");
  o.check(texts[0] == texts[1], "two serial runs differ");
  o.check(texts[0] == texts[2], "3 threads differ from 1");
  o.check(texts[0] == texts[3], "8 threads differ from 1");
  if (o.pass) o.detail = "8 models x 3 datasets x 2 modes, 1/1/3/8 threads";
  return o;
}

// ---- 10 -----------------------------------------------------------------------

Outcome coefficients() {
  Outcome o;
  RunConfig cfg;
  cfg.synth.seed = 7;
  cfg.synth_seed_set = true;
  cfg.seed = 11;
  cfg.threads = std::max(1u, std::thread::hardware_concurrency());
  const auto input = load_inputs(cfg);
  const auto run = run_coefficients(cfg, input);
  for (const auto* rep : {&run.all, &run.known_only}) {
    const auto& e = rep->entries;
    o.check(e.size() == cfg.top_n, "expected " + std::to_string(cfg.top_n) + " entries");
    for (std::size_t i = 1; i < e.size(); ++i)
      o.check(std::abs(e[i].coefficient) <= std::abs(e[i - 1].coefficient), "ordering broken at " + std::to_string(i));
  }
  for (const auto& e : run.known_only.entries)
    o.check(!has_unknown_prefix(e.name), "unknown feature " + e.name + " in KNOWN_ONLY");
  const std::set<std::string> planted(input.informative.begin(), input.informative.end());
  std::size_t hits = 0;
  for (const auto& e : run.all.entries) hits += planted.count(e.name);
  o.check(hits >= 30, std::to_string(hits) + " of the top 50 are planted");
  if (o.pass) o.detail = std::to_string(hits) + " of the top 50 are planted";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"dummy baseline reproduction", dummy_baseline},
      {"metric oracle equivalence", metric_oracles},
      {"stratification invariants", stratification},
      {"preprocessing", preprocessing},
      {"solver correctness", solvers},
      {"leakage purity", leakage},
      {"nested-CV degeneracy", nested_degeneracy},
      {"synthetic end-to-end", synthetic_end_to_end},
      {"determinism", determinism},
      {"coefficient report", coefficients},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    failed += !out.pass;
    std::printf("%s criterion %zu: %s (%s)\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                out.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
