#pragma once

#include "metabench/error.hpp"
#include "metabench/models/dummy.hpp"
#include "metabench/models/forest.hpp"
#include "metabench/models/gbdt.hpp"
#include "metabench/models/hyperparams.hpp"
#include "metabench/models/knn.hpp"
#include "metabench/models/logistic.hpp"
#include "metabench/models/mlp.hpp"
#include "metabench/models/svm.hpp"
#include "metabench/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace metabench {

using json = nlohmann::ordered_json;

struct ModelSpec {
  ModelFamily family = ModelFamily::LogisticRidge;
  Hyperparams hyperparams;
  std::uint64_t seed = 0;
};

using FittedParams = std::variant<LogisticModel, ForestModel, GbdtModel, SvmModel, MlpModel, KnnModel, DummyModel>;

inline double decision_threshold(ModelFamily f) { return f == ModelFamily::SvmRbf ? 0.0 : 0.5; }

// Fitted, immutable model. Scores are finite; labels are scores thresholded
// at `threshold()` (score >= threshold -> 1), except the uniform dummy whose
// labels are seeded coin flips.
class TrainedModel {
 public:
  TrainedModel(ModelSpec spec, Index features, FittedParams fitted)
      : spec_(std::move(spec)), features_(features), fitted_(std::move(fitted)) {}

  ModelFamily family() const { return spec_.family; }
  const ModelSpec& spec() const { return spec_; }
  Index feature_count() const { return features_; }
  double threshold() const { return decision_threshold(spec_.family); }
  const FittedParams& fitted() const { return fitted_; }

  template <typename T>
  const T& as() const {
    return std::get<T>(fitted_);
  }

  // True when an iterative solver stopped at its iteration cap.
  bool hit_iteration_cap() const {
    if (const auto* lr = std::get_if<LogisticModel>(&fitted_)) return !lr->converged;
    if (const auto* svm = std::get_if<SvmModel>(&fitted_)) return !svm->converged;
    return false;
  }

  Vector predict_scores(const Matrix& X) const {
    check_shape(X);
    return std::visit([&](const auto& m) -> Vector { return m.scores(X); }, fitted_);
  }

  Labels predict_labels(const Matrix& X) const {
    check_shape(X);
    if (const auto* d = std::get_if<DummyModel>(&fitted_)) return d->labels(X);
    const Vector s = predict_scores(X);
    Labels out(static_cast<std::size_t>(s.size()));
    for (Index i = 0; i < s.size(); ++i) out[static_cast<std::size_t>(i)] = s[i] >= threshold() ? 1 : 0;
    return out;
  }

 private:
  void check_shape(const Matrix& X) const {
    if (X.cols() != features_)
      throw Error(ErrorCode::ShapeMismatch, "model expects " + std::to_string(features_) + " features, got " +
                                                std::to_string(X.cols()));
  }

  ModelSpec spec_;
  Index features_ = 0;
  FittedParams fitted_;
};

inline void validate_spec(const ModelSpec& spec) {
  check_hyperparam_names(spec.family, spec.hyperparams);
  switch (spec.family) {
    case ModelFamily::LogisticRidge: LogisticParams::from(spec.hyperparams); break;
    case ModelFamily::RandomForest: ForestParams::from(spec.hyperparams); break;
    case ModelFamily::Gbdt: GbdtParams::from(spec.hyperparams); break;
    case ModelFamily::SvmRbf: SvmParams::from(spec.hyperparams); break;
    case ModelFamily::Mlp: MlpParams::from(spec.hyperparams); break;
    case ModelFamily::Knn: KnnParams::from(spec.hyperparams); break;
    default: break;
  }
}

inline TrainedModel fit_model(const ModelSpec& spec, const Matrix& X, const Labels& y) {
  if (static_cast<std::size_t>(X.rows()) != y.size())
    throw Error(ErrorCode::ShapeMismatch, "feature rows and labels differ in length");
  if (y.empty()) throw Error(ErrorCode::EmptyTable, "no training samples");
  for (int v : y)
    if (v != 0 && v != 1) throw Error(ErrorCode::BadLabel, "labels must be 0 or 1");
  if (!X.allFinite()) throw Error(ErrorCode::NonFinite, "training features contain non-finite values");
  const auto& h = spec.hyperparams;
  auto fitted = [&]() -> FittedParams {
    switch (spec.family) {
      case ModelFamily::LogisticRidge: return fit_logistic_ridge(X, y, LogisticParams::from(h));
      case ModelFamily::RandomForest: return fit_random_forest(X, y, ForestParams::from(h), spec.seed);
      case ModelFamily::Gbdt: return fit_gbdt(X, y, GbdtParams::from(h));
      case ModelFamily::SvmRbf: return fit_svm_rbf(X, y, SvmParams::from(h));
      case ModelFamily::Mlp: return fit_mlp(X, y, MlpParams::from(h), spec.seed);
      case ModelFamily::Knn: return fit_knn(X, y, KnnParams::from(h));
      case ModelFamily::DummyMostFrequent:
        check_hyperparam_names(spec.family, h);
        return fit_dummy(y, false, spec.seed);
      case ModelFamily::DummyUniform:
        check_hyperparam_names(spec.family, h);
        return fit_dummy(y, true, spec.seed);
    }
    throw Error(ErrorCode::InvalidSpec, "unknown model family");
  }();
  return TrainedModel(spec, X.cols(), std::move(fitted));
}

// ---- JSON ------------------------------------------------------------------

inline json to_json(const Hyperparams& h) {
  json j = json::object();
  for (const auto& [k, v] : h) {
    if (const auto* d = std::get_if<double>(&v)) j[k] = *d;
    else j[k] = std::get<std::string>(v);
  }
  return j;
}

inline Hyperparams hyperparams_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Config, "hyperparameters must be a JSON object");
  Hyperparams h;
  for (const auto& [k, v] : j.items()) {
    if (v.is_number()) h[k] = v.get<double>();
    else if (v.is_string()) h[k] = v.get<std::string>();
    else if (v.is_boolean()) h[k] = v.get<bool>() ? 1.0 : 0.0;
    else if (v.is_null()) h[k] = std::string("none");
    else throw Error(ErrorCode::Config, "hyperparameter '" + k + "' must be a number or string");
  }
  return h;
}

namespace detail {

inline json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

inline Vector json_vector(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
  return rows;
}

inline Matrix json_matrix(const json& j, Index cols) {
  Matrix m(static_cast<Index>(j.size()), cols);
  for (Index i = 0; i < m.rows(); ++i) {
    const auto row = j[static_cast<std::size_t>(i)].get<std::vector<double>>();
    if (static_cast<Index>(row.size()) != cols) throw Error(ErrorCode::BadFormat, "matrix row length mismatch");
    for (Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

inline json trees_json(const std::vector<DecisionTree>& trees) {
  json out = json::array();
  for (const auto& t : trees) {
    json tj;
    std::vector<int> feature, left, right;
    std::vector<double> threshold, value;
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature), left.push_back(n.left), right.push_back(n.right);
      threshold.push_back(n.threshold), value.push_back(n.value);
    }
    tj["feature"] = feature;
    tj["threshold"] = threshold;
    tj["left"] = left;
    tj["right"] = right;
    tj["value"] = value;
    out.push_back(std::move(tj));
  }
  return out;
}

inline std::vector<DecisionTree> json_trees(const json& j) {
  std::vector<DecisionTree> trees;
  for (const auto& tj : j) {
    const auto feature = tj.at("feature").get<std::vector<int>>();
    const auto left = tj.at("left").get<std::vector<int>>();
    const auto right = tj.at("right").get<std::vector<int>>();
    const auto threshold = tj.at("threshold").get<std::vector<double>>();
    const auto value = tj.at("value").get<std::vector<double>>();
    DecisionTree t;
    for (std::size_t k = 0; k < feature.size(); ++k) t.nodes.push_back({feature[k], threshold[k], left[k], right[k], value[k]});
    trees.push_back(std::move(t));
  }
  return trees;
}

}  // namespace detail

inline constexpr int kModelFormatVersion = 1;

inline json to_json(const TrainedModel& model) {
  json j;
  j["format"] = "metabench-model";
  j["version"] = kModelFormatVersion;
  j["family"] = std::string(family_id(model.family()));
  j["hyperparameters"] = to_json(model.spec().hyperparams);
  j["seed"] = model.spec().seed;
  j["feature_count"] = model.feature_count();
  j["threshold"] = model.threshold();
  json p;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LogisticModel>) {
          p["weights"] = detail::vector_json(m.weights);
          p["bias"] = m.bias;
          p["objective"] = m.objective;
          p["iterations"] = m.iterations;
          p["converged"] = m.converged;
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          p["trees"] = detail::trees_json(m.trees);
        } else if constexpr (std::is_same_v<T, GbdtModel>) {
          p["base_margin"] = m.base_margin;
          p["eta"] = m.eta;
          p["constant"] = m.constant;
          p["constant_score"] = m.constant_score;
          p["trees"] = detail::trees_json(m.trees);
        } else if constexpr (std::is_same_v<T, SvmModel>) {
          p["gamma"] = m.gamma;
          p["bias"] = m.bias;
          p["coef"] = m.coef;
          p["support"] = detail::matrix_json(m.support);
          p["iterations"] = m.iterations;
          p["converged"] = m.converged;
        } else if constexpr (std::is_same_v<T, MlpModel>) {
          p["w1"] = detail::matrix_json(m.weights.w1);
          p["b1"] = detail::vector_json(m.weights.b1);
          p["w2"] = detail::vector_json(m.weights.w2);
          p["b2"] = m.weights.b2;
          p["epochs"] = m.epochs;
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          p["k"] = m.k;
          p["train"] = detail::matrix_json(m.train);
          p["labels"] = m.labels;
        } else if constexpr (std::is_same_v<T, DummyModel>) {
          p["uniform"] = m.uniform;
          p["prior"] = m.prior;
          p["majority"] = m.majority;
          p["seed"] = m.seed;
        }
      },
      model.fitted());
  j["params"] = std::move(p);
  return j;
}

inline TrainedModel model_from_json(const json& j) {
  try {
    if (j.at("format") != "metabench-model") throw Error(ErrorCode::BadFormat, "not a model document");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw Error(ErrorCode::BadFormat, "unsupported model format version");
    ModelSpec spec{parse_family(j.at("family").get<std::string>()), hyperparams_from_json(j.at("hyperparameters")),
                   j.at("seed").get<std::uint64_t>()};
    const auto features = j.at("feature_count").get<Index>();
    const json& p = j.at("params");
    FittedParams fitted;
    switch (spec.family) {
      case ModelFamily::LogisticRidge: {
        LogisticModel m;
        m.weights = detail::json_vector(p.at("weights"));
        m.bias = p.at("bias");
        m.objective = p.at("objective");
        m.iterations = p.at("iterations");
        m.converged = p.at("converged");
        fitted = std::move(m);
        break;
      }
      case ModelFamily::RandomForest: fitted = ForestModel{detail::json_trees(p.at("trees"))}; break;
      case ModelFamily::Gbdt: {
        GbdtModel m;
        m.base_margin = p.at("base_margin");
        m.eta = p.at("eta");
        m.constant = p.at("constant");
        m.constant_score = p.at("constant_score");
        m.trees = detail::json_trees(p.at("trees"));
        fitted = std::move(m);
        break;
      }
      case ModelFamily::SvmRbf: {
        SvmModel m;
        m.gamma = p.at("gamma");
        m.bias = p.at("bias");
        m.coef = p.at("coef").get<std::vector<double>>();
        m.support = detail::json_matrix(p.at("support"), features);
        m.iterations = p.at("iterations");
        m.converged = p.at("converged");
        fitted = std::move(m);
        break;
      }
      case ModelFamily::Mlp: {
        MlpModel m;
        const Vector b1 = detail::json_vector(p.at("b1"));
        m.weights.w1 = detail::json_matrix(p.at("w1"), b1.size());
        m.weights.b1 = b1;
        m.weights.w2 = detail::json_vector(p.at("w2"));
        m.weights.b2 = p.at("b2");
        m.epochs = p.at("epochs");
        fitted = std::move(m);
        break;
      }
      case ModelFamily::Knn: {
        KnnModel m;
        m.k = p.at("k");
        m.train = detail::json_matrix(p.at("train"), features);
        m.labels = p.at("labels").get<Labels>();
        fitted = std::move(m);
        break;
      }
      case ModelFamily::DummyMostFrequent:
      case ModelFamily::DummyUniform: {
        DummyModel m;
        m.uniform = p.at("uniform");
        m.prior = p.at("prior");
        m.majority = p.at("majority");
        m.seed = p.at("seed");
        fitted = m;
        break;
      }
    }
    return TrainedModel(std::move(spec), features, std::move(fitted));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadFormat, std::string("model document: ") + e.what());
  }
}

}  // namespace metabench
