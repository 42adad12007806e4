#pragma once

#include "metabench/error.hpp"
#include "metabench/models/hyperparams.hpp"
#include "metabench/models/logistic.hpp"
#include "metabench/random.hpp"
#include "metabench/types.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace metabench {

struct MlpParams {
  std::size_t hidden = 100;
  double alpha = 1e-4;
  double step = 1e-3;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
  double tol = 1e-4;

  static MlpParams from(const Hyperparams& h) {
    check_hyperparam_names(ModelFamily::Mlp, h);
    MlpParams p;
    p.hidden = hp::count(h, "hidden", p.hidden);
    if (hp::text(h, "activation", "relu") != "relu")
      throw Error(ErrorCode::InvalidSpec, "only the rectifier (relu) activation is supported");
    p.alpha = hp::number(h, "alpha", p.alpha);
    p.step = hp::number(h, "step", p.step);
    p.max_epochs = hp::count(h, "max_epochs", p.max_epochs);
    p.patience = hp::count(h, "patience", p.patience);
    p.tol = hp::number(h, "tol", p.tol);
    if (p.hidden < 1) throw Error(ErrorCode::InvalidSpec, "hidden must be >= 1");
    if (!(p.alpha >= 0.0)) throw Error(ErrorCode::InvalidSpec, "alpha must be >= 0");
    if (!(p.step > 0.0)) throw Error(ErrorCode::InvalidSpec, "step must be > 0");
    if (p.patience < 1) throw Error(ErrorCode::InvalidSpec, "patience must be >= 1");
    return p;
  }
};

// One rectifier hidden layer feeding a sigmoid output unit.
struct MlpWeights {
  Matrix w1;  // features x hidden
  Vector b1;  // hidden
  Vector w2;  // hidden
  double b2 = 0.0;

  Index size() const { return w1.size() + b1.size() + w2.size() + 1; }

  Vector flatten() const {
    Vector v(size());
    Index k = 0;
    for (Index i = 0; i < w1.rows(); ++i)
      for (Index j = 0; j < w1.cols(); ++j) v[k++] = w1(i, j);
    v.segment(k, b1.size()) = b1;
    k += b1.size();
    v.segment(k, w2.size()) = w2;
    k += w2.size();
    v[k] = b2;
    return v;
  }

  void assign(const Vector& v) {
    Index k = 0;
    for (Index i = 0; i < w1.rows(); ++i)
      for (Index j = 0; j < w1.cols(); ++j) w1(i, j) = v[k++];
    b1 = v.segment(k, b1.size());
    k += b1.size();
    w2 = v.segment(k, w2.size());
    k += w2.size();
    b2 = v[k];
  }

  // Row by row so a sample's score does not depend on the batch it came in.
  Vector scores(const Matrix& X) const {
    Vector z(X.rows());
    Vector a(w1.cols());
    for (Index i = 0; i < X.rows(); ++i) {
      a.noalias() = w1.transpose() * X.row(i).transpose();
      a = (a + b1).cwiseMax(0.0);
      z[i] = sigmoid(a.dot(w2) + b2);
    }
    return z;
  }
};

// Mean binary cross-entropy + alpha/2 * (|W1|^2 + |w2|^2); the gradient is
// written to `grad` in the same shapes as `w`.
inline double mlp_loss_grad(const MlpWeights& w, const Matrix& X, const Labels& y, double alpha, MlpWeights& grad) {
  const auto n = static_cast<double>(X.rows());
  Matrix pre = X * w.w1;
  pre.rowwise() += w.b1.transpose();
  const Matrix act = pre.cwiseMax(0.0);
  Vector z = act * w.w2;
  double loss = 0.0;
  Vector dz(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double zi = z[i] + w.b2;
    const double m = y[static_cast<std::size_t>(i)] == 1 ? zi : -zi;
    loss += log1pexp_neg(m);
    dz[i] = (sigmoid(zi) - y[static_cast<std::size_t>(i)]) / n;
  }
  loss = loss / n + 0.5 * alpha * (w.w1.squaredNorm() + w.w2.squaredNorm());

  grad.w2.noalias() = act.transpose() * dz;
  grad.w2 += alpha * w.w2;
  grad.b2 = dz.sum();
  Matrix da = dz * w.w2.transpose();
  for (Index i = 0; i < da.rows(); ++i)
    for (Index j = 0; j < da.cols(); ++j)
      if (pre(i, j) <= 0.0) da(i, j) = 0.0;
  grad.w1.noalias() = X.transpose() * da;
  grad.w1 += alpha * w.w1;
  grad.b1 = da.colwise().sum().transpose();
  return loss;
}

inline MlpWeights init_mlp(Index features, std::size_t hidden, std::uint64_t seed) {
  Rng rng(seed);
  const auto h = static_cast<Index>(hidden);
  MlpWeights w{Matrix(features, h), Vector::Zero(h), Vector(h), 0.0};
  const double b1 = std::sqrt(6.0 / static_cast<double>(std::max<Index>(features, 1)));
  for (Index i = 0; i < w.w1.rows(); ++i)
    for (Index j = 0; j < w.w1.cols(); ++j) w.w1(i, j) = rng.uniform(-b1, b1);
  const double b2 = std::sqrt(6.0 / static_cast<double>(h));
  for (Index j = 0; j < h; ++j) w.w2[j] = rng.uniform(-b2, b2);
  return w;
}

struct MlpModel {
  MlpWeights weights;
  std::vector<double> loss_history;
  std::size_t epochs = 0;

  Vector scores(const Matrix& X) const { return weights.scores(X); }
};

// Full-batch Adam. Training stops when the loss has not improved by `tol`
// for `patience` consecutive epochs, or after max_epochs.
inline MlpModel fit_mlp(const Matrix& X, const Labels& y, const MlpParams& params, std::uint64_t seed) {
  if (!X.allFinite()) throw Error(ErrorCode::NonFinite, "MLP input contains non-finite values");
  MlpModel model;
  model.weights = init_mlp(X.cols(), params.hidden, seed);
  MlpWeights grad = model.weights;
  const Index dim = model.weights.size();
  Vector m1 = Vector::Zero(dim), m2 = Vector::Zero(dim);
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double best = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= params.max_epochs; ++epoch) {
    const double loss = mlp_loss_grad(model.weights, X, y, params.alpha, grad);
    if (!std::isfinite(loss))
      throw Error(ErrorCode::NonFinite, "MLP loss became non-finite at epoch " + std::to_string(epoch));
    model.loss_history.push_back(loss);
    stale = loss > best - params.tol ? stale + 1 : 0;
    best = std::min(best, loss);
    if (stale >= params.patience) break;

    const Vector g = grad.flatten();
    m1 = beta1 * m1 + (1.0 - beta1) * g;
    m2 = beta2 * m2 + (1.0 - beta2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(epoch));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(epoch));
    Vector theta = model.weights.flatten();
    theta.array() -= params.step * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
    model.weights.assign(theta);
    model.epochs = epoch;
  }
  return model;
}

}  // namespace metabench
