#pragma once

#include "metabench/error.hpp"
#include "metabench/models/hyperparams.hpp"
#include "metabench/models/optim.hpp"
#include "metabench/types.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace metabench {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(-m)) without overflow.
inline double log1pexp_neg(double m) { return std::max(-m, 0.0) + std::log1p(std::exp(-std::abs(m))); }

struct LogisticParams {
  double C = 1.0;
  std::string solver = "lbfgs";
  std::string class_weight = "none";
  std::size_t max_iter = 100;
  double tol = 1e-5;

  static LogisticParams from(const Hyperparams& h) {
    check_hyperparam_names(ModelFamily::LogisticRidge, h);
    LogisticParams p;
    p.C = hp::number(h, "C", p.C);
    p.solver = hp::text(h, "solver", p.solver);
    p.class_weight = hp::text(h, "class_weight", p.class_weight);
    p.max_iter = hp::count(h, "max_iter", p.max_iter);
    p.tol = hp::number(h, "tol", p.tol);
    if (!(p.C > 0.0) || !std::isfinite(p.C)) throw Error(ErrorCode::InvalidSpec, "C must be > 0");
    if (p.solver != "lbfgs" && p.solver != "newton-cg")
      throw Error(ErrorCode::UnknownSolver, "solver '" + p.solver + "'");
    if (!(p.tol > 0.0)) throw Error(ErrorCode::InvalidSpec, "tol must be > 0");
    return p;
  }
};

// J(w, b) = 1/2 |w|^2 + C * sum_i weight_i * log(1 + exp(-t_i (w.x_i + b))),
// t_i in {-1, +1}, bias unpenalized. Parameters are packed as [w; b].
class LogisticObjective {
 public:
  LogisticObjective(const Matrix& X, const Labels& y, std::vector<double> weights, double C)
      : X_(X), t_(static_cast<Index>(y.size())), cw_(static_cast<Index>(y.size())) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      t_[static_cast<Index>(i)] = y[i] == 1 ? 1.0 : -1.0;
      cw_[static_cast<Index>(i)] = C * weights[i];
    }
  }

  Index dim() const { return X_.cols() + 1; }

  double value(const Vector& theta) const {
    const Vector z = margins(theta);
    double loss = 0.0;
    for (Index i = 0; i < z.size(); ++i) loss += cw_[i] * log1pexp_neg(t_[i] * z[i]);
    return 0.5 * theta.head(X_.cols()).squaredNorm() + loss;
  }

  double value_grad(const Vector& theta, Vector& g) const {
    const Index p = X_.cols();
    const Vector z = margins(theta);
    Vector dz(z.size());
    double loss = 0.0;
    for (Index i = 0; i < z.size(); ++i) {
      const double m = t_[i] * z[i];
      loss += cw_[i] * log1pexp_neg(m);
      dz[i] = -cw_[i] * t_[i] * sigmoid(-m);
    }
    g.resize(p + 1);
    g.head(p).noalias() = X_.transpose() * dz;
    g.head(p) += theta.head(p);
    g[p] = dz.sum();
    return 0.5 * theta.head(p).squaredNorm() + loss;
  }

  // Caches the per-sample curvature C w_i s_i (1 - s_i) at theta.
  void prepare_hessian(const Vector& theta) {
    const Vector z = margins(theta);
    curvature_.resize(z.size());
    for (Index i = 0; i < z.size(); ++i) {
      const double s = sigmoid(z[i]);
      curvature_[i] = cw_[i] * s * (1.0 - s);
    }
  }

  Vector hessian_times(const Vector& v) const {
    const Index p = X_.cols();
    Vector u = X_ * v.head(p);
    u.array() += v[p];
    u.array() *= curvature_.array();
    Vector out(p + 1);
    out.head(p).noalias() = X_.transpose() * u;
    out.head(p) += v.head(p);
    out[p] = u.sum();
    return out;
  }

 private:
  Vector margins(const Vector& theta) const {
    Vector z = X_ * theta.head(X_.cols());
    z.array() += theta[X_.cols()];
    return z;
  }

  const Matrix& X_;
  Vector t_;
  Vector cw_;
  Vector curvature_;
};

struct LogisticModel {
  Vector weights;
  double bias = 0.0;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;

  Vector decision(const Matrix& X) const {
    Vector z = X * weights;
    z.array() += bias;
    return z;
  }

  Vector scores(const Matrix& X) const {
    Vector s = decision(X);
    for (Index i = 0; i < s.size(); ++i) s[i] = sigmoid(s[i]);
    return s;
  }
};

inline LogisticModel fit_logistic_ridge(const Matrix& X, const Labels& y, const LogisticParams& params) {
  if (!X.allFinite()) throw Error(ErrorCode::NonFinite, "logistic ridge input contains non-finite values");
  LogisticObjective obj(X, y, sample_weights(y, params.class_weight), params.C);
  optim::ValueGrad fg = [&](const Vector& theta, Vector& g) { return obj.value_grad(theta, g); };
  const Vector start = Vector::Zero(obj.dim());
  optim::Result r;
  if (params.solver == "lbfgs") {
    r = optim::lbfgs(fg, start, params.max_iter, params.tol, 10);
  } else {
    optim::HessianOracle hess{[&](const Vector& theta) { obj.prepare_hessian(theta); },
                              [&](const Vector& v) { return obj.hessian_times(v); }};
    r = optim::newton_cg(fg, hess, start, params.max_iter, params.tol);
  }
  LogisticModel m;
  m.weights = r.x.head(X.cols());
  m.bias = r.x[X.cols()];
  m.objective = r.value;
  m.iterations = r.iterations;
  m.converged = r.converged;
  return m;
}

}  // namespace metabench
