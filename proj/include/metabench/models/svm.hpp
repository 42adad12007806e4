#pragma once

#include "metabench/error.hpp"
#include "metabench/models/hyperparams.hpp"
#include "metabench/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace metabench {

struct SvmParams {
  double C = 1.0;
  HyperValue gamma = std::string("scale");  // "scale", "auto" or a positive number
  std::string class_weight = "none";
  double tol = 1e-3;
  std::size_t max_passes = 10000;

  static SvmParams from(const Hyperparams& h) {
    check_hyperparam_names(ModelFamily::SvmRbf, h);
    SvmParams p;
    p.C = hp::number(h, "C", p.C);
    if (auto it = h.find("gamma"); it != h.end()) p.gamma = it->second;
    p.class_weight = hp::text(h, "class_weight", p.class_weight);
    p.tol = hp::number(h, "tol", p.tol);
    p.max_passes = hp::count(h, "max_passes", p.max_passes);
    if (!(p.C > 0.0) || !std::isfinite(p.C)) throw Error(ErrorCode::InvalidSpec, "C must be > 0");
    if (const auto* s = std::get_if<std::string>(&p.gamma)) {
      if (*s != "scale" && *s != "auto") throw Error(ErrorCode::InvalidSpec, "gamma must be scale, auto or > 0");
    } else if (!(std::get<double>(p.gamma) > 0.0)) {
      throw Error(ErrorCode::InvalidSpec, "gamma must be > 0");
    }
    if (!(p.tol > 0.0)) throw Error(ErrorCode::InvalidSpec, "tol must be > 0");
    if (p.max_passes < 1) throw Error(ErrorCode::InvalidSpec, "max_passes must be >= 1");
    return p;
  }
};

// "scale" = 1 / (p * Var(X)) with Var over every entry; "auto" = 1 / p.
inline double resolve_rbf_gamma(const HyperValue& gamma, const Matrix& X) {
  const auto p = static_cast<double>(X.cols());
  if (const auto* d = std::get_if<double>(&gamma)) return *d;
  if (std::get<std::string>(gamma) == "auto") return 1.0 / p;
  const double mean = X.mean();
  const double var = (X.array() - mean).square().mean();
  return var > 0.0 ? 1.0 / (p * var) : 1.0;
}

inline double rbf_kernel(const auto& a, const auto& b, double gamma) {
  return std::exp(-gamma * (a - b).squaredNorm());
}

struct SvmModel {
  Matrix support;                 // support vectors, one per row
  std::vector<double> coef;       // alpha_i * t_i for each support vector
  double bias = 0.0;
  double gamma = 1.0;
  // Full dual solution kept for constraint checks.
  std::vector<double> alpha;
  std::vector<double> upper;      // per-sample box bound C * weight_i
  std::vector<double> signs;      // t_i in {-1, +1}
  std::size_t iterations = 0;
  bool converged = false;

  // Raw decision values sum_i alpha_i t_i K(x_i, x) + b.
  Vector scores(const Matrix& X) const {
    Vector s(X.rows());
    for (Index q = 0; q < X.rows(); ++q) {
      double acc = bias;
      for (Index k = 0; k < support.rows(); ++k) acc += coef[k] * rbf_kernel(support.row(k), X.row(q), gamma);
      s[q] = acc;
    }
    return s;
  }
};

// Soft-margin dual by SMO with second-order working-set selection:
//   min 1/2 a'Qa - e'a,  0 <= a_i <= C w_i,  t'a = 0,  Q_ij = t_i t_j K_ij.
// A pass is n pair updates; after max_passes passes the current iterate is
// returned with converged = false.
inline SvmModel fit_svm_rbf(const Matrix& X, const Labels& y, const SvmParams& params) {
  if (!X.allFinite()) throw Error(ErrorCode::NonFinite, "SVM input contains non-finite values");
  const auto n = static_cast<std::size_t>(X.rows());
  SvmModel m;
  m.gamma = resolve_rbf_gamma(params.gamma, X);
  const auto w = sample_weights(y, params.class_weight);
  m.signs.resize(n);
  m.upper.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.signs[i] = y[i] == 1 ? 1.0 : -1.0;
    m.upper[i] = params.C * w[i];
  }
  const auto& t = m.signs;
  const auto& ub = m.upper;

  const auto positives = std::count(y.begin(), y.end(), 1);
  if (positives == 0 || static_cast<std::size_t>(positives) == n) {
    // Single class: no margin to maximize, every decision value is +-1.
    m.alpha.assign(n, 0.0);
    m.bias = positives == 0 ? -1.0 : 1.0;
    m.support.resize(0, X.cols());
    m.converged = true;
    return m;
  }

  Matrix K(static_cast<Index>(n), static_cast<Index>(n));
  for (Index i = 0; i < K.rows(); ++i) {
    K(i, i) = 1.0;
    for (Index j = i + 1; j < K.cols(); ++j) K(i, j) = K(j, i) = rbf_kernel(X.row(i), X.row(j), m.gamma);
  }
  auto Q = [&](std::size_t i, std::size_t j) { return t[i] * t[j] * K(static_cast<Index>(i), static_cast<Index>(j)); };

  std::vector<double>& a = m.alpha;
  a.assign(n, 0.0);
  std::vector<double> G(n, -1.0);
  auto in_up = [&](std::size_t k) { return (t[k] > 0 && a[k] < ub[k]) || (t[k] < 0 && a[k] > 0); };
  auto in_low = [&](std::size_t k) { return (t[k] > 0 && a[k] > 0) || (t[k] < 0 && a[k] < ub[k]); };
  constexpr double kTau = 1e-12;

  const std::size_t max_iter = params.max_passes * std::max<std::size_t>(n, 1);
  while (true) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t k = 0; k < n; ++k)
      if (in_up(k) && -t[k] * G[k] >= gmax) gmax = -t[k] * G[k], i = k;
    double gmin = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    double obj_min = std::numeric_limits<double>::infinity();
    if (i < n) {
      for (std::size_t k = 0; k < n; ++k) {
        if (!in_low(k)) continue;
        gmin = std::min(gmin, -t[k] * G[k]);
        const double b = gmax + t[k] * G[k];
        if (b > 0.0) {
          double quad = K(static_cast<Index>(i), static_cast<Index>(i)) + K(static_cast<Index>(k), static_cast<Index>(k)) -
                        2.0 * K(static_cast<Index>(i), static_cast<Index>(k));
          if (quad <= 0.0) quad = kTau;
          if (-(b * b) / quad <= obj_min) obj_min = -(b * b) / quad, j = k;
        }
      }
    }
    if (i == n || j == n || gmax - gmin < params.tol) {
      m.converged = true;
      break;
    }
    if (m.iterations >= max_iter) break;
    ++m.iterations;

    const double ai_old = a[i], aj_old = a[j];
    const double Ci = ub[i], Cj = ub[j];
    if (t[i] != t[j]) {
      double quad = Q(i, i) + Q(j, j) + 2.0 * Q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) a[j] = 0, a[i] = diff;
      } else if (a[i] < 0) {
        a[i] = 0, a[j] = -diff;
      }
      if (diff > Ci - Cj) {
        if (a[i] > Ci) a[i] = Ci, a[j] = Ci - diff;
      } else if (a[j] > Cj) {
        a[j] = Cj, a[i] = Cj + diff;
      }
    } else {
      double quad = Q(i, i) + Q(j, j) - 2.0 * Q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > Ci) {
        if (a[i] > Ci) a[i] = Ci, a[j] = sum - Ci;
      } else if (a[j] < 0) {
        a[j] = 0, a[i] = sum;
      }
      if (sum > Cj) {
        if (a[j] > Cj) a[j] = Cj, a[i] = sum - Cj;
      } else if (a[i] < 0) {
        a[i] = 0, a[j] = sum;
      }
    }
    const double di = a[i] - ai_old, dj = a[j] - aj_old;
    for (std::size_t k = 0; k < n; ++k) G[k] += Q(k, i) * di + Q(k, j) * dj;
  }

  // Offset from free vectors when any exist, else the midpoint of the
  // feasible interval.
  double ub_r = std::numeric_limits<double>::infinity(), lb_r = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double yg = t[k] * G[k];
    if (a[k] >= ub[k]) {
      if (t[k] < 0) ub_r = std::min(ub_r, yg);
      else lb_r = std::max(lb_r, yg);
    } else if (a[k] <= 0) {
      if (t[k] > 0) ub_r = std::min(ub_r, yg);
      else lb_r = std::max(lb_r, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub_r + lb_r);
  if (!std::isfinite(rho)) rho = 0.0;
  m.bias = -rho;

  std::vector<Index> sv;
  for (std::size_t k = 0; k < n; ++k)
    if (a[k] > 0) sv.push_back(static_cast<Index>(k));
  m.support.resize(static_cast<Index>(sv.size()), X.cols());
  m.coef.resize(sv.size());
  for (std::size_t r = 0; r < sv.size(); ++r) {
    m.support.row(static_cast<Index>(r)) = X.row(sv[r]);
    m.coef[r] = a[static_cast<std::size_t>(sv[r])] * t[static_cast<std::size_t>(sv[r])];
  }
  return m;
}

}  // namespace metabench
