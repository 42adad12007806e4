#pragma once

#include "metabench/types.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>

namespace metabench::optim {

// f(x) and its gradient written into g.
using ValueGrad = std::function<double(const Vector& x, Vector& g)>;
// Hessian-vector product at the point last passed to prepare().
struct HessianOracle {
  std::function<void(const Vector& x)> prepare;
  std::function<Vector(const Vector& v)> apply;
};

struct Result {
  Vector x;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct LineSearchResult {
  double step = 0.0;
  double value = 0.0;
  bool ok = false;
};

namespace detail {

// Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db), or the
// bisection point when the interpolant is unusable.
inline double cubic_step(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  const double lo = std::min(a, b), hi = std::max(a, b);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double t = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
    const double margin = 0.1 * (hi - lo);
    if (std::isfinite(t) && t > lo + margin && t < hi - margin) return t;
  }
  return 0.5 * (a + b);
}

}  // namespace detail

// Strong Wolfe line search (bracketing + zoom). On success x and g hold the
// new point and gradient.
inline LineSearchResult strong_wolfe(const ValueGrad& fg, Vector& x, Vector& g, double f0, const Vector& dir,
                                     double step0, double c1 = 1e-4, double c2 = 0.9) {
  const Vector x0 = x;
  const double d0 = g.dot(dir);
  Vector gt(x.size());
  auto eval = [&](double a, double& fa, double& da) {
    x = x0 + a * dir;
    fa = fg(x, gt);
    da = gt.dot(dir);
  };

  double a_prev = 0.0, f_prev = f0, d_prev = d0;
  double a = step0;
  constexpr int kMaxBracket = 40;
  constexpr int kMaxZoom = 40;

  auto zoom = [&](double lo, double flo, double dlo, double hi, double fhi, double dhi) -> LineSearchResult {
    for (int it = 0; it < kMaxZoom; ++it) {
      const double aj = detail::cubic_step(lo, flo, dlo, hi, fhi, dhi);
      double fj, dj;
      eval(aj, fj, dj);
      if (!std::isfinite(fj) || fj > f0 + c1 * aj * d0 || fj >= flo) {
        hi = aj, fhi = fj, dhi = dj;
      } else {
        if (std::abs(dj) <= -c2 * d0) {
          g = gt;
          return {aj, fj, true};
        }
        if (dj * (hi - lo) >= 0.0) hi = lo, fhi = flo, dhi = dlo;
        lo = aj, flo = fj, dlo = dj;
      }
      if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) break;
    }
    // Interval collapsed: accept the best sufficient-decrease point found.
    if (lo > 0.0) {
      double fl, dl;
      eval(lo, fl, dl);
      g = gt;
      return {lo, fl, true};
    }
    x = x0;
    return {0.0, f0, false};
  };

  for (int i = 0; i < kMaxBracket; ++i) {
    double fa, da;
    eval(a, fa, da);
    if (!std::isfinite(fa) || fa > f0 + c1 * a * d0 || (i > 0 && fa >= f_prev)) {
      if (!std::isfinite(fa)) {
        a *= 0.5;
        continue;
      }
      return zoom(a_prev, f_prev, d_prev, a, fa, da);
    }
    if (std::abs(da) <= -c2 * d0) {
      g = gt;
      return {a, fa, true};
    }
    if (da >= 0.0) return zoom(a, fa, da, a_prev, f_prev, d_prev);
    a_prev = a, f_prev = fa, d_prev = da;
    a *= 2.0;
  }
  x = x0;
  return {0.0, f0, false};
}

// Limited-memory BFGS with the two-loop recursion. Stops when the gradient
// infinity-norm drops to gtol or after max_iter iterations.
inline Result lbfgs(const ValueGrad& fg, Vector x, std::size_t max_iter, double gtol, std::size_t memory = 10) {
  Vector g(x.size());
  double f = fg(x, g);
  Result r;
  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double> alpha(memory);
  while (true) {
    if (g.lpNorm<Eigen::Infinity>() <= gtol) {
      r.converged = true;
      break;
    }
    if (r.iterations >= max_iter) break;
    ++r.iterations;

    Vector q = -g;
    const std::size_t m = s_hist.size();
    for (std::size_t i = m; i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (m > 0) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    if (g.dot(q) >= 0.0) {
      s_hist.clear(), y_hist.clear(), rho_hist.clear();
      q = -g;
    }
    const double step0 = m == 0 ? std::min(1.0, 1.0 / g.lpNorm<1>()) : 1.0;

    const Vector x_old = x, g_old = g;
    const auto ls = strong_wolfe(fg, x, g, f, q, step0);
    if (!ls.ok) break;
    f = ls.value;
    Vector s = x - x_old, y = g - g_old;
    const double sy = s.dot(y);
    if (sy > 1e-12 * y.squaredNorm()) {
      if (s_hist.size() == memory) s_hist.pop_front(), y_hist.pop_front(), rho_hist.pop_front();
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
  }
  r.x = std::move(x);
  r.value = f;
  return r;
}

// Truncated Newton: each outer step solves H d = -g by conjugate gradients
// using only Hessian-vector products, then takes a Wolfe step along d.
inline Result newton_cg(const ValueGrad& fg, const HessianOracle& hess, Vector x, std::size_t max_iter, double gtol,
                        std::size_t max_cg = 250) {
  Vector g(x.size());
  double f = fg(x, g);
  Result r;
  while (true) {
    if (g.lpNorm<Eigen::Infinity>() <= gtol) {
      r.converged = true;
      break;
    }
    if (r.iterations >= max_iter) break;
    ++r.iterations;

    hess.prepare(x);
    const double gnorm = g.norm();
    const double tol = std::min(0.5, std::sqrt(gnorm)) * gnorm;
    Vector d = Vector::Zero(x.size());
    Vector res = -g;
    Vector p = res;
    double rr = res.squaredNorm();
    for (std::size_t it = 0; it < max_cg && std::sqrt(rr) > tol; ++it) {
      const Vector hp = hess.apply(p);
      const double curv = p.dot(hp);
      if (curv <= 0.0) {
        if (it == 0) d = -g;
        break;
      }
      const double a = rr / curv;
      d += a * p;
      res -= a * hp;
      const double rr_new = res.squaredNorm();
      p = res + (rr_new / rr) * p;
      rr = rr_new;
    }
    if (g.dot(d) >= 0.0) d = -g;

    const auto ls = strong_wolfe(fg, x, g, f, d, 1.0);
    if (!ls.ok) break;
    f = ls.value;
  }
  r.x = std::move(x);
  r.value = f;
  return r;
}

}  // namespace metabench::optim
