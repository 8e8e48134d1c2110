#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "neu/types.hpp"

namespace neu::optim {

using Objective = std::function<double(const Vector&)>;

enum class StopReason { converged_x, converged_f, gradient_small, budget, step_collapse };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::converged_x: return "simplex-diameter";
    case StopReason::converged_f: return "f-spread";
    case StopReason::gradient_small: return "gradient";
    case StopReason::budget: return "budget";
    case StopReason::step_collapse: return "step-collapse";
  }
  return "unknown";
}

struct OptimResult {
  Vector x;
  double f = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  int iterations = 0;
  StopReason reason = StopReason::budget;
};

struct NelderMeadOptions {
  /// Initial simplex offsets per coordinate; empty means 0.05 * max(1, |x0_i|).
  Vector initial_step;
  int max_evals = 10000;
  int max_iters = std::numeric_limits<int>::max();
  double x_tol = 1e-8;
  /// Relative spread of f over the simplex: f_max - f_min <= f_tol * |f_min|.
  double f_tol = 1e-10;
};

/// Reflection 1, expansion 2, contraction 0.5, shrink 0.5.
inline OptimResult nelder_mead(const Objective& f, const Vector& x0, const NelderMeadOptions& opts = {}) {
  const Index n = x0.size();
  if (n == 0) throw DomainError("nelder_mead: empty parameter vector");
  OptimResult out;
  auto eval = [&](const Vector& x) {
    ++out.evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::vector<Vector> simplex(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (Index i = 0; i < n; ++i) {
    const double step = opts.initial_step.size() == n ? opts.initial_step(i) : 0.05 * std::max(1.0, std::abs(x0(i)));
    simplex[i + 1](i) += step;
  }
  for (Index i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);
  if (std::none_of(fv.begin(), fv.end(), [](double v) { return std::isfinite(v); }))
    throw EvaluationError("nelder_mead: objective is non-finite at every initial vertex");

  std::vector<Index> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return fv[a] < fv[b]; });
    std::vector<Vector> s2;
    std::vector<double> f2;
    for (Index i : order) {
      s2.push_back(simplex[i]);
      f2.push_back(fv[i]);
    }
    simplex.swap(s2);
    fv.swap(f2);
  };

  sort_simplex();
  // constant objective: nothing to do
  if (fv.front() == fv.back() && std::isfinite(fv.front())) {
    out.x = x0;
    out.f = eval(x0);
    out.reason = StopReason::converged_f;
    return out;
  }
  while (true) {
    double diam = 0.0;
    for (Index i = 1; i <= n; ++i) diam = std::max(diam, (simplex[i] - simplex[0]).cwiseAbs().maxCoeff());
    if (diam < opts.x_tol) {
      out.reason = StopReason::converged_x;
      break;
    }
    if (std::isfinite(fv[n]) && fv[n] - fv[0] <= opts.f_tol * std::abs(fv[0])) {
      out.reason = StopReason::converged_f;
      break;
    }
    if (out.evaluations >= opts.max_evals || out.iterations >= opts.max_iters) {
      out.reason = StopReason::budget;
      break;
    }
    ++out.iterations;
    Vector centroid = Vector::Zero(n);
    for (Index i = 0; i < n; ++i) centroid += simplex[i];
    centroid /= double(n);
    const Vector xr = centroid + (centroid - simplex[n]);
    const double fr = eval(xr);
    if (fr < fv[0]) {
      const Vector xe = centroid + 2.0 * (centroid - simplex[n]);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[n] = xe;
        fv[n] = fe;
      } else {
        simplex[n] = xr;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      simplex[n] = xr;
      fv[n] = fr;
    } else {
      const bool outside = fr < fv[n];
      const Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid)) : Vector(centroid + 0.5 * (simplex[n] - centroid));
      const double fc = eval(xc);
      if (fc < (outside ? fr : fv[n])) {
        simplex[n] = xc;
        fv[n] = fc;
      } else {
        for (Index i = 1; i <= n; ++i) {
          simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
          fv[i] = eval(simplex[i]);
        }
      }
    }
    sort_simplex();
  }
  out.x = simplex[0];
  out.f = fv[0];
  return out;
}

}  // namespace neu::optim
