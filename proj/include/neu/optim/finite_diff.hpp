#pragma once

#include <cmath>

#include "neu/optim/nelder_mead.hpp"

namespace neu::optim {

struct FiniteDiffOptions {
  /// Difference step is h_rel * max(1, |x_i|) per coordinate.
  double h_rel = 1e-6;
  double initial_step = 1.0;
  double grad_tol = 1e-6;
  double min_step = 1e-16;
  int max_iters = 1000;
  int max_evals = 100000;
};

/// Gradient descent with central-difference gradients and backtracking
/// (step halved until the objective decreases).
inline OptimResult finite_diff_descent(const Objective& f, const Vector& x0, const FiniteDiffOptions& opts = {}) {
  OptimResult out;
  auto eval = [&](const Vector& x) {
    ++out.evaluations;
    return f(x);
  };
  Vector x = x0;
  double fx = eval(x);
  if (!std::isfinite(fx)) throw EvaluationError("finite_diff_descent: objective is non-finite at x0");
  double step = opts.initial_step;
  out.reason = StopReason::budget;
  for (; out.iterations < opts.max_iters && out.evaluations < opts.max_evals; ++out.iterations) {
    Vector grad(x.size());
    for (Index i = 0; i < x.size(); ++i) {
      const double h = opts.h_rel * std::max(1.0, std::abs(x(i)));
      Vector xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      const double fp = eval(xp), fm = eval(xm);
      if (!std::isfinite(fp) || !std::isfinite(fm)) throw EvaluationError("finite_diff_descent: non-finite objective");
      grad(i) = (fp - fm) / (2.0 * h);
    }
    if (grad.norm() < opts.grad_tol) {
      out.reason = StopReason::gradient_small;
      break;
    }
    bool moved = false;
    // allow the step to grow back after a run of successes
    step = std::min(opts.initial_step, 2.0 * step);
    while (step >= opts.min_step && out.evaluations < opts.max_evals) {
      const Vector cand = x - step * grad;
      const double fc = eval(cand);
      if (std::isfinite(fc) && fc < fx) {
        x = cand;
        fx = fc;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      out.reason = step < opts.min_step ? StopReason::step_collapse : StopReason::budget;
      break;
    }
  }
  out.x = x;
  out.f = fx;
  return out;
}

}  // namespace neu::optim
