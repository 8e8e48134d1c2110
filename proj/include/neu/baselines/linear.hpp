#pragma once

#include <cmath>
#include <string>

#include "neu/types.hpp"

namespace neu::baselines {

/// Least squares on the design as given (no implicit intercept column).
inline Vector ols_fit(const Matrix& design, const Vector& responses) {
  require_dim(responses.size(), design.rows(), "ols_fit responses");
  require_finite(design, "ols_fit design");
  require_finite(responses, "ols_fit responses");
  if (design.rows() < design.cols()) throw NumericalError("ols_fit: fewer observations than columns");
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(1e-12);
  if (qr.rank() < design.cols())
    throw NumericalError("ols_fit: design has rank " + std::to_string(qr.rank()) + " < " +
                         std::to_string(design.cols()));
  return qr.solve(responses);
}

/// Prepends a column of ones.
inline Matrix with_intercept(const Matrix& x) {
  Matrix out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x;
  return out;
}

/// Penalty weights. alpha = 0 gives the LASSO and alpha = 1 gives Ridge:
/// penalty = lambda [(1 - alpha) |beta|_1 + alpha |beta|_2^2].
struct EnetSpec {
  double lambda = 0.0;
  double alpha = 0.5;

  void validate() const {
    if (!std::isfinite(lambda) || lambda < 0.0) throw ConfigurationError("EnetSpec: lambda must be >= 0");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigurationError("EnetSpec: alpha must lie in [0, 1]");
  }

  double penalty(const Vector& beta) const {
    return lambda * ((1.0 - alpha) * beta.lpNorm<1>() + alpha * beta.squaredNorm());
  }
};

struct EnetOptions {
  /// Rescale columns to unit norm before the solve (coefficients are mapped
  /// back, the penalty then acts on the rescaled coefficients).
  bool standardize = false;
  double tol = 1e-14;
  int max_sweeps = 200000;
};

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

/// Minimises RSS + penalty by cyclic coordinate descent. Stops when no
/// coordinate moves by more than tol * max(1, |beta|_inf) in a sweep.
inline Vector enet_fit(const Matrix& design, const Vector& responses, const EnetSpec& spec,
                       const EnetOptions& opts = {}) {
  spec.validate();
  require_dim(responses.size(), design.rows(), "enet_fit responses");
  require_finite(design, "enet_fit design");
  require_finite(responses, "enet_fit responses");
  const Index p = design.cols();
  Vector scale = Vector::Ones(p);
  Matrix x = design;
  if (opts.standardize) {
    for (Index j = 0; j < p; ++j) {
      const double n = x.col(j).norm();
      if (n > 0.0) {
        scale(j) = n;
        x.col(j) /= n;
      }
    }
  }
  const Vector z = x.colwise().squaredNorm().transpose();
  const double l1 = spec.lambda * (1.0 - spec.alpha);
  const double l2 = spec.lambda * spec.alpha;
  Vector beta = Vector::Zero(p);
  Vector resid = responses;
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Index j = 0; j < p; ++j) {
      const double denom = 2.0 * (z(j) + l2);
      if (denom == 0.0) continue;  // zero column with no ridge term: coefficient stays 0
      const double rho = x.col(j).dot(resid) + z(j) * beta(j);
      const double next = soft_threshold(2.0 * rho, l1) / denom;
      const double delta = next - beta(j);
      if (delta != 0.0) {
        resid.noalias() -= delta * x.col(j);
        beta(j) = next;
        max_change = std::max(max_change, std::abs(delta) * std::sqrt(std::max(z(j), 1e-300)));
      }
    }
    const double size = std::max(1.0, (x * beta).cwiseAbs().maxCoeff());
    if (max_change <= opts.tol * size) {
      return beta.cwiseQuotient(scale);
    }
    // keep the residual from drifting over long runs
    if (sweep % 64 == 63) resid = responses - x * beta;
  }
  throw ConvergenceError("enet_fit: no convergence within " + std::to_string(opts.max_sweeps) + " sweeps");
}

inline double enet_objective(const Matrix& design, const Vector& responses, const Vector& beta, const EnetSpec& spec) {
  return (responses - design * beta).squaredNorm() + spec.penalty(beta);
}

/// Linear model with an unpenalised intercept.
struct LinearModel {
  double intercept = 0.0;
  Vector beta;

  double predict(const Eigen::Ref<const Vector>& x) const { return intercept + beta.dot(x); }
  Vector predict_rows(const Matrix& x) const { return (x * beta).array() + intercept; }
};

/// ENET with an intercept handled by centring (the intercept is not penalised).
inline LinearModel enet_fit_centered(const Matrix& design, const Vector& responses, const EnetSpec& spec,
                                     const EnetOptions& opts = {}) {
  const Vector xbar = design.colwise().mean().transpose();
  const double ybar = responses.mean();
  const Matrix xc = design.rowwise() - xbar.transpose();
  const Vector yc = responses.array() - ybar;
  LinearModel m;
  m.beta = enet_fit(xc, yc, spec, opts);
  m.intercept = ybar - xbar.dot(m.beta);
  return m;
}

inline LinearModel ols_fit_centered(const Matrix& design, const Vector& responses) {
  const Vector coef = ols_fit(with_intercept(design), responses);
  return LinearModel{coef(0), coef.tail(coef.size() - 1)};
}

/// Minimum-norm least squares with an intercept; defined for rank-deficient
/// designs (a zero column gets coefficient 0).
inline LinearModel ols_fit_min_norm(const Matrix& design, const Vector& responses) {
  require_dim(responses.size(), design.rows(), "ols_fit_min_norm responses");
  require_finite(design, "ols_fit_min_norm design");
  require_finite(responses, "ols_fit_min_norm responses");
  const Vector xbar = design.colwise().mean().transpose();
  const double ybar = responses.mean();
  const Matrix xc = design.rowwise() - xbar.transpose();
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(xc);
  cod.setThreshold(1e-12);
  LinearModel m;
  m.beta = cod.solve(Vector(responses.array() - ybar));
  m.intercept = ybar - xbar.dot(m.beta);
  return m;
}

}  // namespace neu::baselines
