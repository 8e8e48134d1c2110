#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "neu/types.hpp"

namespace neu::learning {

using Params = Vector;
using Hyper = std::vector<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Train/validation/test point sets, one point per row. For supervised
/// problems the last `response_dims` columns hold the responses.
struct Dataset {
  Matrix train;
  Matrix validation;
  Matrix test;

  Dataset() = default;
  Dataset(Matrix tr, Matrix va = {}, Matrix te = {})
      : train(std::move(tr)), validation(std::move(va)), test(std::move(te)) {
    validate();
  }

  Index dim() const { return train.cols(); }
  Index n_train() const { return train.rows(); }
  Index n_validation() const { return validation.rows(); }

  void validate() const {
    if (train.rows() < 1) throw DomainError("Dataset: training set must be nonempty");
    if (validation.rows() > 0) require_dim(validation.cols(), train.cols(), "Dataset validation");
    if (test.rows() > 0) require_dim(test.cols(), train.cols(), "Dataset test");
    require_finite(train, "Dataset train");
    require_finite(validation, "Dataset validation");
    require_finite(test, "Dataset test");
  }
};

/// Inner-problem uniqueness diagnostic returned by an algorithm.
struct InnerRegularity {
  bool regular = true;
  double metric = 0.0;
  std::string detail;
};

/// (loss_in, loss_out, Gamma, pattern) with an inner minimiser.
///
/// `pattern(beta, p)` maps a full point to its fitted counterpart in the same
/// space: the projection onto the fitted line/graph/subspace. For supervised
/// algorithms only the trailing `response_dims` coordinates change.
struct ObjectiveLearningAlgorithm {
  std::string name;
  std::function<double(const Params&, const Hyper&, const Matrix&)> loss_in;
  std::function<double(const Params&, const Hyper&, const Matrix&)> loss_out;
  std::vector<Hyper> gamma_grid;
  std::function<Point(const Params&, const Point&)> pattern;
  std::function<Params(const Hyper&, const Matrix&)> fit_inner;
  int response_dims = 0;
  std::function<InnerRegularity(const Hyper&, const Matrix&)> inner_regularity;
};

struct Evaluation {
  Params beta_hat;
  Hyper gamma_hat;
  std::size_t gamma_index = 0;
  double loss_in_at_opt = kInfinity;
  double loss_out_at_opt = kInfinity;
  /// Another grid point reached the same validation loss (smallest index kept).
  bool tie = false;
};

namespace detail {

inline double finite_or_inf(double v) { return std::isfinite(v) ? v : kInfinity; }

}  // namespace detail

/// Fits beta(gamma) for every gamma and keeps the gamma with the smallest
/// validation loss. With no validation points the first grid entry is used.
inline Evaluation optimal_evaluation(const ObjectiveLearningAlgorithm& ola, const Matrix& train,
                                     const Matrix& validation, double tie_tol = 0.0) {
  if (ola.gamma_grid.empty()) throw ConfigurationError(ola.name + ": empty hyperparameter grid");
  if (train.rows() < 1) throw DomainError(ola.name + ": empty training set");
  const bool no_validation = validation.rows() == 0;
  const std::size_t n_grid = no_validation ? 1 : ola.gamma_grid.size();

  Evaluation best;
  bool found = false;
  for (std::size_t g = 0; g < n_grid; ++g) {
    const Hyper& gamma = ola.gamma_grid[g];
    Params beta;
    try {
      beta = ola.fit_inner(gamma, train);
    } catch (const NumericalError&) {
      continue;
    } catch (const ConvergenceError&) {
      continue;
    }
    const double lin = detail::finite_or_inf(ola.loss_in(beta, gamma, train));
    const double lout = no_validation ? 0.0 : detail::finite_or_inf(ola.loss_out(beta, gamma, validation));
    if (!std::isfinite(lin) || !std::isfinite(lout)) continue;
    const double slack = found ? tie_tol * std::abs(best.loss_out_at_opt) : 0.0;
    if (!found || lout < best.loss_out_at_opt - slack) {
      best = Evaluation{std::move(beta), gamma, g, lin, lout, false};
      found = true;
    } else if (lout <= best.loss_out_at_opt + slack) {
      best.tie = true;
    }
  }
  if (!found) throw EvaluationError(ola.name + ": non-finite loss at every hyperparameter");
  if (no_validation && ola.gamma_grid.size() > 1) best.tie = true;
  return best;
}

inline Evaluation optimal_evaluation(const ObjectiveLearningAlgorithm& ola, const Dataset& data, double tie_tol = 0.0) {
  return optimal_evaluation(ola, data.train, data.validation, tie_tol);
}

/// Negative training loss at the optimal evaluation.
inline double performance_in(const ObjectiveLearningAlgorithm& ola, const Dataset& data) {
  return -optimal_evaluation(ola, data).loss_in_at_opt;
}

/// Negative validation loss at the optimal evaluation (0 for an empty
/// validation set).
inline double performance_out(const ObjectiveLearningAlgorithm& ola, const Dataset& data) {
  return -optimal_evaluation(ola, data).loss_out_at_opt;
}

struct RegularityTolerances {
  /// Relative slack under which two grid losses count as tied.
  double tie_tol = 1e-10;
};

struct RegularityReport {
  bool inner_regular = true;
  bool outer_unique = true;
  std::vector<InnerRegularity> inner;  // one per grid point examined
  std::size_t n_outer_minimisers = 1;

  bool regular() const { return inner_regular && outer_unique; }
};

/// Approximate uniqueness diagnostics for the inner and outer problems.
inline RegularityReport regular_domain_check(const ObjectiveLearningAlgorithm& ola, const Dataset& data,
                                             const RegularityTolerances& tol = {}) {
  RegularityReport report;
  if (ola.gamma_grid.empty()) {
    report.inner_regular = report.outer_unique = false;
    report.n_outer_minimisers = 0;
    return report;
  }
  for (const auto& gamma : ola.gamma_grid) {
    InnerRegularity r;
    if (ola.inner_regularity) r = ola.inner_regularity(gamma, data.train);
    report.inner_regular = report.inner_regular && r.regular;
    report.inner.push_back(std::move(r));
  }
  if (data.n_validation() == 0) {
    report.outer_unique = ola.gamma_grid.size() == 1;
    report.n_outer_minimisers = ola.gamma_grid.size();
    return report;
  }
  std::vector<double> losses;
  for (const auto& gamma : ola.gamma_grid) {
    double l = kInfinity;
    try {
      l = detail::finite_or_inf(ola.loss_out(ola.fit_inner(gamma, data.train), gamma, data.validation));
    } catch (const std::runtime_error&) {
    }
    losses.push_back(l);
  }
  const double best = *std::min_element(losses.begin(), losses.end());
  report.n_outer_minimisers = 0;
  for (double l : losses)
    if (std::isfinite(best) && l <= best + tol.tie_tol * std::max(1.0, std::abs(best))) ++report.n_outer_minimisers;
  report.outer_unique = report.n_outer_minimisers == 1;
  return report;
}

}  // namespace neu::learning
