#pragma once

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "neu/learning/algorithm.hpp"
#include "neu/meta/parallel.hpp"
#include "neu/meta/sampler.hpp"
#include "neu/optim/finite_diff.hpp"
#include "neu/optim/nelder_mead.hpp"
#include "neu/reconfig/chain.hpp"

namespace neu::meta {

using learning::Dataset;
using learning::Evaluation;
using learning::ObjectiveLearningAlgorithm;
using learning::Params;
using reconfig::ReconfigChain;

enum class Optimizer { random_search, nelder_mead, finite_difference_descent, alternating };

inline const char* to_string(Optimizer o) {
  switch (o) {
    case Optimizer::random_search: return "random-search";
    case Optimizer::nelder_mead: return "nelder-mead";
    case Optimizer::finite_difference_descent: return "finite-difference-descent";
    case Optimizer::alternating: return "alternating";
  }
  return "unknown";
}

inline Optimizer parse_optimizer(const std::string& s) {
  if (s == "random-search") return Optimizer::random_search;
  if (s == "nelder-mead") return Optimizer::nelder_mead;
  if (s == "finite-difference-descent") return Optimizer::finite_difference_descent;
  if (s == "alternating") return Optimizer::alternating;
  throw ConfigurationError("unknown optimizer '" + s + "'");
}

struct NeuConfig {
  /// Stopping ratio in (0, 1]; 1 disables the ratio test for loss-type scales.
  double epsilon = 1.0;
  int max_iters = 50;
  int proposals_per_iter = 200;
  /// Nelder-Mead iterations (or descent steps) spent on the best proposal.
  int refine_iters = 100;
  Optimizer optimizer = Optimizer::nelder_mead;
  SamplerConfig sampler;
  std::uint64_t seed = 0;
  /// Stop after this many consecutive rejected iterations; 0 disables.
  int patience = 0;
  int threads = 1;
  /// Relative slack on the strict-improvement tests.
  double slack = 1e-12;

  void validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigurationError("NeuConfig: epsilon must lie in (0, 1]");
    if (max_iters < 1) throw ConfigurationError("NeuConfig: max_iters must be >= 1");
    if (proposals_per_iter < 0) throw ConfigurationError("NeuConfig: proposals_per_iter must be >= 0");
    if (refine_iters < 0) throw ConfigurationError("NeuConfig: refine_iters must be >= 0");
    if (patience < 0) throw ConfigurationError("NeuConfig: patience must be >= 0");
    if (threads < 1) throw ConfigurationError("NeuConfig: threads must be >= 1");
  }
};

template <typename F>
struct NeuStep {
  int iteration = 0;
  std::optional<typename F::theta_type> theta;  // best candidate, if any
  bool accepted = false;
  double candidate_loss_in = learning::kInfinity;
  double perf_in = 0.0;  // incumbent performances after the decision
  double perf_out = 0.0;
  std::string note;
};

template <typename F>
struct NeuResult {
  ReconfigChain<F> chain;
  Evaluation evaluation;
  double gain = 1.0;
  std::vector<NeuStep<F>> history;  // entry 0 is the base fit
  double perf_in_initial = 0.0, perf_out_initial = 0.0;
  double perf_in_final = 0.0, perf_out_final = 0.0;
  /// Validation performance is the original-space loss of the deconfigured
  /// predictions on the held-out set, or on the training set when there is none.
  bool validation_is_training = false;
  std::string stop_reason;

  std::size_t accepted() const { return chain.size(); }
};

/// perf_N / perf_0 on positive scales; loss_0 / loss_N (= perf_0 / perf_N) on
/// negative scales, so values above 1 always mean improvement.
inline double performance_gain(double perf0, double perfN) {
  if (perf0 > 0.0 && perfN > 0.0) return perfN / perf0;
  if (perf0 == 0.0 && perfN == 0.0) return 1.0;
  if (perf0 < 0.0 && perfN < 0.0) return perf0 / perfN;
  if (perf0 < 0.0 && perfN == 0.0) return std::numeric_limits<double>::infinity();
  return perf0 != 0.0 ? perfN / perf0 : 1.0;
}

namespace detail {

template <typename F>
Matrix apply_theta(const Matrix& rows, const typename F::theta_type& theta) {
  Matrix out = rows;
  for (Index i = 0; i < rows.rows(); ++i) {
    const Point p = rows.row(i).transpose();
    const Point q = F::apply(p, theta);
    out.row(i) = q.transpose();
  }
  return out;
}

inline bool improves(double candidate, double incumbent, double slack) {
  return candidate > incumbent + slack * std::abs(incumbent);
}

}  // namespace detail

/// Response reconstruction for supervised algorithms: the y for which the
/// reconfigured point (x, y) lies on the fitted pattern, i.e. the graph of
/// the NEU model at x. Secant steps from `guess` (default: the base
/// prediction), with a bracketed TOMS 748 solve as fallback.
template <typename F>
double neu_predict_response(const ReconfigChain<F>& chain, const ObjectiveLearningAlgorithm& ola, const Params& beta,
                            const Vector& features, std::optional<double> guess = std::nullopt, double tol = 1e-12) {
  const Index d = features.size() + 1;
  require_dim(d, chain.dim(), "neu_predict features");
  Point p(d);
  p.head(d - 1) = features;
  auto residual = [&](double y) {
    p(d - 1) = y;
    const Point q = chain.reconfigure(p);
    return q(d - 1) - ola.pattern(beta, q)(d - 1);
  };
  p(d - 1) = 0.0;
  const double base = ola.pattern(beta, p)(d - 1);
  if (chain.empty()) return base;
  const double y0 = guess && std::isfinite(*guess) ? *guess : base;
  const double scale = std::max(1.0, std::abs(y0));
  double y = y0, r = residual(y0);
  if (std::abs(r) <= tol * scale) return y;
  double y_prev = y, r_prev = r;
  y = y0 - r;
  r = residual(y);
  for (int it = 0; it < 60; ++it) {
    if (!std::isfinite(r)) break;
    if (std::abs(r) <= tol * scale) return y;
    const double denom = r - r_prev;
    double next = (denom != 0.0) ? y - r * (y - y_prev) / denom : y - r;
    if (!std::isfinite(next) || std::abs(next - y) > 10.0 * (std::abs(r) + std::abs(r_prev)) + 1.0) next = y - r;
    const double rn = residual(next);
    if (!(std::abs(rn) < std::abs(r))) break;
    y_prev = y;
    r_prev = r;
    y = next;
    r = rn;
  }
  // bracket a sign change around the base prediction
  double h = std::max(1e-3 * scale, std::abs(residual(y0)));
  double a = y0, b = y0, ra = residual(y0), rb = ra;
  bool found = ra == 0.0;
  for (int k = 0; k < 80 && !found; ++k) {
    const double lo = y0 - h, hi = y0 + h;
    const double rlo = residual(lo), rhi = residual(hi);
    if (std::signbit(rlo) != std::signbit(ra)) {
      a = lo, ra = rlo, b = y0, rb = residual(y0);
      found = true;
    } else if (std::signbit(rhi) != std::signbit(ra)) {
      a = y0, ra = residual(y0), b = hi, rb = rhi;
      found = true;
    }
    h *= 2.0;
  }
  if (!found) throw ConvergenceError("neu_predict: could not bracket the response");
  if (ra == 0.0) return a;
  std::uintmax_t max_iter = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      residual, a, b, ra, rb, [&](double u, double v) { return std::abs(u - v) <= 1e-14 * scale; }, max_iter);
  return 0.5 * (lo + hi);
}

/// X^{-1}(phi(beta | X(x))). For supervised algorithms the response slot of x
/// is ignored and replaced by the reconstructed response.
template <typename F>
Point neu_predict(const ReconfigChain<F>& chain, const ObjectiveLearningAlgorithm& ola, const Params& beta,
                  const Point& x) {
  require_dim(x.size(), chain.dim(), "neu_predict");
  if (ola.response_dims == 0) return chain.deconfigure(ola.pattern(beta, chain.reconfigure(x)));
  if (ola.response_dims != 1) throw ConfigurationError("neu_predict: only one response coordinate is supported");
  Point out = x;
  out(x.size() - 1) = neu_predict_response(chain, ola, beta, x.head(x.size() - 1));
  return out;
}

template <typename F>
Point neu_predict(const NeuResult<F>& result, const ObjectiveLearningAlgorithm& ola, const Point& x) {
  return neu_predict(result.chain, ola, result.evaluation.beta_hat, x);
}

/// sum_i |p_i - prediction(p_i)|^2 in the original coordinates. For
/// supervised algorithms `guesses` (one response per row) seed the solves and
/// `predicted` receives the responses.
template <typename F>
double deconfigured_loss(const ReconfigChain<F>& chain, const ObjectiveLearningAlgorithm& ola, const Params& beta,
                         const Matrix& rows, const Vector* guesses = nullptr, Vector* predicted = nullptr) {
  if (ola.response_dims == 1) {
    const Index d = rows.cols();
    if (predicted) predicted->resize(rows.rows());
    double total = 0.0;
    for (Index i = 0; i < rows.rows(); ++i) {
      const Vector features = rows.row(i).head(d - 1).transpose();
      const std::optional<double> g = guesses ? std::optional<double>((*guesses)(i)) : std::nullopt;
      const double y = neu_predict_response(chain, ola, beta, features, g);
      if (predicted) (*predicted)(i) = y;
      total += (rows(i, d - 1) - y) * (rows(i, d - 1) - y);
    }
    return total;
  }
  double total = 0.0;
  for (Index i = 0; i < rows.rows(); ++i) {
    const Point p = rows.row(i).transpose();
    total += (p - neu_predict(chain, ola, beta, p)).squaredNorm();
  }
  return total;
}

template <typename F>
Matrix neu_predict_rows(const NeuResult<F>& result, const ObjectiveLearningAlgorithm& ola, const Matrix& rows) {
  Matrix out(rows.rows(), rows.cols());
  for (Index i = 0; i < rows.rows(); ++i)
    out.row(i) = neu_predict(result, ola, Point(rows.row(i).transpose())).transpose();
  return out;
}

namespace detail {

/// One iteration's search for theta. A candidate is scored by the
/// original-space training loss of the upgraded predictor: beta is refitted at
/// the incumbent hyperparameter on the reconfigured training set, then the
/// predictions are deconfigured through the extended chain.
template <typename F>
struct ThetaSearch {
  using Theta = typename F::theta_type;

  const ObjectiveLearningAlgorithm& ola;
  const learning::Hyper& gamma;
  const ReconfigChain<F>& chain;
  const Matrix& train;  // original coordinates
  const Matrix& work;   // reconfigured by `chain`
  const Vector* guesses;
  const NeuConfig& cfg;
  DataStats stats;

  double loss(const Theta& theta) const {
    try {
      const Matrix moved = apply_theta<F>(work, theta);
      const Params beta = ola.fit_inner(gamma, moved);
      if (!beta.allFinite()) return learning::kInfinity;
      const double l = deconfigured_loss(chain.append(theta), ola, beta, train, guesses);
      return std::isfinite(l) ? l : learning::kInfinity;
    } catch (const std::runtime_error&) {
      return learning::kInfinity;
    }
  }

  std::optional<std::pair<Theta, double>> run(int iteration) const {
    const int n = cfg.proposals_per_iter;
    if (n == 0) return std::nullopt;
    std::vector<std::optional<Theta>> thetas(n);
    std::vector<double> losses(n, learning::kInfinity);
    parallel_for(n, cfg.threads, [&](int i) {
      auto rng = proposal_rng(cfg.seed, static_cast<std::uint64_t>(iteration), static_cast<std::uint64_t>(i));
      thetas[i] = propose_theta<F>(cfg.sampler, rng, stats, iteration);
      losses[i] = loss(*thetas[i]);
    });
    int best = 0;
    for (int i = 1; i < n; ++i)
      if (losses[i] < losses[best]) best = i;
    Theta theta = *thetas[best];
    double value = losses[best];

    Optimizer opt = cfg.optimizer;
    if (opt == Optimizer::alternating)
      opt = (iteration % 2 == 1) ? Optimizer::nelder_mead : Optimizer::finite_difference_descent;
    if (opt == Optimizer::random_search || cfg.refine_iters == 0 || !std::isfinite(value)) return std::make_pair(theta, value);

    Vector x0;
    std::function<Theta(const Vector&)> decode;
    Vector step;
    if constexpr (std::is_same_v<F, MicroBump>) {
      x0 = ThetaCodec<MicroBump>::encode(theta);
      step = ThetaCodec<MicroBump>::step(theta);
      decode = [this](const Vector& v) { return ThetaCodec<MicroBump>::decode(v, cfg.sampler, stats); };
    } else {
      const double rate = theta.generator().operator_norm();
      if (rate == 0.0) return std::make_pair(theta, value);
      const geometry::SkewMatrix dir = theta.generator() * (1.0 / rate);
      x0 = ThetaCodec<RapidRotation>::encode(theta, rate);
      step = Vector::Constant(x0.size(), 0.25 * theta.sigma());
      step(x0.size() - 2) = 0.25;
      step(x0.size() - 1) = 0.25 * rate;
      decode = [this, dir](const Vector& v) { return ThetaCodec<RapidRotation>::decode(v, dir, cfg.sampler, stats); };
    }
    auto objective = [&](const Vector& v) { return loss(decode(v)); };
    optim::OptimResult res;
    if (opt == Optimizer::nelder_mead) {
      optim::NelderMeadOptions o;
      o.initial_step = step;
      o.max_iters = cfg.refine_iters;
      o.max_evals = 4 * cfg.refine_iters + 2 * static_cast<int>(x0.size()) + 2;
      res = optim::nelder_mead(objective, x0, o);
    } else {
      optim::FiniteDiffOptions o;
      o.max_iters = cfg.refine_iters;
      o.max_evals = 4 * cfg.refine_iters * static_cast<int>(x0.size());
      o.initial_step = 0.1 * step.maxCoeff();
      o.h_rel = 1e-6;
      try {
        res = optim::finite_diff_descent(objective, x0, o);
      } catch (const EvaluationError&) {
        return std::make_pair(theta, value);
      }
    }
    if (res.f < value) {
      theta = decode(res.x);
      value = loss(theta);
    }
    return std::make_pair(theta, value);
  }
};

}  // namespace detail

/// Learns a reconfiguration chain around `ola`. Each iteration searches for a
/// theta minimising the training loss of the upgraded predictor, keeps it only
/// if the training and validation performances both strictly improve, and
/// stops on the ratio test, the patience limit or the iteration budget.
/// Performances are negative original-space losses of the deconfigured
/// predictions; without a validation set the training set stands in.
template <typename F>
NeuResult<F> neu_fit(const ObjectiveLearningAlgorithm& ola, const Dataset& data, const NeuConfig& cfg) {
  cfg.validate();
  data.validate();
  const Index d = data.dim();
  if constexpr (std::is_same_v<F, RapidRotation>) {
    if (d < 2) throw PreconditionError("neu_fit: rapid rotations need D >= 2");
  } else {
    require_dim(d, 2, "neu_fit micro-bump data");
  }
  const bool has_validation = data.n_validation() > 0;
  if (!has_validation && cfg.epsilon < 1.0)
    throw ConfigurationError("neu_fit: the epsilon stopping test needs a validation set");
  const bool supervised = ola.response_dims == 1;

  ReconfigChain<F> chain(d);
  Matrix work_train = data.train;
  Matrix work_val = data.validation;
  Evaluation eval = learning::optimal_evaluation(ola, work_train, work_val);

  Vector train_pred, val_pred;
  double perf_in = -deconfigured_loss(chain, ola, eval.beta_hat, data.train, nullptr, &train_pred);
  double perf_out = has_validation ? -deconfigured_loss(chain, ola, eval.beta_hat, data.validation, nullptr, &val_pred)
                                   : perf_in;

  NeuResult<F> result{chain, eval};
  result.validation_is_training = !has_validation;
  result.perf_in_initial = perf_in;
  result.perf_out_initial = perf_out;
  result.history.push_back({0, std::nullopt, false, -perf_in, perf_in, perf_out, "base fit"});
  result.stop_reason = "budget";

  int rejected_run = 0;
  for (int n = 1; n <= cfg.max_iters; ++n) {
    NeuStep<F> step;
    step.iteration = n;
    const detail::ThetaSearch<F> search{ola,       eval.gamma_hat,
                                        chain,     data.train,
                                        work_train, supervised ? &train_pred : nullptr,
                                        cfg,       DataStats::of(work_train)};
    const auto found = search.run(n);
    bool accepted = false;
    if (!found) {
      step.note = "no proposals";
    } else {
      step.theta = found->first;
      step.candidate_loss_in = found->second;
      if (!detail::improves(-found->second, perf_in, cfg.slack)) {
        step.note = "training loss not improved";
      } else {
        const ReconfigChain<F> cand_chain = chain.append(found->first);
        const Matrix cand_train = detail::apply_theta<F>(work_train, found->first);
        const Matrix cand_val = detail::apply_theta<F>(work_val, found->first);
        try {
          const Evaluation cand_eval = learning::optimal_evaluation(ola, cand_train, cand_val);
          Vector cand_train_pred, cand_val_pred;
          const double cand_perf_in = -deconfigured_loss(cand_chain, ola, cand_eval.beta_hat, data.train,
                                                         supervised ? &train_pred : nullptr, &cand_train_pred);
          const double cand_perf_out =
              has_validation ? -deconfigured_loss(cand_chain, ola, cand_eval.beta_hat, data.validation,
                                                  supervised ? &val_pred : nullptr, &cand_val_pred)
                             : cand_perf_in;
          if (detail::improves(cand_perf_out, perf_out, cfg.slack) && detail::improves(cand_perf_in, perf_in, cfg.slack)) {
            const double prev_out = perf_out;
            chain = cand_chain;
            work_train = cand_train;
            work_val = cand_val;
            eval = cand_eval;
            perf_in = cand_perf_in;
            perf_out = cand_perf_out;
            train_pred = std::move(cand_train_pred);
            val_pred = std::move(cand_val_pred);
            accepted = true;
            step.note = "accepted";
            // ratio test on the validation scale
            bool stop = false;
            if (prev_out > 0.0 && perf_out > 0.0)
              stop = prev_out / perf_out < cfg.epsilon;
            else
              stop = (perf_out - prev_out) / std::max(std::abs(prev_out), 1e-300) < 1.0 - cfg.epsilon;
            if (stop) result.stop_reason = "ratio";
          } else {
            step.note = "validation performance not improved";
          }
        } catch (const std::runtime_error& e) {
          step.note = std::string("candidate failed: ") + e.what();
        }
      }
    }
    step.accepted = accepted;
    step.perf_in = perf_in;
    step.perf_out = perf_out;
    result.history.push_back(std::move(step));
    if (result.stop_reason == "ratio") break;
    rejected_run = accepted ? 0 : rejected_run + 1;
    if (cfg.patience > 0 && rejected_run >= cfg.patience) {
      result.stop_reason = "patience";
      break;
    }
  }
  result.chain = chain;
  result.evaluation = eval;
  result.perf_in_final = perf_in;
  result.perf_out_final = perf_out;
  result.gain = performance_gain(result.perf_out_initial, result.perf_out_final);
  return result;
}

/// Fits another algorithm on data reconfigured by an existing chain.
template <typename F>
Evaluation neu_refit(const ReconfigChain<F>& chain, const ObjectiveLearningAlgorithm& ola, const Dataset& data) {
  return learning::optimal_evaluation(ola, chain.reconfigure_rows(data.train),
                                      data.n_validation() ? chain.reconfigure_rows(data.validation) : Matrix());
}

}  // namespace neu::meta
