#pragma once

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "neu/baselines/loess.hpp"
#include "neu/baselines/ola.hpp"
#include "neu/baselines/pspline.hpp"
#include "neu/geometry/families.hpp"
#include "neu/harness/bca.hpp"
#include "neu/harness/simulation.hpp"
#include "neu/meta/neu.hpp"
#include "neu/meta/parallel.hpp"

namespace neu::harness {

enum class SimMethod { neu_ols, pspline, loess, ols };

inline const char* to_string(SimMethod m) {
  switch (m) {
    case SimMethod::neu_ols: return "neu-ols";
    case SimMethod::pspline: return "p-splines";
    case SimMethod::loess: return "loess";
    case SimMethod::ols: return "ols";
  }
  return "?";
}

inline SimMethod parse_sim_method(const std::string& s) {
  if (s == "neu-ols") return SimMethod::neu_ols;
  if (s == "p-splines" || s == "pspline") return SimMethod::pspline;
  if (s == "loess") return SimMethod::loess;
  if (s == "ols") return SimMethod::ols;
  throw ConfigurationError("unknown simulation method '" + s + "'");
}

/// NEU budget used by the simulation studies.
inline meta::NeuConfig default_sim_neu_config() {
  meta::NeuConfig c;
  c.proposals_per_iter = 100;
  c.max_iters = 100;
  c.refine_iters = 50;
  c.patience = 25;
  return c;
}

struct SimStudyConfig {
  SimulationSpec sim;
  std::vector<SimMethod> methods{SimMethod::neu_ols, SimMethod::pspline, SimMethod::loess};
  BcaSpec bca;
  meta::NeuConfig neu = default_sim_neu_config();
  geometry::FamilyId family = geometry::FamilyId::rdr;
};

struct MethodResult {
  SimMethod method;
  double mse = 0.0;
  /// Mean of actual - predicted over the test points, with its BCa interval.
  double mean_error = 0.0;
  Interval ci;
  double seconds = 0.0;
  /// Accepted NEU steps; 0 for the baselines.
  std::size_t chain_length = 0;
};

struct StudyReport {
  SimulationSpec spec;
  double level = 0.95;
  std::vector<MethodResult> rows;

  const MethodResult& at(SimMethod m) const {
    for (const auto& r : rows)
      if (r.method == m) return r;
    throw ConfigurationError(std::string("StudyReport: method not run: ") + to_string(m));
  }
};

namespace detail {

template <typename F>
Vector neu_ols_predictions(const Simulation& s, const meta::NeuConfig& cfg, std::size_t& chain_length) {
  const auto ola = baselines::ols_ola();
  const auto result = meta::neu_fit<F>(ola, learning::Dataset(s.points(s.fit_idx), s.points(s.validation_idx)), cfg);
  chain_length = result.chain.size();
  Vector pred(static_cast<Index>(s.test_idx.size()));
  for (std::size_t i = 0; i < s.test_idx.size(); ++i) {
    Vector x(1);
    x << s.x(s.test_idx[i]);
    pred(static_cast<Index>(i)) = meta::neu_predict_response(result.chain, ola, result.evaluation.beta_hat, x);
  }
  return pred;
}

}  // namespace detail

/// Fits every method on the stratified training subset and scores it on the
/// remaining points. NEU-OLS holds out its validation share for early
/// stopping; the baselines cross-validate on the whole subset.
inline StudyReport run_sim_study(const SimStudyConfig& cfg) {
  if (cfg.methods.empty()) throw ConfigurationError("run_sim_study: no methods");
  cfg.bca.validate();
  const Simulation s = generate_simulation(cfg.sim);
  const auto train_idx = s.training_idx();
  Vector tx(static_cast<Index>(train_idx.size())), ty(tx.size());
  for (std::size_t i = 0; i < train_idx.size(); ++i) {
    tx(static_cast<Index>(i)) = s.x(train_idx[i]);
    ty(static_cast<Index>(i)) = s.y(train_idx[i]);
  }
  StudyReport report{cfg.sim, cfg.bca.level, {}};
  for (const SimMethod m : cfg.methods) {
    MethodResult row{m};
    const auto t0 = std::chrono::steady_clock::now();
    Vector pred(static_cast<Index>(s.test_idx.size()));
    auto fill = [&](auto&& f) {
      for (std::size_t i = 0; i < s.test_idx.size(); ++i) pred(static_cast<Index>(i)) = f(s.x(s.test_idx[i]));
    };
    switch (m) {
      case SimMethod::neu_ols: {
        meta::NeuConfig nc = cfg.neu;
        nc.seed = cfg.neu.seed ^ cfg.sim.seed;
        pred = cfg.family == geometry::FamilyId::rdr
                   ? detail::neu_ols_predictions<geometry::RapidRotation>(s, nc, row.chain_length)
                   : detail::neu_ols_predictions<geometry::MicroBump>(s, nc, row.chain_length);
        break;
      }
      case SimMethod::pspline: {
        const auto fit = baselines::pspline_cv(tx, ty);
        fill([&](double x) { return fit.model.predict(x); });
        break;
      }
      case SimMethod::loess: {
        const auto fit = baselines::loess_cv(tx, ty);
        fill([&](double x) { return fit.model.predict(x); });
        break;
      }
      case SimMethod::ols: {
        Matrix design(tx.size(), 1);
        design.col(0) = tx;
        const auto fit = baselines::ols_fit_centered(design, ty);
        fill([&](double x) { return fit.intercept + fit.beta(0) * x; });
        break;
      }
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::vector<double> err(s.test_idx.size());
    for (std::size_t i = 0; i < s.test_idx.size(); ++i) {
      err[i] = s.y(s.test_idx[i]) - pred(static_cast<Index>(i));
      row.mse += err[i] * err[i];
    }
    row.mse /= double(err.size());
    row.ci = bca_interval(err, cfg.bca);
    row.mean_error = row.ci.mean;
    report.rows.push_back(row);
  }
  return report;
}

/// One report per seed, computed in parallel; seed k uses sim.seed = first_seed + k.
inline std::vector<StudyReport> run_sim_seeds(SimStudyConfig cfg, int n_seeds, int threads = 1) {
  std::vector<StudyReport> out(n_seeds);
  const std::uint64_t first = cfg.sim.seed;
  meta::parallel_for(n_seeds, threads, [&](int k) {
    SimStudyConfig c = cfg;
    c.sim.seed = first + static_cast<std::uint64_t>(k);
    c.bca.seed = cfg.bca.seed + static_cast<std::uint64_t>(k);
    c.neu.threads = 1;
    out[k] = run_sim_study(c);
  });
  return out;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw DomainError("median: empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double median_mse(const std::vector<StudyReport>& reports, SimMethod m) {
  std::vector<double> v;
  for (const auto& r : reports) v.push_back(r.at(m).mse);
  return median(v);
}

/// Table rows: one per (seed, method). Runtimes only when asked for, so that
/// the default output is reproducible byte for byte.
inline std::string study_csv(const std::vector<StudyReport>& reports, bool timings = false) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "target,sigma,seed,method,test_mse,mean_error,bca_low,bca_high,level,chain_length";
  if (timings) os << ",seconds";
  os << '\n';
  for (const auto& r : reports)
    for (const auto& row : r.rows) {
      os << to_string(r.spec.target) << ',' << r.spec.sigma << ',' << r.spec.seed << ',' << to_string(row.method)
         << ',' << row.mse << ',' << row.mean_error << ',' << row.ci.low << ',' << row.ci.high << ',' << r.level << ',' << row.chain_length;
      if (timings) os << ',' << row.seconds;
      os << '\n';
    }
  return os.str();
}

}  // namespace neu::harness
