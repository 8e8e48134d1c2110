#pragma once

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "neu/baselines/ola.hpp"
#include "neu/harness/bca.hpp"
#include "neu/harness/csv.hpp"
#include "neu/meta/neu.hpp"

namespace neu::harness {

struct WindowSpec {
  int train_len = 200;
  int validation_len = 10;
  int test_len = 5;
  int stride = 5;

  void validate() const {
    if (train_len < 1 || validation_len < 1 || test_len < 1 || stride < 1)
      throw ConfigurationError("WindowSpec: all lengths must be positive");
  }
  int span() const { return train_len + validation_len + test_len; }
};

/// floor((T - train - validation - test) / stride) + 1 windows fit in T rows.
inline int window_count(Index rows, const WindowSpec& w) {
  w.validate();
  if (rows < w.span()) return 0;
  return static_cast<int>((rows - w.span()) / w.stride) + 1;
}

/// Simple returns (S_t - S_{t-1}) / S_{t-1}, one row fewer than `prices`.
inline Matrix simple_returns(const Matrix& prices) {
  if (prices.rows() < 2) throw DomainError("simple_returns: need at least two rows");
  if ((prices.array() <= 0.0).any()) throw DomainError("simple_returns: prices must be positive");
  return (prices.bottomRows(prices.rows() - 1).array() - prices.topRows(prices.rows() - 1).array()) /
         prices.topRows(prices.rows() - 1).array();
}

enum class BacktestMethod { ols, enet, neu_ols };

inline const char* to_string(BacktestMethod m) {
  switch (m) {
    case BacktestMethod::ols: return "ols";
    case BacktestMethod::enet: return "enet";
    case BacktestMethod::neu_ols: return "neu-ols";
  }
  return "?";
}

inline BacktestMethod parse_backtest_method(const std::string& s) {
  if (s == "ols") return BacktestMethod::ols;
  if (s == "enet") return BacktestMethod::enet;
  if (s == "neu-ols") return BacktestMethod::neu_ols;
  throw ConfigurationError("unknown backtest method '" + s + "'");
}

inline std::vector<learning::Hyper> default_enet_grid() {
  std::vector<learning::Hyper> g;
  for (double l : {0.0, 1e-4, 1e-3, 1e-2, 1e-1})
    for (double a : {0.0, 0.5, 1.0}) g.push_back({l, a});
  return g;
}

struct BacktestConfig {
  WindowSpec window;
  std::vector<BacktestMethod> methods{BacktestMethod::ols, BacktestMethod::enet, BacktestMethod::neu_ols};
  std::vector<learning::Hyper> enet_grid = default_enet_grid();
  meta::NeuConfig neu;
  /// Learn a fresh NEU chain on every window; otherwise the chain learned on
  /// the first window is reused and only OLS is refitted.
  bool neu_every_window = true;
  BcaSpec bca;

  BacktestConfig() {
    neu.proposals_per_iter = 50;
    neu.max_iters = 30;
    neu.refine_iters = 30;
    neu.patience = 10;
  }
};

/// Signed errors (actual - predicted) pooled over all windows for one of the
/// train, validation and test blocks.
struct ErrorSummary {
  double mean = 0.0;
  double mse = 0.0;
  Interval ci95, ci99;  // NaN endpoints when fewer than 10 errors
  std::size_t count = 0;
};

struct BacktestMethodReport {
  BacktestMethod method;
  ErrorSummary train, validation, test;
  std::vector<double> window_errors;  // test-set MSE per window
  /// Per-window fitting time summed over windows, NEU chain learning included.
  double fit_seconds = 0.0;
  /// Accepted NEU steps summed over the chains used.
  std::size_t chain_length = 0;
  /// Coefficients [intercept, slopes...] fitted in each window.
  std::vector<Vector> coefficients;
};

struct BacktestReport {
  int windows = 0;
  std::vector<BacktestMethodReport> methods;

  const BacktestMethodReport& at(BacktestMethod m) const {
    for (const auto& r : methods)
      if (r.method == m) return r;
    throw ConfigurationError(std::string("BacktestReport: method not run: ") + to_string(m));
  }
};

namespace detail {

/// Points (other returns..., target return) for rows [begin, begin + len).
inline Matrix regression_block(const Matrix& returns, Index begin, Index len) {
  const Index d = returns.cols();
  Matrix out(len, d);
  out.leftCols(d - 1) = returns.block(begin, 1, len, d - 1);
  out.col(d - 1) = returns.block(begin, 0, len, 1);
  return out;
}

/// actual - predicted response for every row of a regression block.
inline std::vector<double> linear_errors(const learning::Params& beta, const Matrix& block) {
  std::vector<double> e;
  for (Index i = 0; i < block.rows(); ++i)
    e.push_back(block(i, block.cols() - 1) - baselines::detail::linear_response(beta, block.row(i).head(block.cols() - 1).transpose()));
  return e;
}

template <typename F>
std::vector<double> neu_errors(const reconfig::ReconfigChain<F>& chain, const learning::ObjectiveLearningAlgorithm& ola,
                               const learning::Params& beta, const Matrix& block) {
  Vector pred;
  meta::deconfigured_loss(chain, ola, beta, block, nullptr, &pred);
  std::vector<double> e;
  for (Index i = 0; i < block.rows(); ++i) e.push_back(block(i, block.cols() - 1) - pred(i));
  return e;
}

inline ErrorSummary summarize(const std::vector<double>& e, BcaSpec spec) {
  ErrorSummary s;
  s.count = e.size();
  for (double v : e) {
    s.mean += v;
    s.mse += v * v;
  }
  s.mean /= double(e.size());
  s.mse /= double(e.size());
  if (e.size() >= 10) {
    spec.level = 0.95;
    s.ci95 = bca_interval(e, spec);
    spec.level = 0.99;
    s.ci99 = bca_interval(e, spec);
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.ci95 = s.ci99 = Interval{nan, s.mean, nan};
  }
  return s;
}

}  // namespace detail

/// Rolling-window regression of the first asset's returns on the others.
/// Each window fits on its training block, tunes on the validation block and
/// scores on the test block: OLS ignores the validation block, ENET picks
/// (lambda, alpha) on it and NEU-OLS uses it to accept or reject steps.
inline BacktestReport rolling_window_backtest(const Matrix& prices, const BacktestConfig& cfg) {
  cfg.window.validate();
  if (cfg.methods.empty()) throw ConfigurationError("rolling_window_backtest: no methods");
  if (prices.cols() < 2) throw DomainError("rolling_window_backtest: need a target and at least one regressor");
  require_finite(prices, "prices");
  const Matrix returns = simple_returns(prices);
  const int windows = window_count(returns.rows(), cfg.window);
  if (windows == 0)
    throw DomainError("rolling_window_backtest: " + std::to_string(prices.rows()) + " price rows give " +
                      std::to_string(returns.rows()) + " returns, fewer than one window (" +
                      std::to_string(cfg.window.span()) + ")");
  const auto& w = cfg.window;
  const auto ols = baselines::ols_ola(baselines::RegressionOptions{1e10, 1e-8, true});
  auto enet = baselines::enet_ola(cfg.enet_grid);

  BacktestReport report;
  report.windows = windows;
  for (const BacktestMethod m : cfg.methods) {
    BacktestMethodReport r{m};
    std::vector<double> e_train, e_val, e_test;
    auto append = [](std::vector<double>& to, const std::vector<double>& from) { to.insert(to.end(), from.begin(), from.end()); };
    reconfig::RdrChain chain(returns.cols());
    const auto t0 = std::chrono::steady_clock::now();
    for (int k = 0; k < windows; ++k) {
      const Index s = static_cast<Index>(k) * w.stride;
      const Matrix train = detail::regression_block(returns, s, w.train_len);
      const Matrix val = detail::regression_block(returns, s + w.train_len, w.validation_len);
      const Matrix test = detail::regression_block(returns, s + w.train_len + w.validation_len, w.test_len);
      learning::Params beta;
      std::vector<double> et, ev, es;
      if (m == BacktestMethod::neu_ols) {
        if (k == 0 || cfg.neu_every_window) {
          chain = meta::neu_fit<geometry::RapidRotation>(ols, learning::Dataset(train, val), cfg.neu).chain;
          r.chain_length += chain.size();
        }
        beta = ols.fit_inner({0.0}, chain.reconfigure_rows(train));
        et = detail::neu_errors(chain, ols, beta, train);
        ev = detail::neu_errors(chain, ols, beta, val);
        es = detail::neu_errors(chain, ols, beta, test);
      } else {
        beta = m == BacktestMethod::ols ? ols.fit_inner({0.0}, train) : learning::optimal_evaluation(enet, train, val).beta_hat;
        et = detail::linear_errors(beta, train);
        ev = detail::linear_errors(beta, val);
        es = detail::linear_errors(beta, test);
      }
      double mse = 0.0;
      for (double v : es) mse += v * v;
      r.window_errors.push_back(mse / double(es.size()));
      r.coefficients.push_back(beta);
      append(e_train, et);
      append(e_val, ev);
      append(e_test, es);
    }
    r.fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.train = detail::summarize(e_train, cfg.bca);
    r.validation = detail::summarize(e_val, cfg.bca);
    r.test = detail::summarize(e_test, cfg.bca);
    report.methods.push_back(std::move(r));
  }
  return report;
}

inline BacktestReport rolling_window_backtest(const std::string& csv_path, const BacktestConfig& cfg) {
  return rolling_window_backtest(read_csv(csv_path, true).values, cfg);
}

/// One row per (method, block) with the pooled mean error, its BCa
/// intervals and the MSE, mirroring the training/validation/test tables.
inline std::string backtest_csv(const BacktestReport& r, bool timings = false) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "method,set,windows,mean_error,bca95_low,bca95_high,bca99_low,bca99_high,mse,chain_length";
  if (timings) os << ",fit_seconds";
  os << '\n';
  for (const auto& m : r.methods) {
    const std::pair<const char*, const ErrorSummary*> sets[] = {
        {"train", &m.train}, {"validation", &m.validation}, {"test", &m.test}};
    for (const auto& [name, e] : sets) {
      os << to_string(m.method) << ',' << name << ',' << r.windows << ',' << e->mean << ',' << e->ci95.low << ','
         << e->ci95.high << ',' << e->ci99.low << ',' << e->ci99.high << ',' << e->mse << ',' << m.chain_length;
      if (timings) os << ',' << m.fit_seconds;
      os << '\n';
    }
  }
  return os.str();
}

struct SyntheticPrices {
  std::vector<std::string> dates;
  Matrix prices;  // column 0 is the target
};

/// Regressor prices follow geometric random walks; the target's returns are
/// slope * (first regressor's return) + noise, so a regression on returns has
/// a known coefficient.
inline SyntheticPrices synth_prices(int rows, int regressors, double slope, double noise, std::uint64_t seed,
                                    double vol = 0.01) {
  if (rows < 2 || regressors < 1) throw ConfigurationError("synth_prices: need >= 2 rows and >= 1 regressor");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  SyntheticPrices out;
  out.prices.resize(rows, regressors + 1);
  out.prices.row(0).setConstant(100.0);
  for (int t = 1; t < rows; ++t) {
    Vector r(regressors + 1);
    for (int j = 1; j <= regressors; ++j) r(j) = vol * z(rng);
    r(0) = slope * r(1) + noise * z(rng);
    out.prices.row(t) = out.prices.row(t - 1).array() * (1.0 + r.transpose().array());
  }
  // distinct ISO dates on a 28-day month grid starting 2000-01-01
  for (int t = 0; t < rows; ++t) {
    std::ostringstream os;
    os << 2000 + t / 336 << '-' << std::setw(2) << std::setfill('0') << 1 + (t % 336) / 28 << '-' << std::setw(2)
       << std::setfill('0') << 1 + t % 28;
    out.dates.push_back(os.str());
  }
  return out;
}

inline std::string prices_csv(const SyntheticPrices& p) {
  std::ostringstream os;
  os << std::setprecision(17) << "date";
  for (Index j = 0; j < p.prices.cols(); ++j) os << ",asset" << j;
  os << '\n';
  for (Index i = 0; i < p.prices.rows(); ++i) {
    os << p.dates[i];
    for (Index j = 0; j < p.prices.cols(); ++j) os << ',' << p.prices(i, j);
    os << '\n';
  }
  return os.str();
}

}  // namespace neu::harness
