#include <gtest/gtest.h>

#include <sstream>

#include "neu/harness/backtest.hpp"
#include "neu/harness/bca.hpp"
#include "neu/harness/manifest.hpp"
#include "neu/harness/sim_study.hpp"
#include "neu/harness/simulation.hpp"
#include "neu/harness/yield.hpp"

using namespace neu;
using namespace neu::harness;

TEST(Simulation, TargetFunctions) {
  EXPECT_EQ(target_value(Target::m3, 0.4), 1.0);
  EXPECT_EQ(target_value(Target::m3, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(target_value(Target::m2, 0.0), std::cos(1.0));
  EXPECT_DOUBLE_EQ(target_value(Target::m1, 0.0), std::min(std::exp(-1.0), 1.0));
  EXPECT_THROW(parse_target("m4"), ConfigurationError);
}

TEST(Simulation, NoiselessResponsesEqualTarget) {
  SimulationSpec spec;
  spec.sigma = 0.0;
  const auto s = generate_simulation(spec);
  EXPECT_EQ((s.y - s.clean).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Simulation, SeedReproducesData) {
  SimulationSpec spec;
  spec.seed = 17;
  const auto a = generate_simulation(spec), b = generate_simulation(spec);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.fit_idx, b.fit_idx);
  spec.seed = 18;
  EXPECT_NE(generate_simulation(spec).x, a.x);
}

TEST(Simulation, StratifiedSubset) {
  const auto s = generate_simulation({});
  EXPECT_EQ(s.fit_idx.size(), 80u);
  EXPECT_EQ(s.validation_idx.size(), 20u);
  EXPECT_EQ(s.test_idx.size(), 900u);
  std::vector<int> per(5, 0);
  for (auto i : s.training_idx()) ++per[std::min(4, static_cast<int>(s.x(i) * 5))];
  for (int c : per) EXPECT_EQ(c, 20);
  EXPECT_GE(s.x.minCoeff(), 0.0);
  EXPECT_LE(s.x.maxCoeff(), 1.0);
  EXPECT_EQ(s.y.minCoeff(), 0.0);
  EXPECT_EQ(s.y.maxCoeff(), 1.0);
}

TEST(Simulation, NoiseMeanIsSmall) {
  SimulationSpec spec;
  spec.n = 100000;
  spec.sigma = 0.5;
  spec.seed = 3;
  const auto s = generate_simulation(spec);
  const double mean_eps = ((s.y - s.clean) * s.y_scale / spec.sigma).mean();
  EXPECT_LT(std::abs(mean_eps), 3.0 / std::sqrt(double(spec.n)));
}

TEST(Bca, ConstantSamples) {
  const Interval i = bca_interval(std::vector<double>(20, 2.5));
  EXPECT_EQ(i.low, 2.5);
  EXPECT_EQ(i.mean, 2.5);
  EXPECT_EQ(i.high, 2.5);
}

TEST(Bca, TooFewSamplesAndBadSpec) {
  EXPECT_THROW(bca_interval({1, 2, 3}), DomainError);
  BcaSpec s;
  s.resamples = 50;
  EXPECT_THROW(bca_interval(std::vector<double>(20, 1.0), s), ConfigurationError);
}

TEST(Bca, SymmetricInputReducesToPercentile) {
  std::vector<double> x;
  for (int i = 1; i <= 50; ++i) {
    x.push_back(0.1 * i * i);
    x.push_back(-0.1 * i * i);
  }
  const BcaSpec spec{0.95, 2000, 5};
  const BcaParts parts = bca_parts(x, spec);
  EXPECT_LT(std::abs(parts.a), 1e-12);
  EXPECT_LT(std::abs(parts.z0), 0.1);
  // oracle: percentile endpoints from an independently sorted copy of the same stream
  auto boot = bootstrap_means(x, spec.resamples, spec.seed);
  std::sort(boot.begin(), boot.end());
  const long lo_idx = static_cast<long>(std::ceil(0.025 * 2000)) - 1, hi_idx = static_cast<long>(std::ceil(0.975 * 2000)) - 1;
  const auto [lo, hi] = bca_endpoints(parts.boot, 0.0, parts.a, 0.95);
  const long got_lo = std::lower_bound(boot.begin(), boot.end(), lo) - boot.begin();
  const long got_hi = std::lower_bound(boot.begin(), boot.end(), hi) - boot.begin();
  EXPECT_LE(std::abs(got_lo - lo_idx), 1);
  EXPECT_LE(std::abs(got_hi - hi_idx), 1);
}

TEST(Bca, CoverageOnNormalSamples) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> z;
  int covered = 0;
  const int trials = 500;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> x(200);
    for (auto& v : x) v = z(rng);
    const Interval i = bca_interval(x, BcaSpec{0.95, 1000, static_cast<std::uint64_t>(t)});
    EXPECT_LE(i.low, i.high);
    if (i.low <= 0.0 && 0.0 <= i.high) ++covered;
  }
  const double rate = double(covered) / trials;
  EXPECT_GE(rate, 0.91);
  EXPECT_LE(rate, 0.98);
}

TEST(Bca, SkewedDataShiftsInterval) {
  std::mt19937_64 rng(7);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> x(60);
  for (auto& v : x) v = e(rng);
  const BcaParts p = bca_parts(x, {});
  EXPECT_GT(p.a, 0.0);
  const Interval i = bca_interval(x);
  EXPECT_LT(i.low, i.mean);
  EXPECT_GT(i.high, i.mean);
}

TEST(Backtest, WindowCount) {
  WindowSpec w;
  EXPECT_EQ(window_count(215, w), 1);
  EXPECT_EQ(window_count(214, w), 0);
  EXPECT_EQ(window_count(219, w), 1);
  EXPECT_EQ(window_count(220, w), 2);
  EXPECT_EQ(window_count(1000, w), (1000 - 215) / 5 + 1);
}

TEST(Backtest, ConstantPricesGiveZeroError) {
  const Matrix prices = Matrix::Constant(260, 3, 50.0);
  BacktestConfig cfg;
  cfg.neu.max_iters = 2;
  const auto r = rolling_window_backtest(prices, cfg);
  EXPECT_EQ(r.windows, window_count(259, cfg.window));
  for (const auto& m : r.methods) {
    for (const auto* e : {&m.train, &m.validation, &m.test}) {
      EXPECT_EQ(e->mean, 0.0) << to_string(m.method);
      EXPECT_EQ(e->mse, 0.0) << to_string(m.method);
    }
    for (const auto& b : m.coefficients) EXPECT_EQ(b.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Backtest, RecoversKnownSlope) {
  const auto p = synth_prices(400, 1, 0.5, 0.001, 11);
  BacktestConfig cfg;
  cfg.methods = {BacktestMethod::ols};
  const auto r = rolling_window_backtest(p.prices, cfg);
  ASSERT_GT(r.windows, 10);
  for (const auto& b : r.at(BacktestMethod::ols).coefficients) EXPECT_NEAR(b(1), 0.5, 0.05);
  // equal-sized test blocks: the pooled MSE is the mean of the window MSEs
  const auto& ols = r.at(BacktestMethod::ols);
  double sum = 0.0;
  for (double e : ols.window_errors) sum += e;
  EXPECT_NEAR(ols.test.mse, sum / r.windows, 1e-15);
  EXPECT_EQ(ols.test.count, static_cast<std::size_t>(r.windows * cfg.window.test_len));
  EXPECT_EQ(ols.train.count, static_cast<std::size_t>(r.windows * cfg.window.train_len));
  EXPECT_LE(ols.test.ci99.low, ols.test.ci95.low);
  EXPECT_GE(ols.test.ci99.high, ols.test.ci95.high);
  EXPECT_NEAR(ols.train.mean, 0.0, 1e-12);
}

TEST(Backtest, NeuAndEnetRun) {
  const auto p = synth_prices(300, 2, 0.5, 0.002, 12);
  BacktestConfig cfg;
  cfg.neu.max_iters = 5;
  cfg.neu.proposals_per_iter = 20;
  const auto r = rolling_window_backtest(p.prices, cfg);
  for (const auto& m : r.methods) {
    EXPECT_TRUE(std::isfinite(m.test.mean));
    EXPECT_EQ(m.window_errors.size(), static_cast<std::size_t>(r.windows));
    EXPECT_LE(m.test.ci95.low, m.test.ci95.high);
    EXPECT_LE(m.validation.ci95.low, m.validation.ci95.high);
  }
  EXPECT_GE(r.at(BacktestMethod::neu_ols).fit_seconds, 0.0);
  std::istringstream csv(backtest_csv(r));
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  EXPECT_EQ(lines, 1 + 3 * static_cast<int>(r.methods.size()));
}

TEST(Backtest, InsufficientRowsAndBadCells) {
  EXPECT_THROW(rolling_window_backtest(Matrix::Constant(100, 2, 1.0), BacktestConfig{}), DomainError);
  std::istringstream bad("date,a,b\n2020-01-01,1,x\n");
  EXPECT_THROW(parse_csv(bad, true), DomainError);
  std::istringstream ragged("date,a,b\n2020-01-01,1\n");
  EXPECT_THROW(parse_csv(ragged, true), DomainError);
}

TEST(Backtest, CsvRoundTrip) {
  const auto p = synth_prices(20, 2, 0.5, 0.01, 1);
  std::istringstream in(prices_csv(p));
  const auto t = parse_csv(in, true);
  EXPECT_EQ(t.labels, p.dates);
  EXPECT_EQ(t.values, p.prices);
}

TEST(Yield, ZeroVolatilityIsRankOne) {
  YieldParams prm;
  prm.factor_vol.setZero();
  prm.noise_vol = 0.0;
  const Matrix d = synth_yield_curve(200, default_maturities(), 1, prm);
  EXPECT_NEAR(baselines::pca(d, 1).explained(0), 1.0, 1e-10);
}

TEST(Yield, TopThreeExplainMostVariance) {
  const Matrix d = synth_yield_curve(500, default_maturities(), 2);
  EXPECT_GE(baselines::pca(d, 3).explained.sum(), 0.95);
  EXPECT_EQ(d, synth_yield_curve(500, default_maturities(), 2));
}

TEST(Yield, BadMaturities) {
  EXPECT_THROW(synth_yield_curve(10, {1, 0.5}, 0), ConfigurationError);
  EXPECT_THROW(synth_yield_curve(0, {1}, 0), ConfigurationError);
}

TEST(PcaStudy, NeuPcaExplainsAtLeastAsMuch) {
  const Matrix d = synth_yield_curve(300, {0.5, 2, 5, 10, 30}, 3);
  PcaStudyConfig cfg;
  cfg.split = {150, 50, 100};
  cfg.k_max = 5;
  cfg.neu.max_iters = 8;
  cfg.neu.proposals_per_iter = 20;
  const auto r = pca_study(d, cfg);
  EXPECT_GE(r.explained(0, 1), r.explained(0, 0));
  // full rank: everything is explained
  EXPECT_NEAR(r.explained(4, 0), 1.0, 1e-10);
  EXPECT_NEAR(r.explained(4, 1), 1.0, 1e-10);
  for (Index k = 1; k < r.explained.rows(); ++k) EXPECT_GE(r.explained(k, 0) + 1e-12, r.explained(k - 1, 0));
}

TEST(SimStudy, ReportsEveryMethod) {
  SimStudyConfig cfg;
  cfg.methods = {SimMethod::neu_ols, SimMethod::pspline, SimMethod::loess, SimMethod::ols};
  cfg.neu.max_iters = 5;
  cfg.neu.proposals_per_iter = 20;
  const auto r = run_sim_study(cfg);
  ASSERT_EQ(r.rows.size(), 4u);
  for (const auto& row : r.rows) {
    EXPECT_GT(row.mse, 0.0);
    EXPECT_LE(row.ci.low, row.mean_error);
    EXPECT_LE(row.mean_error, row.ci.high);
    EXPECT_LE(row.mean_error * row.mean_error, row.mse);
  }
  EXPECT_LT(r.at(SimMethod::pspline).mse, r.at(SimMethod::ols).mse);
  const auto csv1 = study_csv({r}), csv2 = study_csv({run_sim_study(cfg)});
  EXPECT_EQ(csv1, csv2);
}

TEST(SimStudy, NoiselessInterpolatingSplineFitsTrainingPoints) {
  SimulationSpec spec;
  spec.sigma = 0.0;
  spec.target = Target::m2;
  const auto s = generate_simulation(spec);
  const auto idx = s.training_idx();
  Vector x(idx.size()), y(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) x(i) = s.x(idx[i]), y(i) = s.y(idx[i]);
  const auto fit = baselines::pspline_fit(x, y, 0.0, 96);
  double mse = 0.0;
  for (Index i = 0; i < x.size(); ++i) mse += std::pow(fit.predict(x(i)) - y(i), 2);
  EXPECT_LT(mse / x.size(), 1e-8);
}

TEST(Manifest, HashTracksConfig) {
  const json a = {{"sigma", 0.1}}, b = {{"sigma", 0.2}};
  EXPECT_EQ(run_manifest("x", a, 1)["config_hash"], run_manifest("x", a, 1)["config_hash"]);
  EXPECT_NE(run_manifest("x", a, 1)["config_hash"], run_manifest("x", b, 1)["config_hash"]);
  EXPECT_FALSE(run_manifest("x", a, 1).contains("timings"));
  EXPECT_EQ(hex64(fnv1a("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(fnv1a("a")), "af63dc4c8601ec8c");
}
