#include <gtest/gtest.h>

#include <random>

#include "neu/baselines/ola.hpp"
#include "neu/meta/neu_json.hpp"

using namespace neu;
using namespace neu::meta;
using geometry::MicroBump;
using geometry::RapidRotation;

namespace {

Matrix sample(int n, double sigma, std::uint64_t seed, double (*m)(double)) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> e(0.0, 1.0);
  Matrix d(n, 2);
  for (int i = 0; i < n; ++i) {
    const double x = u(rng);
    d.row(i) << x, m(x) + sigma * e(rng);
  }
  return d;
}

double wiggle(double x) { return std::cos(std::exp(-6.0 * x + 3.0)); }
double line(double x) { return 1.0 + 2.0 * x; }

NeuConfig small_config(std::uint64_t seed) {
  NeuConfig c;
  c.seed = seed;
  c.max_iters = 15;
  c.proposals_per_iter = 30;
  c.refine_iters = 30;
  return c;
}

double ols_sse(const Matrix& d) {
  const auto ola = baselines::ols_ola();
  return ola.loss_in(ola.fit_inner({0.0}, d), {0.0}, d);
}

}  // namespace

TEST(NeuFit, NoProposalsGivesBaseFit) {
  const Matrix d = sample(40, 0.1, 1, wiggle);
  NeuConfig c = small_config(1);
  c.proposals_per_iter = 0;
  const auto r = neu_fit<RapidRotation>(baselines::ols_ola(), learning::Dataset(d), c);
  EXPECT_TRUE(r.chain.empty());
  EXPECT_EQ(r.gain, 1.0);
  const auto base = learning::optimal_evaluation(baselines::ols_ola(), learning::Dataset(d));
  EXPECT_EQ(r.evaluation.beta_hat, base.beta_hat);
}

TEST(NeuFit, ExactLineAcceptsNothing) {
  const Matrix tr = sample(30, 0.0, 2, line), va = sample(10, 0.0, 3, line);
  const auto r = neu_fit<RapidRotation>(baselines::ols_ola(), learning::Dataset(tr, va), small_config(2));
  EXPECT_EQ(r.accepted(), 0u);
  EXPECT_EQ(r.gain, 1.0);
}

TEST(NeuFit, BeatsOlsOnTrainingData) {
  const Matrix d = sample(100, 0.1, 3, wiggle);
  const auto ola = baselines::ols_ola();
  NeuConfig c = small_config(3);
  c.max_iters = 60;
  c.proposals_per_iter = 100;
  for (const bool rdr : {true, false}) {
    double neu_loss = 0.0;
    if (rdr) {
      const auto r = neu_fit<RapidRotation>(ola, learning::Dataset(d), c);
      neu_loss = deconfigured_loss(r.chain, ola, r.evaluation.beta_hat, d);
      EXPECT_GT(r.perf_in_final, r.perf_in_initial);
    } else {
      const auto r = neu_fit<MicroBump>(ola, learning::Dataset(d), c);
      neu_loss = deconfigured_loss(r.chain, ola, r.evaluation.beta_hat, d);
      EXPECT_GT(r.perf_in_final, r.perf_in_initial);
    }
    EXPECT_LT(neu_loss, ols_sse(d)) << (rdr ? "rdr" : "microbump");
  }
}

TEST(NeuFit, AcceptedPerformancesStrictlyIncrease) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Matrix tr = sample(60, 0.1, 10 + seed, wiggle), va = sample(20, 0.1, 20 + seed, wiggle);
    const auto r = neu_fit<RapidRotation>(baselines::ols_ola(), learning::Dataset(tr, va), small_config(seed));
    double last = r.history.front().perf_out;
    std::size_t n_acc = 0;
    for (std::size_t i = 1; i < r.history.size(); ++i) {
      const auto& s = r.history[i];
      if (s.accepted) {
        EXPECT_GT(s.perf_out, last);
        ++n_acc;
      } else {
        EXPECT_EQ(s.perf_out, last);
      }
      last = s.perf_out;
    }
    EXPECT_EQ(n_acc, r.chain.size());
    EXPECT_GE(r.perf_out_final, r.perf_out_initial);
    EXPECT_GE(r.gain, 1.0);
  }
}

TEST(NeuFit, WorkingDataMatchesChain) {
  const Matrix tr = sample(50, 0.1, 5, wiggle), va = sample(15, 0.1, 6, wiggle);
  const auto ola = baselines::ols_ola();
  const auto r = neu_fit<RapidRotation>(ola, learning::Dataset(tr, va), small_config(5));
  const auto again = neu_refit(r.chain, ola, learning::Dataset(tr, va));
  EXPECT_LT((again.beta_hat - r.evaluation.beta_hat).norm(), 1e-12);
}

TEST(NeuFit, DeterministicAcrossRunsAndThreads) {
  const Matrix tr = sample(50, 0.1, 7, wiggle), va = sample(15, 0.1, 8, wiggle);
  const learning::Dataset data(tr, va);
  NeuConfig c = small_config(9);
  const auto a = neu_result_json(neu_fit<RapidRotation>(baselines::ols_ola(), data, c)).dump();
  const auto b = neu_result_json(neu_fit<RapidRotation>(baselines::ols_ola(), data, c)).dump();
  c.threads = 3;
  const auto t = neu_result_json(neu_fit<RapidRotation>(baselines::ols_ola(), data, c)).dump();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, t);
  c.threads = 1;
  const auto m1 = neu_result_json(neu_fit<MicroBump>(baselines::ols_ola(), data, c)).dump();
  const auto m2 = neu_result_json(neu_fit<MicroBump>(baselines::ols_ola(), data, c)).dump();
  EXPECT_EQ(m1, m2);
}

TEST(NeuFit, EpsilonWithoutValidationIsConfigurationError) {
  NeuConfig c = small_config(0);
  c.epsilon = 0.9;
  EXPECT_THROW(neu_fit<RapidRotation>(baselines::ols_ola(), learning::Dataset(sample(20, 0.1, 0, wiggle)), c),
               ConfigurationError);
  c.epsilon = 0.0;
  EXPECT_THROW(c.validate(), ConfigurationError);
  c.epsilon = 1.0;
  c.max_iters = 0;
  EXPECT_THROW(c.validate(), ConfigurationError);
}

TEST(NeuFit, MicroBumpNeedsPlanarData) {
  EXPECT_THROW(neu_fit<MicroBump>(baselines::pca_ola(1), learning::Dataset(Matrix::Random(10, 3)), small_config(0)),
               DomainError);
}

TEST(NeuFit, PcaExplainedVarianceDoesNotDrop) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  Matrix d(60, 3);
  for (Index i = 0; i < d.rows(); ++i) {
    const double t = n(rng);
    d.row(i) << t, std::sin(2.0 * t) + 0.1 * n(rng), 0.3 * n(rng);
  }
  const auto ola = baselines::pca_ola(1);
  const auto r = neu_fit<RapidRotation>(ola, learning::Dataset(d), small_config(11));
  EXPECT_GE(r.perf_in_final, r.perf_in_initial);
  EXPECT_GE(r.gain, 1.0);
}

TEST(PerformanceGain, EdgeCases) {
  EXPECT_EQ(performance_gain(-2.0, -1.0), 2.0);
  EXPECT_EQ(performance_gain(1.0, 2.0), 2.0);
  EXPECT_EQ(performance_gain(0.0, 0.0), 1.0);
  EXPECT_TRUE(std::isinf(performance_gain(-1.0, 0.0)));
}

TEST(NeuPredict, EmptyChainIsBasePrediction) {
  const Matrix d = sample(30, 0.1, 12, wiggle);
  const auto ola = baselines::ols_ola();
  const Params beta = ola.fit_inner({0.0}, d);
  const reconfig::RdrChain chain(2);
  Point x(2);
  x << 0.37, 123.0;
  EXPECT_EQ(neu_predict(chain, ola, beta, x)(1), beta(0) + beta(1) * 0.37);
  EXPECT_EQ(neu_predict(chain, ola, beta, x)(0), 0.37);
}

TEST(NeuPredict, OutsideSupportIsBasePrediction) {
  const auto ola = baselines::ols_ola();
  Params beta(2);
  beta << 0.5, -1.0;
  Point c(2);
  c << 10.0, 10.0;
  const auto chain = reconfig::RdrChain(2).append(
      geometry::RdrTheta(c, 1.0, geometry::SkewMatrix::from_plane(Point::Unit(2, 0), Point::Unit(2, 1), 0.5)));
  Point x(2);
  x << 0.25, 0.0;
  EXPECT_EQ(neu_predict(chain, ola, beta, x)(1), 0.25);
}

TEST(NeuPredict, TrainingPredictionsLieOnReconfiguredPattern) {
  const Matrix tr = sample(60, 0.1, 13, wiggle);
  const auto ola = baselines::ols_ola();
  const auto r = neu_fit<RapidRotation>(ola, learning::Dataset(tr), small_config(13));
  ASSERT_GT(r.chain.size(), 0u);
  for (Index i = 0; i < tr.rows(); ++i) {
    const Point p = neu_predict(r, ola, Point(tr.row(i).transpose()));
    const Point q = r.chain.reconfigure(p);
    EXPECT_NEAR(q(1), ola.pattern(r.evaluation.beta_hat, q)(1), 1e-9);
  }
}

TEST(Sampler, ProposalsAreValid) {
  const Matrix d = sample(50, 0.1, 14, wiggle);
  const DataStats stats = DataStats::of(d);
  SamplerConfig cfg;
  for (int i = 0; i < 10000; ++i) {
    auto rng = proposal_rng(42, i / 100, i % 100);
    const auto b = propose_bump(cfg, rng, stats, i / 100);
    EXPECT_LE(b.sigma(), stats.diameter);
    EXPECT_GE(b.sigma(), stats.min_radius(cfg.radius_floor));
    EXPECT_LT(b.contraction(), 1.0);
    const auto t = propose_rdr(cfg, rng, stats, i / 100);
    EXPECT_LE(t.sigma(), stats.diameter);
    EXPECT_LE(t.generator().operator_norm() * geometry::bump_unit_lipschitz(), cfg.derivative_cap * (1 + 1e-12));
  }
}

TEST(Sampler, FixedSeedIsReproducible) {
  const DataStats stats = DataStats::of(sample(20, 0.1, 15, wiggle));
  auto r1 = proposal_rng(7, 3, 5), r2 = proposal_rng(7, 3, 5);
  const auto a = propose_bump({}, r1, stats, 3), b = propose_bump({}, r2, stats, 3);
  EXPECT_EQ(a.center(), b.center());
  EXPECT_EQ(a.sigma(), b.sigma());
  EXPECT_EQ(a.shift(), b.shift());
  auto r3 = proposal_rng(7, 3, 6);
  EXPECT_NE(propose_bump({}, r3, stats, 3).center(), a.center());
}

TEST(Sampler, CodecDecodesIntoValidRange) {
  const DataStats stats = DataStats::of(sample(20, 0.1, 16, wiggle));
  Vector v(5);
  v << 0.5, 0.5, 50.0, 1e6, -1e6;
  const auto b = ThetaCodec<MicroBump>::decode(v, {}, stats);
  EXPECT_EQ(b.sigma(), stats.diameter);
  EXPECT_LT(b.contraction(), 1.0);
}

TEST(NeuJson, HistoryExport) {
  const Matrix d = sample(30, 0.1, 17, wiggle);
  const auto r = neu_fit<RapidRotation>(baselines::ols_ola(), learning::Dataset(d), small_config(17));
  const auto j = neu_result_json(r);
  EXPECT_EQ(j["history"].size(), r.history.size());
  EXPECT_EQ(j["chain"]["thetas"].size(), r.chain.size());
  const std::string csv = neu_history_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(r.history.size()) + 1);
}
