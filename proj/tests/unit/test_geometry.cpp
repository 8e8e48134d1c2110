#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "neu/geometry/local_transience.hpp"
#include "oracles.hpp"

using namespace neu;
using namespace neu::geometry;

namespace {

Point pt(double a, double b) {
  Point p(2);
  p << a, b;
  return p;
}

Matrix planar_j() {
  Matrix j(2, 2);
  j << 0, -1, 1, 0;
  return j;
}

RdrTheta random_rdr(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> s(0.1, 2.0);
  return RdrTheta(oracle::random_vector(rng, d, -1, 1), s(rng), SkewMatrix(oracle::random_skew(rng, d, 3.0)));
}

BumpTheta random_bump(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> s(0.05, 2.0), frac(0.0, 0.98), ang(0, 2 * std::numbers::pi);
  const double sigma = s(rng);
  const double len = frac(rng) / bump_lipschitz(sigma);
  const double a = ang(rng);
  return BumpTheta(oracle::random_vector(rng, 2, -1, 1), sigma, pt(len * std::cos(a), len * std::sin(a)));
}

}  // namespace

TEST(Bump, BoundaryIsZero) {
  EXPECT_EQ(bump(1.0, 1.0), 0.0);
  EXPECT_EQ(bump(3.7, 3.7), 0.0);
  EXPECT_EQ(bump(5.0, 1.0), 0.0);
}

TEST(Bump, CentreValue) { EXPECT_NEAR(bump(0.0, 2.5), std::exp(-1.0), 1e-16); }

TEST(Bump, HalfRadiusMatchesScalarOracle) { EXPECT_NEAR(bump(0.5, 1.0), 0.263597138115726770, 1e-15); }

TEST(Bump, RejectsBadArguments) {
  EXPECT_THROW(bump(-0.1, 1.0), DomainError);
  EXPECT_THROW(bump(std::nan(""), 1.0), DomainError);
  EXPECT_THROW(bump(0.1, 0.0), DomainError);
}

TEST(Bump, MonotoneNonincreasing) {
  double prev = bump(0.0, 1.3);
  for (int i = 1; i <= 2000; ++i) {
    const double v = bump(1.5 * i / 2000.0, 1.3);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(Bump, LiteralFormDiffersAwayFromUnitSigma) {
  EXPECT_NEAR(bump(0.5, 1.0, BumpForm::literal), bump(0.5, 1.0), 1e-15);
  EXPECT_NE(bump(0.5, 2.0, BumpForm::literal), bump(0.5, 2.0));
}

TEST(Bump, LipschitzConstantIsSupOfDerivative) {
  EXPECT_NEAR(bump_unit_lipschitz(), 0.79842975183359954, 1e-15);
  double best = 0.0;
  for (int i = 0; i < 200000; ++i) best = std::max(best, std::abs(bump_derivative(i / 200000.0, 1.0)));
  EXPECT_LE(best, bump_unit_lipschitz() + 1e-15);
  EXPECT_NEAR(best, bump_unit_lipschitz(), 1e-8);
  EXPECT_NEAR(bump_lipschitz(4.0), bump_unit_lipschitz() / 4.0, 1e-16);
  EXPECT_EQ(bump_lipschitz(0.0), 0.0);
}

TEST(Bump, DerivativeMatchesFiniteDifference) {
  for (double r : {0.1, 0.4, 0.7, 0.95}) {
    const double h = 1e-6;
    const double fd = (bump(r + h, 1.7) - bump(r - h, 1.7)) / (2 * h);
    EXPECT_NEAR(bump_derivative(r, 1.7), fd, 1e-8);
  }
}

TEST(Skew, RejectsNonSkew) {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  EXPECT_THROW(SkewMatrix{m}, DomainError);
  EXPECT_THROW(mat_exp(SkewMatrix(m)), DomainError);
}

TEST(MatExp, ZeroIsIdentity) {
  for (int d = 1; d <= 6; ++d) EXPECT_TRUE(mat_exp(SkewMatrix::zero(d)).matrix().isIdentity(0.0));
}

TEST(MatExp, QuarterTurn) {
  Matrix a(2, 2);
  a << 0, -std::numbers::pi / 2, std::numbers::pi / 2, 0;
  Matrix expected(2, 2);
  expected << 0, -1, 1, 0;
  EXPECT_LE((mat_exp(SkewMatrix(a)).matrix() - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((oracle::series_exp(a) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MatExp, GroupInverse) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 5;
    const SkewMatrix a(oracle::random_skew(rng, d, 2.0));
    const Matrix prod = mat_exp(a).matrix() * mat_exp(-a).matrix();
    EXPECT_LE((prod - Matrix::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(MatExp, AgreesWithSeries) {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 2 + trial % 5;
    const Matrix a = oracle::random_skew(rng, d, 1.5);
    worst = std::max(worst, (mat_exp(SkewMatrix(a)).matrix() - oracle::series_exp(a)).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-11);
}

TEST(MatExp, CachedExponentialMatchesDense) {
  std::mt19937_64 rng(8);
  for (int d = 2; d <= 7; ++d) {
    const SkewMatrix a(oracle::random_skew(rng, d, 2.0));
    const SkewExponential cached(a);
    const Vector v = oracle::random_vector(rng, d, -1, 1);
    for (double t : {-1.3, 0.0, 0.2, 2.5}) {
      const Vector ref = oracle::series_exp(t * a.matrix()) * v;
      EXPECT_LE((cached.apply(t, v) - ref).cwiseAbs().maxCoeff(), 1e-11) << "d=" << d << " t=" << t;
    }
  }
}

TEST(Rdr, OutsideSupportUnchanged) {
  const RdrTheta th(pt(0, 0), 1.0, SkewMatrix(3.0 * planar_j()));
  const Point x = pt(1.0, 0.0);
  EXPECT_EQ(rdr_apply(x, th), x);
  EXPECT_EQ(rdr_invert(pt(0.6, 0.9), th), pt(0.6, 0.9));
}

TEST(Rdr, CentreFixed) {
  const RdrTheta th(pt(0.3, -0.2), 1.0, SkewMatrix(3.0 * planar_j()));
  EXPECT_EQ(rdr_apply(th.center(), th), th.center());
}

TEST(Rdr, QuarterTurnExample) {
  const double t = (std::numbers::pi / 2) / 0.263597138115726770;
  EXPECT_NEAR(t, 5.95907959404806386, 1e-13);
  const RdrTheta th(pt(0, 0), 2.0, SkewMatrix(t * planar_j()));
  const Point y = rdr_apply(pt(1, 0), th);
  const Eigen::Vector2d ref = oracle::rotate2(t * 0.263597138115726770, Eigen::Vector2d(1, 0));
  EXPECT_LE((y - ref).norm(), 1e-9);
  EXPECT_LE((y - pt(0, 1)).norm(), 1e-9);
  EXPECT_LE((rdr_invert(pt(0, 1), th) - pt(1, 0)).norm(), 1e-9);
}

TEST(Rdr, DimensionMismatch) {
  const RdrTheta th(pt(0, 0), 1.0, SkewMatrix::zero(2));
  EXPECT_THROW(rdr_apply(Point::Zero(3), th), DomainError);
  EXPECT_THROW(rdr_invert(Point::Zero(1), th), DomainError);
}

TEST(Rdr, RandomRoundtripAndIsometry) {
  std::mt19937_64 rng(1);
  double roundtrip = 0.0, iso = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int d = 2 + i % 4;
    const RdrTheta th = random_rdr(rng, d);
    const Point x = oracle::random_vector(rng, d, -2, 2);
    const Point y = rdr_apply(x, th);
    roundtrip = std::max(roundtrip, (rdr_invert(y, th) - x).norm());
    iso = std::max(iso, std::abs((y - th.center()).norm() - (x - th.center()).norm()));
  }
  EXPECT_LT(roundtrip, 1e-10);
  EXPECT_LT(iso, 1e-12);
}

TEST(MicroBump, ZeroShiftIsIdentity) {
  const BumpTheta th(pt(0, 0), 1.0, pt(0, 0));
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const Point x = oracle::random_vector(rng, 2, -2, 2);
    EXPECT_EQ(microbump_apply(x, th), x);
  }
}

TEST(MicroBump, CentreExample) {
  const BumpTheta th(pt(0, 0), 1.0, pt(0.1, 0));
  const Point y = microbump_apply(pt(0, 0), th);
  EXPECT_NEAR(y(0), 0.0367879441171442322, 1e-16);
  EXPECT_EQ(y(1), 0.0);
  EXPECT_LE((microbump_invert(pt(0.0367879441171442322, 0), th) - pt(0, 0)).norm(), 1e-10);
}

TEST(MicroBump, OutsideSupport) {
  const BumpTheta th(pt(0, 0), 1.0, pt(0.5, 0.5));
  EXPECT_EQ(microbump_apply(pt(1, 0), th), pt(1, 0));
  EXPECT_EQ(microbump_invert(pt(0, 1.5), th), pt(0, 1.5));
}

TEST(MicroBump, ContractionEnforced) {
  const double limit = 1.0 / bump_unit_lipschitz();
  EXPECT_NO_THROW(BumpTheta(pt(0, 0), 1.0, pt(0.999 * limit, 0)));
  EXPECT_THROW(BumpTheta(pt(0, 0), 1.0, pt(1.001 * limit, 0)), InvertibilityError);
  const BumpTheta bad = BumpTheta::unchecked(pt(0, 0), 1.0, pt(3.0, 0));
  EXPECT_THROW(microbump_invert(pt(0.1, 0), bad), InvertibilityError);
}

TEST(MicroBump, WrongDimension) {
  const BumpTheta th(pt(0, 0), 1.0, pt(0.1, 0));
  EXPECT_THROW(microbump_apply(Point::Zero(3), th), DomainError);
}

TEST(MicroBump, RandomRoundtrip) {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const BumpTheta th = random_bump(rng);
    const Point x = oracle::random_vector(rng, 2, -2, 2);
    worst = std::max(worst, (microbump_invert(microbump_apply(x, th), th) - x).norm());
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(MicroBump, NearBoundContractionStillInverts) {
  const double limit = 1.0 / bump_unit_lipschitz();
  const BumpTheta th(pt(0, 0), 1.0, pt(0.9999 * limit, 0));
  for (double s = -0.9; s <= 0.9; s += 0.01) {
    const Point x = pt(s, 0.05);
    EXPECT_LT((microbump_invert(microbump_apply(x, th), th) - x).norm(), 1e-10);
  }
}

template <typename ApplyFn>
void expect_identity_jacobian_at(ApplyFn apply, const Point& c, double radius) {
  const double h = 1e-6;
  for (double offset : {-1e-4, 1e-4}) {
    for (int k = 0; k < 8; ++k) {
      const double a = k * std::numbers::pi / 4;
      const Point dir = pt(std::cos(a), std::sin(a));
      const Point x = c + (radius + offset) * dir;
      for (int axis = 0; axis < 2; ++axis) {
        const Point e = Point::Unit(2, axis);
        const Point col = (apply(x + h * e) - apply(x - h * e)) / (2 * h);
        EXPECT_LT((col - e).norm(), 1e-3);
      }
    }
  }
}

TEST(Smoothness, IdentityJacobianNearBoundary) {
  const RdrTheta rdr(pt(0.2, 0.1), 1.0, SkewMatrix(4.0 * planar_j()));
  expect_identity_jacobian_at([&](const Point& x) { return rdr_apply(x, rdr); }, rdr.center(), 1.0);
  const BumpTheta mb(pt(0.2, 0.1), 1.0, pt(0.9, 0.6));
  expect_identity_jacobian_at([&](const Point& x) { return microbump_apply(x, mb); }, mb.center(), 1.0);
}

TEST(Transience, SamePointGivesIdentity) {
  const auto r = local_transience<RapidRotation>(pt(1, 1), pt(1, 1), pt(3, 3));
  ASSERT_EQ(r.thetas.size(), 1u);
  EXPECT_TRUE(r.thetas[0].is_identity());
  const auto m = local_transience<MicroBump>(pt(1, 1), pt(1, 1), pt(3, 3));
  EXPECT_TRUE(m.thetas[0].is_identity());
}

template <typename F>
Point run(const Transience<F>& tr, Point p) {
  for (const auto& t : tr.thetas) p = F::apply(p, t);
  return p;
}

TEST(Transience, RdrMovesAndFixes) {
  const Point x = pt(0, 0), y = pt(0.1, 0), z = pt(5, 5);
  const auto tr = local_transience<RapidRotation>(x, y, z);
  EXPECT_EQ(tr.steps, 1);
  EXPECT_LT((run(tr, x) - y).norm(), 1e-9);
  EXPECT_LT((run(tr, z) - z).norm(), 1e-9);
  const Matrix& gen = tr.thetas[0].generator().matrix();
  EXPECT_NEAR(gen(1, 0), -gen(0, 1), 1e-15);
}

TEST(Transience, MicroBumpMovesAndFixes) {
  const Point x = pt(0, 0), y = pt(0.1, 0), z = pt(5, 5);
  const auto tr = local_transience<MicroBump>(x, y, z);
  EXPECT_EQ(tr.steps, 1);
  EXPECT_LT((run(tr, x) - y).norm(), 1e-9);
  EXPECT_EQ(run(tr, z), z);
}

TEST(Transience, MicroBumpFallsBackToSubSteps) {
  const Point x = pt(0, 0), y = pt(1, 0), z = pt(1.2, 0.3);
  const auto tr = local_transience<MicroBump>(x, y, z);
  EXPECT_GT(tr.steps, 1);
  EXPECT_LT((run(tr, x) - y).norm(), 1e-9);
  EXPECT_EQ(run(tr, z), z);
  for (const auto& t : tr.thetas) EXPECT_TRUE(t.contractive());
}

TEST(Transience, RdrSubStepsWithCrowdedGuard) {
  const Point x = pt(0, 0), y = pt(1, 0);
  const std::vector<Point> guard = {pt(0.5, 0.05), pt(0.2, -0.1), pt(3, 3)};
  const auto tr = local_transience<RapidRotation>(x, y, guard);
  EXPECT_GT(tr.steps, 1);
  EXPECT_LT((run(tr, x) - y).norm(), 1e-9);
  for (const auto& g : guard) EXPECT_EQ(run(tr, g), g);
}

TEST(Transience, RdrThreeDimensions) {
  Point x(3), y(3), z(3);
  x << 0.1, 0.2, 0.3;
  y << 0.3, 0.1, 0.2;
  z << 1, 1, 1;
  const auto tr = local_transience<RapidRotation>(x, y, z);
  EXPECT_LT((run(tr, x) - y).norm(), 1e-9);
  EXPECT_EQ(run(tr, z), z);
}

TEST(Transience, Precondition) {
  EXPECT_THROW(local_transience<RapidRotation>(pt(0, 0), pt(1, 0), pt(0.5, 0.5)), PreconditionError);
  EXPECT_THROW(local_transience<MicroBump>(pt(0, 0), pt(1, 0), pt(1, 0)), PreconditionError);
}
