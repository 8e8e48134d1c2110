#include <gtest/gtest.h>

#include "neu/optim/finite_diff.hpp"
#include "neu/optim/nelder_mead.hpp"

using namespace neu;
using namespace neu::optim;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(v.size());
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

double rosenbrock(const Vector& x) { return std::pow(1.0 - x(0), 2) + 100.0 * std::pow(x(1) - x(0) * x(0), 2); }

}  // namespace

TEST(NelderMead, ConvexBowl) {
  const auto r = nelder_mead([](const Vector& x) { return x.squaredNorm(); }, vec({1, 1}));
  EXPECT_LT(r.x.norm(), 1e-6);
}

TEST(NelderMead, Rosenbrock) {
  NelderMeadOptions o;
  o.max_evals = 10000;
  const auto r = nelder_mead(rosenbrock, vec({-1.2, 1}), o);
  EXPECT_LT(r.f, 1e-6);
  EXPECT_LE(r.evaluations, 10000 + 3);
  EXPECT_NEAR(r.x(0), 1.0, 1e-2);
}

TEST(NelderMead, ConstantObjectiveReturnsStart) {
  const Vector x0 = vec({0.3, -2, 5});
  const auto r = nelder_mead([](const Vector&) { return 4.0; }, x0);
  EXPECT_EQ(r.x, x0);
  EXPECT_EQ(r.f, 4.0);
}

TEST(NelderMead, NonFiniteEverywhereThrows) {
  EXPECT_THROW(nelder_mead([](const Vector&) { return std::nan(""); }, vec({1, 2})), EvaluationError);
}

TEST(NelderMead, BudgetIsRespected) {
  NelderMeadOptions o;
  o.max_evals = 50;
  const auto r = nelder_mead(rosenbrock, vec({-1.2, 1}), o);
  EXPECT_EQ(r.reason, StopReason::budget);
  EXPECT_LE(r.evaluations, 50 + 3);
}

TEST(FiniteDiff, QuadraticMinimum) {
  const Vector target = vec({0.5, -1.5, 2});
  const Vector w = vec({1, 3, 0.5});
  auto f = [&](const Vector& x) { return (w.array() * (x - target).array().square()).sum(); };
  FiniteDiffOptions o;
  o.initial_step = 0.25;
  o.grad_tol = 1e-8;
  const auto r = finite_diff_descent(f, Vector::Zero(3), o);
  EXPECT_LT((r.x - target).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(FiniteDiff, AgreesWithNelderMead) {
  auto f = [](const Vector& x) {
    return std::exp(0.3 * x(0)) + std::exp(-0.5 * x(0)) + std::pow(x(1) - 0.2 * x(0), 2) + 0.1 * x(1) * x(1);
  };
  FiniteDiffOptions fo;
  fo.initial_step = 0.5;
  fo.grad_tol = 1e-9;
  NelderMeadOptions no;
  no.x_tol = 1e-10;
  no.f_tol = 1e-16;
  const auto a = finite_diff_descent(f, vec({2, 2}), fo);
  const auto b = nelder_mead(f, vec({2, 2}), no);
  EXPECT_LT((a.x - b.x).norm(), 1e-4);
}

TEST(FiniteDiff, StepCollapseIsReported) {
  // every move away from x0 costs a jump of 1 that the slope never repays
  const Vector x0 = vec({1.0});
  auto f = [&](const Vector& x) { return 1e-3 * x(0) + (x == x0 ? 0.0 : 1.0); };
  FiniteDiffOptions o;
  o.initial_step = 1.0;
  const auto r = finite_diff_descent(f, x0, o);
  EXPECT_EQ(r.reason, StopReason::step_collapse);
  EXPECT_EQ(r.x, x0);
}

TEST(FiniteDiff, NonFiniteStartThrows) {
  EXPECT_THROW(finite_diff_descent([](const Vector&) { return std::nan(""); }, vec({0})), EvaluationError);
}
