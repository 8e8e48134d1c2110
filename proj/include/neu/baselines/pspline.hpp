#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "neu/types.hpp"

namespace neu::baselines {

/// Clamped cubic B-spline basis on a set of breakpoints (boundaries included).
class CubicBSplineBasis {
 public:
  static constexpr int kDegree = 3;

  explicit CubicBSplineBasis(std::vector<double> breakpoints) : breaks_(std::move(breakpoints)) {
    if (breaks_.size() < 2) throw DomainError("CubicBSplineBasis: need at least two breakpoints");
    for (std::size_t i = 1; i < breaks_.size(); ++i)
      if (!(breaks_[i] > breaks_[i - 1])) throw DomainError("CubicBSplineBasis: breakpoints must increase");
    knots_.assign(kDegree, breaks_.front());
    knots_.insert(knots_.end(), breaks_.begin(), breaks_.end());
    knots_.insert(knots_.end(), kDegree, breaks_.back());
  }

  /// Number of basis functions: breakpoints + 2.
  Index size() const { return static_cast<Index>(breaks_.size()) + 2; }
  double lo() const { return breaks_.front(); }
  double hi() const { return breaks_.back(); }
  const std::vector<double>& breakpoints() const { return breaks_; }

  /// Values and first two derivatives of the four nonzero basis functions at
  /// x in [lo, hi]; `first` is the index of the first of them.
  void evaluate(double x, Index& first, std::array<std::array<double, 4>, 3>& ders) const {
    x = std::clamp(x, lo(), hi());
    const int span = find_span(x);
    first = span - kDegree;
    // derivative form of the Cox-de Boor recursion
    double ndu[4][4];
    double left[4], right[4];
    ndu[0][0] = 1.0;
    for (int j = 1; j <= kDegree; ++j) {
      left[j] = x - knots_[span + 1 - j];
      right[j] = knots_[span + j] - x;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        ndu[j][r] = right[r + 1] + left[j - r];
        const double temp = ndu[r][j - 1] / ndu[j][r];
        ndu[r][j] = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      ndu[j][j] = saved;
    }
    for (int j = 0; j <= kDegree; ++j) ders[0][j] = ndu[j][kDegree];
    double a[2][4];
    for (int r = 0; r <= kDegree; ++r) {
      int s1 = 0, s2 = 1;
      a[0][0] = 1.0;
      for (int k = 1; k <= 2; ++k) {
        double d = 0.0;
        const int rk = r - k, pk = kDegree - k;
        if (r >= k) {
          a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
          d = a[s2][0] * ndu[rk][pk];
        }
        const int j1 = rk >= -1 ? 1 : -rk;
        const int j2 = (r - 1 <= pk) ? k - 1 : kDegree - r;
        for (int j = j1; j <= j2; ++j) {
          a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
          d += a[s2][j] * ndu[rk + j][pk];
        }
        if (r <= pk) {
          a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
          d += a[s2][k] * ndu[r][pk];
        }
        ders[k][r] = d;
        std::swap(s1, s2);
      }
    }
    double factor = kDegree;
    for (int k = 1; k <= 2; ++k) {
      for (int j = 0; j <= kDegree; ++j) ders[k][j] *= factor;
      factor *= (kDegree - k);
    }
  }

  /// n x size() matrix of basis values (linear continuation outside the range).
  Matrix design(const Vector& x) const {
    Matrix b = Matrix::Zero(x.size(), size());
    std::array<std::array<double, 4>, 3> d;
    Index first = 0;
    for (Index i = 0; i < x.size(); ++i) {
      const double xc = std::clamp(x(i), lo(), hi());
      evaluate(xc, first, d);
      for (int j = 0; j < 4; ++j) b(i, first + j) = d[0][j] + (x(i) - xc) * d[1][j];
    }
    return b;
  }

  /// Omega_ij = int B_i'' B_j'' over [lo, hi]; exact with two Gauss points per
  /// interval since B'' is piecewise linear.
  Matrix penalty() const {
    Matrix omega = Matrix::Zero(size(), size());
    const double g = 1.0 / std::sqrt(3.0);
    std::array<std::array<double, 4>, 3> d;
    Index first = 0;
    for (std::size_t k = 0; k + 1 < breaks_.size(); ++k) {
      const double a = breaks_[k], b = breaks_[k + 1];
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (double s : {-g, g}) {
        evaluate(mid + s * half, first, d);
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) omega(first + i, first + j) += half * d[2][i] * d[2][j];
      }
    }
    return omega;
  }

 private:
  int find_span(double x) const {
    const int n = static_cast<int>(size()) - 1;
    if (x >= knots_[n + 1]) return n;
    const auto it = std::upper_bound(knots_.begin() + kDegree, knots_.begin() + n + 1, x);
    return static_cast<int>(it - knots_.begin()) - 1;
  }

  std::vector<double> breaks_;
  std::vector<double> knots_;
};

/// Breakpoints at equally spaced sample quantiles (duplicates dropped).
inline std::vector<double> quantile_breakpoints(const Vector& x, int n_knots) {
  if (n_knots < 2) throw DomainError("pspline: need at least two knots");
  std::vector<double> s(x.data(), x.data() + x.size());
  std::sort(s.begin(), s.end());
  std::vector<double> out;
  for (int k = 0; k < n_knots; ++k) {
    const double pos = (s.size() - 1) * double(k) / (n_knots - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    const double q = s[lo] + (pos - lo) * (s[hi] - s[lo]);
    if (out.empty() || q > out.back()) out.push_back(q);
  }
  if (out.size() < 2) throw DomainError("pspline: x has fewer than two distinct values");
  return out;
}

/// Penalised cubic spline minimising sum (y_i - g(x_i))^2 + lambda int g''^2.
class PSpline {
 public:
  PSpline(CubicBSplineBasis basis, Vector coef, double lambda)
      : basis_(std::move(basis)), coef_(std::move(coef)), lambda_(lambda) {}

  double predict(double x) const {
    Vector v(1);
    v << x;
    return (basis_.design(v) * coef_)(0);
  }
  Vector predict(const Vector& x) const { return basis_.design(x) * coef_; }

  double lambda() const { return lambda_; }
  Index n_knots() const { return static_cast<Index>(basis_.breakpoints().size()); }
  const Vector& coefficients() const { return coef_; }

 private:
  CubicBSplineBasis basis_;
  Vector coef_;
  double lambda_;
};

inline PSpline pspline_fit(const Vector& x, const Vector& y, double lambda, int n_knots) {
  require_dim(y.size(), x.size(), "pspline_fit");
  require_finite(x, "pspline_fit x");
  require_finite(y, "pspline_fit y");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("pspline_fit: lambda must be >= 0");
  if (n_knots > x.size()) throw DomainError("pspline_fit: more knots than observations");
  CubicBSplineBasis basis(quantile_breakpoints(x, n_knots));
  const Matrix b = basis.design(x);
  Vector coef;
  if (lambda == 0.0) {
    // minimum-norm least squares; interpolates when the basis is rich enough
    coef = b.completeOrthogonalDecomposition().solve(y);
  } else {
    const Matrix lhs = b.transpose() * b + lambda * basis.penalty();
    Eigen::LLT<Matrix> llt(lhs);
    if (llt.info() != Eigen::Success) throw NumericalError("pspline_fit: penalised system is singular");
    coef = llt.solve(b.transpose() * y);
  }
  if (!coef.allFinite()) throw NumericalError("pspline_fit: penalised system is singular");
  return PSpline(std::move(basis), std::move(coef), lambda);
}

/// Fold label of each observation: rank of x modulo `folds`.
inline std::vector<int> rank_folds(const Vector& x, int folds) {
  std::vector<Index> order(x.size());
  for (Index i = 0; i < x.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return x(a) < x(b); });
  std::vector<int> label(x.size());
  for (std::size_t r = 0; r < order.size(); ++r) label[order[r]] = static_cast<int>(r % folds);
  return label;
}

struct PSplineGrid {
  std::vector<double> lambdas{1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
  std::vector<int> knots{5, 8, 12, 20, 30};
  int folds = 4;
};

struct PSplineCvResult {
  PSpline model;
  double cv_mse;
  double lambda;
  int n_knots;
};

/// Chooses (lambda, knots) by k-fold cross-validation, then refits on all data.
inline PSplineCvResult pspline_cv(const Vector& x, const Vector& y, const PSplineGrid& grid = {}) {
  const auto label = rank_folds(x, grid.folds);
  double best = std::numeric_limits<double>::infinity();
  double best_lambda = grid.lambdas.front();
  int best_knots = grid.knots.front();
  for (int knots : grid.knots) {
    for (double lambda : grid.lambdas) {
      double sse = 0.0;
      Index count = 0;
      bool ok = true;
      for (int f = 0; f < grid.folds && ok; ++f) {
        std::vector<Index> tr, te;
        for (Index i = 0; i < x.size(); ++i) (label[i] == f ? te : tr).push_back(i);
        if (te.empty() || static_cast<Index>(tr.size()) < knots) {
          ok = false;
          break;
        }
        try {
          const PSpline s = pspline_fit(x(tr), y(tr), lambda, knots);
          sse += (s.predict(Vector(x(te))) - y(te)).squaredNorm();
          count += static_cast<Index>(te.size());
        } catch (const std::exception&) {
          ok = false;
        }
      }
      if (!ok || count == 0) continue;
      const double mse = sse / count;
      if (mse < best) {
        best = mse;
        best_lambda = lambda;
        best_knots = knots;
      }
    }
  }
  if (!std::isfinite(best)) throw NumericalError("pspline_cv: no grid point could be fitted");
  return {pspline_fit(x, y, best_lambda, best_knots), best, best_lambda, best_knots};
}

}  // namespace neu::baselines
