#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "neu/baselines/pspline.hpp"
#include "neu/types.hpp"

namespace neu::baselines {

/// Local polynomial regression with tricube weights (1 - |d|^3)^3 over the
/// ceil(span * n) nearest neighbours of each query point.
class Loess {
 public:
  Loess(Vector x, Vector y, int degree, double span) : x_(std::move(x)), y_(std::move(y)), degree_(degree), span_(span) {
    require_dim(y_.size(), x_.size(), "loess");
    require_finite(x_, "loess x");
    require_finite(y_, "loess y");
    if (degree_ != 1 && degree_ != 2) throw DomainError("loess: degree must be 1 or 2");
    if (!(span_ > 0.0 && span_ <= 1.0)) throw DomainError("loess: span must lie in (0, 1]");
    neighbours_ = static_cast<Index>(std::ceil(span_ * x_.size()));
    if (neighbours_ < degree_ + 1) throw DomainError("loess: fewer neighbours than degree + 1");
  }

  int degree() const { return degree_; }
  double span() const { return span_; }

  double predict(double x0) const {
    const Index n = x_.size();
    std::vector<std::pair<double, Index>> dist(n);
    for (Index i = 0; i < n; ++i) dist[i] = {std::abs(x_(i) - x0), i};
    const Index q = neighbours_;
    std::nth_element(dist.begin(), dist.begin() + (q - 1), dist.end());
    const double dmax = dist[q - 1].first;

    Matrix a(q, degree_ + 1);
    Vector b(q);
    Index used = 0;
    for (Index k = 0; k < n && used < q; ++k) {
      const auto& [d, i] = dist[k];
      if (k >= q) break;
      double w = 1.0;
      if (dmax > 0.0) {
        const double u = std::min(1.0, d / dmax);
        const double t = 1.0 - u * u * u;
        w = t * t * t;
      }
      const double sw = std::sqrt(w);
      const double dx = x_(i) - x0;
      a(used, 0) = sw;
      a(used, 1) = sw * dx;
      if (degree_ == 2) a(used, 2) = sw * dx * dx;
      b(used) = sw * y_(i);
      ++used;
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
    const Vector coef = cod.solve(b);
    return coef(0);
  }

  Vector predict(const Vector& x) const {
    Vector out(x.size());
    for (Index i = 0; i < x.size(); ++i) out(i) = predict(x(i));
    return out;
  }

 private:
  Vector x_, y_;
  int degree_;
  double span_;
  Index neighbours_ = 0;
};

inline Loess loess_fit(const Vector& x, const Vector& y, int degree, double span = 0.75) {
  return Loess(x, y, degree, span);
}

struct LoessCvResult {
  Loess model;
  double cv_mse;
};

/// Picks the degree in {1, 2} by k-fold cross-validation at a fixed span.
inline LoessCvResult loess_cv(const Vector& x, const Vector& y, double span = 0.75, int folds = 4) {
  const auto label = rank_folds(x, folds);
  double best = std::numeric_limits<double>::infinity();
  int best_degree = 1;
  for (int degree : {1, 2}) {
    double sse = 0.0;
    Index count = 0;
    bool ok = true;
    for (int f = 0; f < folds && ok; ++f) {
      std::vector<Index> tr, te;
      for (Index i = 0; i < x.size(); ++i) (label[i] == f ? te : tr).push_back(i);
      try {
        const Loess l(x(tr), y(tr), degree, span);
        sse += (l.predict(Vector(x(te))) - y(te)).squaredNorm();
        count += static_cast<Index>(te.size());
      } catch (const DomainError&) {
        ok = false;
      }
    }
    if (!ok || count == 0) continue;
    if (sse / count < best) {
      best = sse / count;
      best_degree = degree;
    }
  }
  if (!std::isfinite(best)) throw NumericalError("loess_cv: no degree could be fitted");
  return {Loess(x, y, best_degree, span), best};
}

}  // namespace neu::baselines
