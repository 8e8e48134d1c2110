#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "neu/baselines/linear.hpp"
#include "neu/baselines/pca.hpp"
#include "neu/learning/algorithm.hpp"

namespace neu::baselines {

using learning::Hyper;
using learning::ObjectiveLearningAlgorithm;
using learning::Params;

namespace detail {

inline void split_xy(const Matrix& data, Matrix& x, Vector& y) {
  if (data.cols() < 2) throw DomainError("regression: points need at least one feature and one response");
  x = data.leftCols(data.cols() - 1);
  y = data.col(data.cols() - 1);
}

/// beta = [intercept, slopes...]; fitted response of a point's features.
inline double linear_response(const Params& beta, const Eigen::Ref<const Vector>& features) {
  return beta(0) + beta.tail(beta.size() - 1).dot(features);
}

inline double regression_sse(const Params& beta, const Matrix& data) {
  if (data.rows() == 0) return 0.0;
  const Matrix x = data.leftCols(data.cols() - 1);
  const Vector fitted = (x * beta.tail(beta.size() - 1)).array() + beta(0);
  return (data.col(data.cols() - 1) - fitted).squaredNorm();
}

inline learning::InnerRegularity linear_regularity(const Matrix& data, double cond_max, double iso_tol) {
  learning::InnerRegularity r;
  Matrix x;
  Vector y;
  split_xy(data, x, y);
  const Matrix design = with_intercept(x);
  Eigen::JacobiSVD<Matrix> svd(design);
  const Vector s = svd.singularValues();
  const double cond = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
  r.metric = cond;
  if (!(cond < cond_max) || design.rows() < design.cols()) {
    r.regular = false;
    r.detail = "design matrix is rank deficient or ill-conditioned (condition " + std::to_string(cond) + ")";
    return r;
  }
  // A scatter with a repeated top eigenvalue has no single best-fitting line
  // in the orthogonal sense, e.g. the corners of a square.
  if (data.rows() >= 2) {
    const Matrix c = data.rowwise() - data.colwise().mean();
    Eigen::SelfAdjointEigenSolver<Matrix> es(c.transpose() * c, Eigen::EigenvaluesOnly);
    const Vector ev = es.eigenvalues().reverse();
    if (ev(0) > 0.0 && (ev(0) - ev(1)) / ev(0) < iso_tol) {
      r.regular = false;
      r.detail = "scatter is isotropic: no unique line of best fit";
    }
  }
  return r;
}

}  // namespace detail

struct RegressionOptions {
  double condition_max = 1e10;
  double isotropy_tol = 1e-8;
  /// Use the minimum-norm solution instead of rejecting rank-deficient designs.
  bool min_norm = false;
};

/// Linear regression of the last coordinate on the others, encoded on the
/// graph: pattern(beta, (x, y)) = (x, beta0 + beta . x).
inline ObjectiveLearningAlgorithm ols_ola(const RegressionOptions& opts = {}) {
  ObjectiveLearningAlgorithm a;
  a.name = "ols";
  a.response_dims = 1;
  a.gamma_grid = {Hyper{0.0}};
  a.fit_inner = [min_norm = opts.min_norm](const Hyper&, const Matrix& data) -> Params {
    Matrix x;
    Vector y;
    detail::split_xy(data, x, y);
    const LinearModel m = min_norm ? ols_fit_min_norm(x, y) : ols_fit_centered(x, y);
    Params p(m.beta.size() + 1);
    p << m.intercept, m.beta;
    return p;
  };
  a.loss_in = [](const Params& b, const Hyper&, const Matrix& d) { return detail::regression_sse(b, d); };
  a.loss_out = a.loss_in;
  a.pattern = [](const Params& b, const Point& p) -> Point {
    Point out = p;
    out(p.size() - 1) = detail::linear_response(b, p.head(p.size() - 1));
    return out;
  };
  a.inner_regularity = [opts](const Hyper&, const Matrix& d) {
    return detail::linear_regularity(d, opts.condition_max, opts.isotropy_tol);
  };
  return a;
}

/// ENET over a (lambda, alpha) grid; gamma = {lambda, alpha}. Intercept is
/// unpenalised. Validation loss is the plain sum of squared errors.
inline ObjectiveLearningAlgorithm enet_ola(std::vector<Hyper> grid, const RegressionOptions& opts = {}) {
  ObjectiveLearningAlgorithm a = ols_ola(opts);
  a.name = "enet";
  for (const auto& g : grid)
    if (g.size() != 2) throw ConfigurationError("enet_ola: grid entries must be {lambda, alpha}");
  a.gamma_grid = std::move(grid);
  a.fit_inner = [](const Hyper& g, const Matrix& data) -> Params {
    Matrix x;
    Vector y;
    detail::split_xy(data, x, y);
    const LinearModel m = enet_fit_centered(x, y, EnetSpec{g[0], g[1]});
    Params p(m.beta.size() + 1);
    p << m.intercept, m.beta;
    return p;
  };
  a.loss_in = [](const Params& b, const Hyper& g, const Matrix& d) {
    return detail::regression_sse(b, d) + EnetSpec{g[0], g[1]}.penalty(b.tail(b.size() - 1));
  };
  a.loss_out = [](const Params& b, const Hyper&, const Matrix& d) { return detail::regression_sse(b, d); };
  return a;
}

namespace detail {

inline Params pack_pca(const PcaModel& m) {
  const Index d = m.dim();
  Params p(d * (m.k() + 1));
  p.head(d) = m.mean;
  for (Index j = 0; j < m.k(); ++j) p.segment(d * (j + 1), d) = m.components.col(j);
  return p;
}

inline PcaModel unpack_pca(const Params& p, Index d) {
  PcaModel m;
  const Index k = p.size() / d - 1;
  m.mean = p.head(d);
  m.components.resize(d, k);
  for (Index j = 0; j < k; ++j) m.components.col(j) = p.segment(d * (j + 1), d);
  return m;
}

}  // namespace detail

/// K-factor PCA: training loss is minus the cumulative explained fraction,
/// validation loss the projection residual, pattern the projection onto the
/// fitted affine subspace. Params are [mean, v_1, ..., v_K].
inline ObjectiveLearningAlgorithm pca_ola(Index k, const PcaOptions& opts = {}) {
  ObjectiveLearningAlgorithm a;
  a.name = "pca";
  a.response_dims = 0;
  a.gamma_grid = {Hyper{double(k)}};
  a.fit_inner = [opts](const Hyper& g, const Matrix& data) -> Params {
    return detail::pack_pca(pca(data, static_cast<Index>(g[0]), opts));
  };
  a.loss_in = [](const Params& p, const Hyper&, const Matrix& data) {
    const PcaModel m = detail::unpack_pca(p, data.cols());
    const Matrix c = data.rowwise() - m.mean.transpose();
    const double total = c.squaredNorm();
    if (total == 0.0) return -1.0;
    return -(c * m.components).squaredNorm() / total;
  };
  a.loss_out = [](const Params& p, const Hyper& g, const Matrix& data) {
    const PcaModel m = detail::unpack_pca(p, data.cols());
    return pca_projection_loss(m, static_cast<Index>(g[0]), data);
  };
  a.pattern = [](const Params& p, const Point& x) -> Point {
    const Index d = x.size();
    const PcaModel m = detail::unpack_pca(p, d);
    return m.mean + m.components * (m.components.transpose() * (x - m.mean));
  };
  a.inner_regularity = [opts](const Hyper& g, const Matrix& data) {
    learning::InnerRegularity r;
    const Matrix c = data.rowwise() - data.colwise().mean();
    Eigen::SelfAdjointEigenSolver<Matrix> es(c.transpose() * c, Eigen::EigenvaluesOnly);
    const Vector ev = es.eigenvalues().reverse();
    const Index k = static_cast<Index>(g[0]);
    const double top = std::max(ev(0), 1e-300);
    double gap = std::numeric_limits<double>::infinity();
    for (Index s = 0; s < std::min<Index>(k, ev.size() - 1); ++s) gap = std::min(gap, (ev(s) - ev(s + 1)) / top);
    r.metric = gap;
    if (gap < opts.tie_tol) {
      r.regular = false;
      r.detail = "leading eigenvalues are tied; components are not unique";
    }
    return r;
  };
  return a;
}

}  // namespace neu::baselines
