#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

#include "neu/types.hpp"

namespace neu::baselines {

/// Kernel PCA with the Gaussian kernel exp(-|x_i - x_j|^2 / (2 sigma^2)).
struct KpcaModel {
  Matrix train;  // kept for out-of-sample scores
  double sigma = 1.0;
  Matrix alphas;  // n x K, eigenvectors scaled by 1/sqrt(lambda)
  Vector eigenvalues;  // K eigenvalues of the centred Gram matrix
  Vector explained;  // eigenvalue / trace
  Matrix scores;  // n x K training scores
  Vector gram_col_means;
  double gram_mean = 0.0;
  double total = 0.0;

  Index k() const { return alphas.cols(); }
};

namespace detail {

/// Kernel minus one, computed with expm1; the constant cancels under centring
/// and keeping it out preserves precision for large sigma.
inline double kernel_m1(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b, double sigma) {
  return std::expm1(-(a - b).squaredNorm() / (2.0 * sigma * sigma));
}

}  // namespace detail

inline Matrix gaussian_gram(const Matrix& data, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("kpca: sigma must be finite and > 0");
  const Index n = data.rows();
  Matrix k(n, n);
  for (Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Index j = i + 1; j < n; ++j) k(i, j) = k(j, i) = std::exp(-(data.row(i) - data.row(j)).squaredNorm() / (2.0 * sigma * sigma));
  }
  return k;
}

inline KpcaModel kpca(const Matrix& data, Index k, double sigma) {
  require_finite(data, "kpca data");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("kpca: sigma must be finite and > 0");
  const Index n = data.rows();
  if (n < 2) throw DomainError("kpca: need at least two observations");
  if (k < 0 || k > n) throw DomainError("kpca: K out of range");

  Matrix g(n, n);
  for (Index i = 0; i < n; ++i) {
    g(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j)
      g(i, j) = g(j, i) = detail::kernel_m1(data.row(i).transpose(), data.row(j).transpose(), sigma);
  }
  KpcaModel m;
  m.train = data;
  m.sigma = sigma;
  m.gram_col_means = g.colwise().mean().transpose();
  m.gram_mean = m.gram_col_means.mean();
  Matrix centred = g;
  centred.rowwise() -= m.gram_col_means.transpose();
  centred.colwise() -= m.gram_col_means;
  centred.array() += m.gram_mean;
  centred = 0.5 * (centred + centred.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> es(centred);
  if (es.info() != Eigen::Success) throw NumericalError("kpca: eigendecomposition failed");
  const Vector ev = es.eigenvalues().reverse();
  const Matrix vecs = es.eigenvectors().rowwise().reverse();
  const double lmax = std::max(1.0, std::abs(ev(0)));
  if (ev(n - 1) < -1e-8 * lmax) throw NumericalError("kpca: centred Gram matrix is not positive semidefinite");

  m.total = centred.trace();
  m.eigenvalues = ev.head(k).cwiseMax(0.0);
  m.explained = m.total > 0.0 ? Vector(m.eigenvalues / m.total) : Vector::Zero(k);
  m.alphas = Matrix::Zero(n, k);
  for (Index j = 0; j < k; ++j) {
    Vector v = vecs.col(j);
    Index idx = 0;
    v.cwiseAbs().maxCoeff(&idx);
    if (v(idx) < 0.0) v = -v;
    if (m.eigenvalues(j) > 0.0) m.alphas.col(j) = v / std::sqrt(m.eigenvalues(j));
  }
  m.scores = centred * m.alphas;
  return m;
}

/// Centred kernel vector of a new point against the training set.
inline Vector kpca_centred_kernel(const KpcaModel& m, const Point& x) {
  const Index n = m.train.rows();
  Vector kx(n);
  for (Index i = 0; i < n; ++i) kx(i) = detail::kernel_m1(m.train.row(i).transpose(), x, m.sigma);
  return kx.array() - kx.mean() - m.gram_col_means.array() + m.gram_mean;
}

inline Vector kpca_scores(const KpcaModel& m, const Point& x) { return m.alphas.transpose() * kpca_centred_kernel(m, x); }

/// Squared feature-space distance from phi(x) to the span of the first
/// k_tilde components, all taken about the training feature mean. This stands
/// in for the linear projection loss, since kPCA has no pre-image.
inline double kpca_residual_loss(const KpcaModel& m, Index k_tilde, const Matrix& data) {
  if (k_tilde < 0 || k_tilde > m.k()) throw DomainError("kpca_residual_loss: K~ out of range");
  double total = 0.0;
  const Index n = m.train.rows();
  for (Index r = 0; r < data.rows(); ++r) {
    const Point x = data.row(r).transpose();
    Vector kx(n);
    for (Index i = 0; i < n; ++i) kx(i) = detail::kernel_m1(m.train.row(i).transpose(), x, m.sigma);
    // |phi(x) - mean phi|^2 with k(x, x) - 1 = 0
    const double norm2 = 0.0 - 2.0 * kx.mean() + m.gram_mean;
    const Vector kc = kx.array() - kx.mean() - m.gram_col_means.array() + m.gram_mean;
    const Vector proj = m.alphas.leftCols(k_tilde).transpose() * kc;
    total += std::max(0.0, norm2 - proj.squaredNorm());
  }
  return total;
}

/// Median pairwise distance, a common default bandwidth.
inline double median_pairwise_distance(const Matrix& data) {
  std::vector<double> d;
  for (Index i = 0; i < data.rows(); ++i)
    for (Index j = i + 1; j < data.rows(); ++j) d.push_back((data.row(i) - data.row(j)).norm());
  if (d.empty()) return 1.0;
  auto mid = d.begin() + d.size() / 2;
  std::nth_element(d.begin(), mid, d.end());
  return *mid > 0.0 ? *mid : 1.0;
}

}  // namespace neu::baselines
