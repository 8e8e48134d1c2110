#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "neu/types.hpp"

namespace neu::baselines {

struct PcaOptions {
  double power_tol = 1e-12;
  int power_max_iter = 10000;
  /// Relative eigenvalue gap below which neighbouring components count as tied.
  double tie_tol = 1e-6;
};

struct PcaModel {
  Point mean;
  Matrix components;  // D x K, orthonormal columns
  Vector eigenvalues;  // K values of Q^T Q (not divided by n)
  Vector explained;  // eigenvalue / trace(Q^T Q)
  double total = 0.0;  // trace(Q^T Q)
  bool tie_warning = false;

  Index k() const { return components.cols(); }
  Index dim() const { return components.rows(); }
};

namespace detail {

/// Flips v so that its largest-magnitude entry is positive.
inline void fix_sign(Vector& v) {
  Index i = 0;
  v.cwiseAbs().maxCoeff(&i);
  if (v(i) < 0.0) v = -v;
}

/// Dominant eigenvector of the symmetric PSD matrix m by power iteration,
/// finished with a few Rayleigh-quotient steps.
inline Vector dominant_eigenvector(const Matrix& m, const PcaOptions& opts) {
  const Index d = m.rows();
  Vector v = Vector::Ones(d) / std::sqrt(double(d));
  // a deterministic start that is not orthogonal to anything in particular
  for (Index i = 0; i < d; ++i) v(i) += 1e-3 * (i + 1);
  v.normalize();
  for (int it = 0; it < opts.power_max_iter; ++it) {
    Vector w = m * v;
    const double n = w.norm();
    if (n == 0.0) return v;
    w /= n;
    if (w.dot(v) < 0.0) w = -w;
    const double change = (w - v).norm();
    v = std::move(w);
    if (change < opts.power_tol) break;
  }
  for (int it = 0; it < 3; ++it) {
    const double mu = v.dot(m * v);
    Matrix shifted = m - mu * Matrix::Identity(d, d);
    Eigen::FullPivLU<Matrix> lu(shifted);
    if (!lu.isInvertible()) break;
    Vector w = lu.solve(v);
    if (!w.allFinite() || w.norm() == 0.0) break;
    w.normalize();
    if (w.dot(v) < 0.0) w = -w;
    if ((w - v).norm() > 1e-3) break;  // refuse to jump to another eigenvector
    v = std::move(w);
  }
  return v;
}

inline PcaModel deflation_pca(const Matrix& q, const Point& mean, Index k, const PcaOptions& opts) {
  const Index d = q.cols();
  if (k < 0 || k > d) throw DomainError("pca: K must lie in [0, D]");
  PcaModel model;
  model.mean = mean;
  model.components = Matrix::Zero(d, k);
  model.eigenvalues = Vector::Zero(k);
  model.explained = Vector::Zero(k);
  model.total = q.squaredNorm();

  Matrix deflated = q;
  for (Index s = 0; s < k; ++s) {
    // Q_s = Q - sum_{r < s} Q v_r v_r^T
    if (s > 0) {
      const Vector& prev = model.components.col(s - 1);
      deflated.noalias() -= (q * prev) * prev.transpose();
    }
    const Matrix gram = deflated.transpose() * deflated;
    Vector v = dominant_eigenvector(gram, opts);
    // remove numerical leakage into earlier directions
    for (Index r = 0; r < s; ++r) v -= model.components.col(r).dot(v) * model.components.col(r);
    v.normalize();
    fix_sign(v);
    model.components.col(s) = v;
    model.eigenvalues(s) = (deflated * v).squaredNorm();
    model.explained(s) = model.total > 0.0 ? model.eigenvalues(s) / model.total : 0.0;
  }

  // tie check on the full spectrum around the retained block
  Eigen::SelfAdjointEigenSolver<Matrix> es(q.transpose() * q, Eigen::EigenvaluesOnly);
  const Vector ev = es.eigenvalues().reverse();
  const double top = std::max(ev.size() > 0 ? ev(0) : 0.0, 1e-300);
  for (Index s = 0; s < std::min<Index>(k, d - 1); ++s)
    if ((ev(s) - ev(s + 1)) / top < opts.tie_tol) model.tie_warning = true;
  return model;
}

}  // namespace detail

/// Principal components by the deflation recursion
/// Q_k = Q - sum_{s<k} Q v_s v_s^T, v_k = argmax_{|v|=1} |Q_k v|^2,
/// on the column-centred data Q (one observation per row).
inline PcaModel pca(const Matrix& data, Index k, const PcaOptions& opts = {}) {
  require_finite(data, "pca data");
  if (data.rows() < 2) throw DomainError("pca: need at least two observations");
  const Point mean = data.colwise().mean().transpose();
  const Matrix q = data.rowwise() - mean.transpose();
  return detail::deflation_pca(q, mean, k, opts);
}

/// Same recursion for a given covariance C = Q^T Q, via its Cholesky factor.
inline PcaModel pca_from_covariance(const Matrix& cov, Index k, const PcaOptions& opts = {}) {
  require_finite(cov, "pca covariance");
  if (cov.rows() != cov.cols()) throw DomainError("pca: covariance must be square");
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("pca: covariance is not positive definite");
  const Matrix q = llt.matrixU();
  return detail::deflation_pca(q, Point::Zero(cov.rows()), k, opts);
}

/// sum_i |Y_i - m - V V^T (Y_i - m)|^2 using the first k_tilde components.
/// With k_tilde = 0 this is the total centred sum of squares.
inline double pca_projection_loss(const PcaModel& model, Index k_tilde, const Matrix& data) {
  if (k_tilde < 0 || k_tilde > model.k()) throw DomainError("pca_projection_loss: K~ out of range");
  if (data.rows() == 0) return 0.0;
  require_dim(data.cols(), model.dim(), "pca_projection_loss");
  const Matrix centred = data.rowwise() - model.mean.transpose();
  const Matrix v = model.components.leftCols(k_tilde);
  const Matrix resid = centred - (centred * v) * v.transpose();
  return resid.squaredNorm();
}

}  // namespace neu::baselines
