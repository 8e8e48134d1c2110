#pragma once

#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <vector>

#include "neu/types.hpp"

namespace neu::geometry {

inline constexpr double kSkewTolerance = 1e-12;
inline constexpr double kOrthogonalityTolerance = 1e-10;

/// D x D real matrix with A + A^T = 0.
class SkewMatrix {
 public:
  SkewMatrix() = default;

  explicit SkewMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) throw DomainError("SkewMatrix: matrix must be square");
    require_finite(entries_, "SkewMatrix");
    const double asym = (entries_ + entries_.transpose()).cwiseAbs().maxCoeff();
    if (entries_.size() > 0 && asym > kSkewTolerance)
      throw DomainError("SkewMatrix: A + A^T != 0 (max deviation " + std::to_string(asym) + ")");
  }

  static SkewMatrix zero(Index dim) { return SkewMatrix(Matrix::Zero(dim, dim)); }

  /// Generator of the rotation taking e_i towards e_j: E_ji - E_ij, scaled.
  static SkewMatrix plane(Index dim, Index i, Index j, double rate) {
    Matrix m = Matrix::Zero(dim, dim);
    m(j, i) = rate;
    m(i, j) = -rate;
    return SkewMatrix(std::move(m));
  }

  /// t (w u^T - u w^T) for orthonormal u, w: rotates u towards w at rate t.
  static SkewMatrix from_plane(const Vector& u, const Vector& w, double rate) {
    Matrix m = rate * (w * u.transpose() - u * w.transpose());
    // exact antisymmetry regardless of rounding in the outer products
    Matrix s = 0.5 * (m - m.transpose());
    return SkewMatrix(std::move(s));
  }

  const Matrix& matrix() const { return entries_; }
  Index dim() const { return entries_.rows(); }
  double operator()(Index i, Index j) const { return entries_(i, j); }

  /// Operator 2-norm (largest singular value).
  double operator_norm() const {
    if (entries_.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(entries_);
    return svd.singularValues()(0);
  }

  bool is_zero() const { return entries_.size() == 0 || entries_.cwiseAbs().maxCoeff() == 0.0; }

  SkewMatrix operator*(double s) const { return SkewMatrix(entries_ * s, Unchecked{}); }
  SkewMatrix operator-() const { return SkewMatrix(-entries_, Unchecked{}); }

 private:
  struct Unchecked {};
  SkewMatrix(Matrix m, Unchecked) : entries_(std::move(m)) {}

  Matrix entries_;
};

/// Orthogonal matrix with determinant +1.
class RotationMatrix {
 public:
  explicit RotationMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) throw DomainError("RotationMatrix: matrix must be square");
    require_finite(entries_, "RotationMatrix");
    const Index d = entries_.rows();
    const double orth = (entries_.transpose() * entries_ - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
    if (orth > kOrthogonalityTolerance) throw DomainError("RotationMatrix: R^T R != I");
    if (std::abs(entries_.determinant() - 1.0) > kOrthogonalityTolerance)
      throw DomainError("RotationMatrix: det(R) != 1");
  }

  const Matrix& matrix() const { return entries_; }
  Index dim() const { return entries_.rows(); }

 private:
  Matrix entries_;
};

namespace detail {

inline Matrix planar_rotation(double angle) {
  Matrix r(2, 2);
  const double c = std::cos(angle), s = std::sin(angle);
  r << c, -s, s, c;
  return r;
}

/// Rodrigues formula for a 3x3 skew matrix.
inline Matrix rodrigues(const Matrix& a) {
  const double wx = a(2, 1), wy = a(0, 2), wz = a(1, 0);
  const double theta2 = wx * wx + wy * wy + wz * wz;
  const double theta = std::sqrt(theta2);
  double sinc, cosc;  // sin(t)/t and (1 - cos t)/t^2
  if (theta < 1e-4) {
    sinc = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
    cosc = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
  } else {
    sinc = std::sin(theta) / theta;
    cosc = (1.0 - std::cos(theta)) / theta2;
  }
  return Matrix::Identity(3, 3) + sinc * a + cosc * (a * a);
}

/// Scaling and squaring around a diagonal [6/6] Pade approximant.
inline Matrix pade_exp(const Matrix& a) {
  const Index d = a.rows();
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 0.5))));
  const Matrix x = a / std::ldexp(1.0, squarings);

  // c_k = (2q - k)! q! / ((2q)! k! (q - k)!), q = 6
  static constexpr std::array<double, 7> c = {
      1.0, 0.5, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
  const Matrix id = Matrix::Identity(d, d);
  Matrix power = id;
  Matrix num = c[0] * id;
  Matrix den = c[0] * id;
  for (int k = 1; k <= 6; ++k) {
    power = power * x;
    num += c[k] * power;
    den += ((k % 2) ? -c[k] : c[k]) * power;
  }
  Matrix result = den.partialPivLu().solve(num);
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

inline Matrix exp_skew_unchecked(const Matrix& a) {
  const Index d = a.rows();
  if (d == 0) return Matrix(0, 0);
  if (d == 1) return Matrix::Identity(1, 1);
  if (d == 2) return planar_rotation(a(1, 0));
  if (d == 3) return rodrigues(a);
  return pade_exp(a);
}

}  // namespace detail

/// exp(A) for skew A. Closed forms for D = 2 (planar rotation) and D = 3
/// (Rodrigues); scaling-and-squaring Pade for larger D.
inline RotationMatrix mat_exp(const SkewMatrix& a) {
  return RotationMatrix(detail::exp_skew_unchecked(a.matrix()));
}

/// Evaluates exp(t X) v for many (t, v) with one fixed generator X.
///
/// For D >= 4 the generator is brought to real Schur form once, X = U B U^T with
/// B block diagonal; each call is then two matrix-vector products and a set of
/// planar rotations.
class SkewExponential {
 public:
  SkewExponential() = default;

  explicit SkewExponential(const SkewMatrix& x) : generator_(x.matrix()) {
    const Index d = generator_.rows();
    if (d < 4) return;
    Eigen::RealSchur<Matrix> schur(generator_);
    const Matrix& t = schur.matrixT();
    basis_ = schur.matrixU();
    Matrix rebuilt = Matrix::Zero(d, d);
    for (Index i = 0; i < d;) {
      if (i + 1 < d && t(i + 1, i) != 0.0) {
        blocks_.push_back({i, t(i, i + 1), t(i + 1, i)});
        rebuilt(i, i + 1) = t(i, i + 1);
        rebuilt(i + 1, i) = t(i + 1, i);
        i += 2;
      } else {
        i += 1;
      }
    }
    rebuilt = basis_ * rebuilt * basis_.transpose();
    const double scale = std::max(1.0, generator_.cwiseAbs().maxCoeff());
    if ((rebuilt - generator_).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      // not cleanly block diagonal; fall back to a full exponential per call
      blocks_.clear();
      basis_.resize(0, 0);
      dense_fallback_ = true;
    }
  }

  Index dim() const { return generator_.rows(); }

  Vector apply(double t, const Vector& v) const {
    const Index d = generator_.rows();
    if (t == 0.0 || d <= 1) return v;
    if (d == 2) {
      const double angle = t * generator_(1, 0);
      const double c = std::cos(angle), s = std::sin(angle);
      Vector out(2);
      out << c * v(0) - s * v(1), s * v(0) + c * v(1);
      return out;
    }
    if (d == 3) return detail::rodrigues(t * generator_) * v;
    if (dense_fallback_) return detail::pade_exp(t * generator_) * v;
    Vector w = basis_.transpose() * v;
    for (const auto& b : blocks_) {
      // exp(t [[0, p], [q, 0]]) with pq < 0
      const double omega = std::sqrt(std::max(0.0, -b.upper * b.lower));
      if (omega == 0.0) continue;
      const double c = std::cos(t * omega), s = std::sin(t * omega);
      const double w0 = w(b.index), w1 = w(b.index + 1);
      w(b.index) = c * w0 + (b.upper / omega) * s * w1;
      w(b.index + 1) = (b.lower / omega) * s * w0 + c * w1;
    }
    return basis_ * w;
  }

 private:
  struct Block {
    Index index;
    double upper;
    double lower;
  };

  Matrix generator_;
  Matrix basis_;
  std::vector<Block> blocks_;
  bool dense_fallback_ = false;
};

}  // namespace neu::geometry
