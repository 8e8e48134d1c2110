#pragma once

#include <string>
#include <string_view>

#include "neu/geometry/bump.hpp"
#include "neu/types.hpp"

namespace neu::geometry {

inline constexpr double kInverseTolerance = 1e-12;
inline constexpr int kInverseMaxIterations = 200;

/// Parameters (c, sigma, X) of a planar micro-bump x -> x + psi(|x - c|; sigma) X.
///
/// The checked constructor enforces |X| L(sigma) < 1, which makes the map a
/// diffeomorphism with a contractive fixed-point inverse.
class BumpTheta {
 public:
  BumpTheta(Point center, double sigma, Point shift)
      : BumpTheta(std::move(center), sigma, std::move(shift), Unchecked{}) {
    if (!contractive())
      throw InvertibilityError("BumpTheta: contraction bound |X| L(sigma) = " +
                               std::to_string(contraction()) + " >= 1");
  }

  /// Skips the contraction check. Only for diagnostics and negative tests;
  /// inverting such a theta raises InvertibilityError.
  static BumpTheta unchecked(Point center, double sigma, Point shift) {
    return BumpTheta(std::move(center), sigma, std::move(shift), Unchecked{});
  }

  static BumpTheta identity(Index dim = 2) {
    require_dim(dim, 2, "BumpTheta::identity");
    return BumpTheta(Point::Zero(2), 0.0, Point::Zero(2));
  }

  const Point& center() const { return center_; }
  double sigma() const { return sigma_; }
  double radius() const { return sigma_; }
  const Point& shift() const { return shift_; }
  Index dim() const { return 2; }
  bool is_identity() const { return sigma_ == 0.0 || shift_.isZero(0.0); }

  /// |X| L(sigma); the map is invertible when this is below 1.
  double contraction() const { return shift_.norm() * bump_lipschitz(sigma_); }
  bool contractive() const { return contraction() < 1.0; }

 private:
  struct Unchecked {};
  BumpTheta(Point center, double sigma, Point shift, Unchecked)
      : center_(std::move(center)), sigma_(sigma), shift_(std::move(shift)) {
    require_dim(center_.size(), 2, "BumpTheta center");
    require_dim(shift_.size(), 2, "BumpTheta shift");
    require_finite(center_, "BumpTheta center");
    require_finite(shift_, "BumpTheta shift");
    if (!std::isfinite(sigma_) || sigma_ < 0.0) throw DomainError("BumpTheta: sigma must be finite and >= 0");
  }

  Point center_;
  double sigma_;
  Point shift_;
};

namespace detail {

inline double bump_weight(const Point& x, const BumpTheta& theta) {
  if (theta.sigma() == 0.0) return 0.0;
  return bump((x - theta.center()).norm(), theta.sigma());
}

}  // namespace detail

inline Point microbump_apply(const Point& x, const BumpTheta& theta) {
  require_dim(x.size(), 2, "microbump_apply");
  const double w = detail::bump_weight(x, theta);
  if (w == 0.0) return x;
  return x + w * theta.shift();
}

/// Solves x + psi(|x - c|) X = y.
///
/// Plain fixed-point iteration converges at rate |X| L(sigma), which can be
/// arbitrarily close to 1, so each step tries a Newton update with
/// J = I + X grad(psi)^T first and keeps it only when the residual shrinks.
inline Point microbump_invert(const Point& y, const BumpTheta& theta, double tol = kInverseTolerance,
                              int max_iter = kInverseMaxIterations) {
  require_dim(y.size(), 2, "microbump_invert");
  require_finite(y, "microbump_invert");
  if (!theta.contractive())
    throw InvertibilityError("microbump_invert: contraction bound violated (" +
                             std::to_string(theta.contraction()) + ")");
  if (theta.sigma() == 0.0 || (y - theta.center()).norm() >= theta.sigma()) return y;
  const Point& shift = theta.shift();
  const double sigma = theta.sigma();

  auto residual = [&](const Point& x) -> Point { return x + detail::bump_weight(x, theta) * shift - y; };

  Point x = y - detail::bump_weight(y, theta) * shift;
  Point res = residual(x);
  for (int it = 0; it < max_iter; ++it) {
    const double err = res.norm();
    if (err <= tol * std::max(1.0, y.norm())) return x;
    const Vector v = x - theta.center();
    const double r = v.norm();
    Point next;
    bool took_newton = false;
    if (r > 0.0 && r < sigma) {
      const Vector grad = bump_derivative(r, sigma) / r * v;
      Eigen::Matrix2d jac = Eigen::Matrix2d::Identity() + shift * grad.transpose();
      const double det = jac.determinant();
      if (std::abs(det) > 1e-14) {
        Point candidate = x - jac.inverse() * res;
        Point cres = residual(candidate);
        if (cres.norm() < err) {
          next = std::move(candidate);
          res = std::move(cres);
          took_newton = true;
        }
      }
    }
    if (!took_newton) {
      next = y - detail::bump_weight(x, theta) * shift;
      res = residual(next);
    }
    x = std::move(next);
  }
  if (res.norm() <= tol * std::max(1.0, y.norm())) return x;
  throw ConvergenceError("microbump_invert: no convergence in " + std::to_string(max_iter) + " iterations");
}

/// Family tag for chains of planar micro-bumps.
struct MicroBump {
  using theta_type = BumpTheta;
  static constexpr std::string_view name = "microbump";

  static Point apply(const Point& x, const BumpTheta& t) { return microbump_apply(x, t); }
  static Point invert(const Point& y, const BumpTheta& t) { return microbump_invert(y, t); }
  static BumpTheta identity(Index dim) { return BumpTheta::identity(dim); }
  static const Point& center(const BumpTheta& t) { return t.center(); }
  static double radius(const BumpTheta& t) { return t.sigma(); }
  static Index dim(const BumpTheta&) { return 2; }
};

}  // namespace neu::geometry
