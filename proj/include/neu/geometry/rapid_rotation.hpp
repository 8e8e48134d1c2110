#pragma once

#include <memory>
#include <string_view>

#include "neu/geometry/bump.hpp"
#include "neu/geometry/skew.hpp"

namespace neu::geometry {

/// Parameters (c, sigma, X) of a rapidly decaying rotation in R^D, D >= 2.
class RdrTheta {
 public:
  RdrTheta(Point center, double sigma, SkewMatrix generator)
      : center_(std::move(center)), sigma_(sigma), generator_(std::move(generator)) {
    if (center_.size() < 2) throw DomainError("RdrTheta: dimension must be >= 2");
    require_finite(center_, "RdrTheta center");
    if (!std::isfinite(sigma_) || sigma_ <= 0.0) throw DomainError("RdrTheta: sigma must be finite and > 0");
    require_dim(generator_.dim(), center_.size(), "RdrTheta generator");
    exp_ = std::make_shared<const SkewExponential>(generator_);
  }

  /// Identity parameters: zero generator.
  static RdrTheta identity(Index dim) { return RdrTheta(Point::Zero(dim), 1.0, SkewMatrix::zero(dim)); }

  const Point& center() const { return center_; }
  double sigma() const { return sigma_; }
  double radius() const { return sigma_; }
  const SkewMatrix& generator() const { return generator_; }
  Index dim() const { return center_.size(); }
  bool is_identity() const { return generator_.is_zero(); }

  /// exp(t X) v through the cached decomposition.
  Vector rotate(double t, const Vector& v) const { return exp_->apply(t, v); }

 private:
  Point center_;
  double sigma_;
  SkewMatrix generator_;
  std::shared_ptr<const SkewExponential> exp_;
};

inline Point rdr_apply(const Point& x, const RdrTheta& theta) {
  require_dim(x.size(), theta.dim(), "rdr_apply");
  const Vector v = x - theta.center();
  const double r = v.norm();
  if (r >= theta.sigma()) return x;
  const double s = bump(r, theta.sigma());
  if (s == 0.0) return x;
  return theta.rotate(s, v) + theta.center();
}

/// The rotation preserves |x - c|, so the bump weight can be read off y.
inline Point rdr_invert(const Point& y, const RdrTheta& theta) {
  require_dim(y.size(), theta.dim(), "rdr_invert");
  const Vector v = y - theta.center();
  const double r = v.norm();
  if (r >= theta.sigma()) return y;
  const double s = bump(r, theta.sigma());
  if (s == 0.0) return y;
  return theta.rotate(-s, v) + theta.center();
}

/// Family tag for chains of rapidly decaying rotations.
struct RapidRotation {
  using theta_type = RdrTheta;
  static constexpr std::string_view name = "rdr";

  static Point apply(const Point& x, const RdrTheta& t) { return rdr_apply(x, t); }
  static Point invert(const Point& y, const RdrTheta& t) { return rdr_invert(y, t); }
  static RdrTheta identity(Index dim) { return RdrTheta::identity(dim); }
  static const Point& center(const RdrTheta& t) { return t.center(); }
  static double radius(const RdrTheta& t) { return t.sigma(); }
  static Index dim(const RdrTheta& t) { return t.dim(); }
};

}  // namespace neu::geometry
