#pragma once

#include <cmath>
#include <limits>

#include "neu/errors.hpp"

namespace neu::geometry {

/// Which reading of the Gaussian bump to evaluate.
///
/// `normalized` is psi(r; s) = exp(-s^2 / (s^2 - r^2)) on r < s: support radius
/// exactly s, value 1/e at the centre, smooth across the boundary.
///
/// `literal` is exp(-s / (s - r^2)) on r < s, the formula as usually typeset.
/// Its singularity sits at r = sqrt(s), so for s != 1 it is discontinuous at the
/// support boundary. It is kept for comparison only; nothing else in the library
/// uses it.
enum class BumpForm { normalized, literal };

namespace detail {

inline void check_bump_args(double r, double sigma) {
  if (!std::isfinite(r) || r < 0.0) throw DomainError("bump: radius argument must be finite and >= 0");
  if (!std::isfinite(sigma) || sigma <= 0.0) throw DomainError("bump: sigma must be finite and > 0");
}

}  // namespace detail

inline double bump(double r, double sigma, BumpForm form = BumpForm::normalized) {
  detail::check_bump_args(r, sigma);
  if (r >= sigma) return 0.0;
  if (form == BumpForm::literal) {
    const double denom = sigma - r * r;
    if (denom <= 0.0) return 0.0;
    return std::exp(-sigma / denom);
  }
  const double u = r / sigma;
  // (1 - u)(1 + u) keeps precision close to the boundary
  const double w = (1.0 - u) * (1.0 + u);
  return std::exp(-1.0 / w);
}

/// d psi / dr of the normalized bump. Zero outside the support.
inline double bump_derivative(double r, double sigma) {
  detail::check_bump_args(r, sigma);
  if (r >= sigma) return 0.0;
  const double u = r / sigma;
  const double w = (1.0 - u) * (1.0 + u);
  const double value = std::exp(-1.0 / w);
  if (value == 0.0) return 0.0;
  return -value * 2.0 * u / (w * w) / sigma;
}

/// sup over r in [0, sigma) of |d psi / dr| for sigma = 1.
///
/// The maximiser solves 3w^2 - 6w + 2 = 0 with w = 1 - u^2, i.e.
/// w = 1 - 1/sqrt(3), u = 3^(-1/4).
inline double bump_unit_lipschitz() {
  static const double value = [] {
    const double w = 1.0 - 1.0 / std::sqrt(3.0);
    const double u = std::pow(3.0, -0.25);
    return 2.0 * u / (w * w) * std::exp(-1.0 / w);
  }();
  return value;
}

/// L(sigma) = sup |d psi / dr| over [0, sigma). Scales as 1/sigma; an empty
/// support (sigma = 0) has supremum 0.
inline double bump_lipschitz(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("bump_lipschitz: sigma must be finite and >= 0");
  if (sigma == 0.0) return 0.0;
  return bump_unit_lipschitz() / sigma;
}

}  // namespace neu::geometry
