#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "neu/geometry/families.hpp"

namespace neu::geometry {

/// Result of a local-transience construction: the thetas to apply in order and
/// the number of sub-steps the move was split into (0 for x = y).
template <typename F>
struct Transience {
  std::vector<typename F::theta_type> thetas;
  int steps = 0;
};

inline constexpr int kMaxTransienceSteps = 100000;

/// Largest step a centred micro-bump of radius R can make while |X| L(R) stays
/// below `cap`: X = (b - a) / psi(0; R), so |X| L(R) = e |b - a| L1 / R.
inline constexpr double kMicroBumpCap = 0.9;

namespace detail {

inline double min_distance(const Point& p, const std::vector<Point>& others) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : others) best = std::min(best, (q - p).norm());
  return best;
}

inline double segment_distance(const Point& a, const Point& b, const Point& p) {
  const Vector ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

/// Unit vector orthogonal to u. In the plane this is J u, so the generator is a
/// positive multiple of J = [[0, -1], [1, 0]].
inline Vector orthogonal_unit(const Vector& u) {
  const Index d = u.size();
  if (d == 2) {
    Vector w(2);
    w << -u(1), u(0);
    return w;
  }
  Index k = 0;
  u.cwiseAbs().minCoeff(&k);
  Vector w = Vector::Unit(d, k) - u(k) * u;
  return w.normalized();
}

/// One rotation carrying a to b when the ball around their midpoint of radius
/// (|b - a| / 2)(1 + m), m = min(0.5, clearance / half - 1), avoids `guard`.
/// Returns false if that margin is not positive.
inline bool rdr_half_turn(const Point& a, const Point& b, const std::vector<Point>& guard, RdrTheta& out) {
  const Point c = 0.5 * (a + b);
  const double half = 0.5 * (b - a).norm();
  const double clearance = min_distance(c, guard);
  const double margin = std::min(0.5, clearance / half - 1.0);
  if (!(margin > 1e-9)) return false;
  const double sigma = half * (1.0 + margin);
  const Vector u = (a - c) / half;
  const Vector w = orthogonal_unit(u);
  const double rate = std::numbers::pi / bump((a - c).norm(), sigma);
  out = RdrTheta(c, sigma, SkewMatrix::from_plane(u, w, rate));
  return true;
}

inline void check_points(const Point& x, const Point& y) {
  require_finite(x, "local_transience x");
  require_finite(y, "local_transience y");
  require_dim(y.size(), x.size(), "local_transience");
}

}  // namespace detail

/// Moves x to y with rapidly decaying rotations, leaving every point of
/// `guard` fixed. A single half-turn about the midpoint is used when the guard
/// points leave room; otherwise the segment is split into 2, 4, ... pieces.
inline Transience<RapidRotation> local_transience_rdr(const Point& x, const Point& y,
                                                      const std::vector<Point>& guard) {
  detail::check_points(x, y);
  if (x.size() < 2) throw DomainError("local_transience: rapid rotations need D >= 2");
  Transience<RapidRotation> out;
  if (x == y) {
    out.thetas.push_back(RdrTheta::identity(x.size()));
    return out;
  }
  for (const auto& z : guard) {
    require_dim(z.size(), x.size(), "local_transience guard");
    if (detail::segment_distance(x, y, z) == 0.0)
      throw PreconditionError("local_transience: a protected point lies on the segment from x to y");
  }
  for (int pieces = 1; pieces <= kMaxTransienceSteps; pieces *= 2) {
    std::vector<RdrTheta> thetas;
    Point a = x;
    bool ok = true;
    for (int j = 1; j <= pieces && ok; ++j) {
      const Point b = (j == pieces) ? Point(y) : Point(x + (double(j) / pieces) * (y - x));
      RdrTheta theta = RdrTheta::identity(x.size());
      ok = detail::rdr_half_turn(a, b, guard, theta);
      if (ok) {
        a = rdr_apply(a, theta);
        thetas.push_back(std::move(theta));
      }
    }
    if (ok) {
      out.thetas = std::move(thetas);
      out.steps = pieces;
      return out;
    }
  }
  throw ConstructionError("local_transience: sub-step limit reached");
}

/// Moves x to y with planar micro-bumps, leaving every point of `guard` fixed.
///
/// Each sub-step centres a bump at the current point a with radius R just
/// inside the nearest guard point and shift X = (b - a) / psi(0; R). The step
/// length is limited by the contraction bound, so a move may take several
/// steps; `steps` reports how many.
inline Transience<MicroBump> local_transience_microbump(const Point& x, const Point& y,
                                                        const std::vector<Point>& guard) {
  detail::check_points(x, y);
  require_dim(x.size(), 2, "local_transience micro-bump");
  Transience<MicroBump> out;
  if (x == y) {
    out.thetas.push_back(BumpTheta::identity());
    return out;
  }
  for (const auto& z : guard) {
    require_dim(z.size(), 2, "local_transience guard");
    if (detail::segment_distance(x, y, z) == 0.0)
      throw PreconditionError("local_transience: a protected point lies on the segment from x to y");
  }
  const double reach = kMicroBumpCap / (std::exp(1.0) * bump_unit_lipschitz());
  Point a = x;
  for (int step = 0; step < kMaxTransienceSteps; ++step) {
    const Vector to_go = y - a;
    const double remaining = to_go.norm();
    if (remaining == 0.0) break;
    double radius = guard.empty() ? remaining / reach : 0.999 * detail::min_distance(a, guard);
    const double max_step = reach * radius;
    Point b = remaining <= max_step ? Point(y) : Point(a + (max_step / remaining) * to_go);
    if (guard.empty()) radius = (b - a).norm() / reach;
    const Point shift = (b - a) / bump(0.0, radius);
    BumpTheta theta(a, radius, shift);
    Point next = microbump_apply(a, theta);
    out.thetas.push_back(std::move(theta));
    ++out.steps;
    if (b == y) return out;
    a = std::move(next);
  }
  throw ConstructionError("local_transience: sub-step limit reached");
}

/// Single-protected-point form: requires d(x, y) < d(x, z).
template <typename F>
Transience<F> local_transience(const Point& x, const Point& y, const Point& z) {
  require_dim(z.size(), x.size(), "local_transience z");
  if (x != y && !((y - x).norm() < (z - x).norm()))
    throw PreconditionError("local_transience: need d(x, y) < d(x, z)");
  if constexpr (std::is_same_v<F, RapidRotation>)
    return local_transience_rdr(x, y, {z});
  else
    return local_transience_microbump(x, y, {z});
}

template <typename F>
Transience<F> local_transience(const Point& x, const Point& y, const std::vector<Point>& guard) {
  if constexpr (std::is_same_v<F, RapidRotation>)
    return local_transience_rdr(x, y, guard);
  else
    return local_transience_microbump(x, y, guard);
}

}  // namespace neu::geometry
