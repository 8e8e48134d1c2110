#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "neu/geometry/families.hpp"

namespace neu::meta {

using geometry::BumpTheta;
using geometry::MicroBump;
using geometry::RapidRotation;
using geometry::RdrTheta;

/// Bounding box, diameter and closest-pair distance of a point cloud.
struct DataStats {
  Point lo, hi;
  double diameter = 0.0;
  double min_pair_distance = 0.0;

  Index dim() const { return lo.size(); }

  static DataStats of(const Matrix& rows) {
    if (rows.rows() < 1) throw DomainError("DataStats: no points");
    DataStats s;
    s.lo = rows.colwise().minCoeff().transpose();
    s.hi = rows.colwise().maxCoeff().transpose();
    double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < rows.rows(); ++i)
      for (Index j = i + 1; j < rows.rows(); ++j) {
        const double d = (rows.row(i) - rows.row(j)).norm();
        dmax = std::max(dmax, d);
        if (d > 0.0) dmin = std::min(dmin, d);
      }
    if (dmax == 0.0) dmax = std::max(1.0, (s.hi - s.lo).norm());
    if (!std::isfinite(dmin)) dmin = dmax;
    s.diameter = dmax;
    s.min_pair_distance = dmin;
    return s;
  }

  double min_radius(double floor_fraction) const {
    return std::min(diameter, std::max(floor_fraction * min_pair_distance, 1e-6 * diameter));
  }
};

struct SamplerConfig {
  /// Relative inflation of the bounding box for centres.
  double box_inflation = 0.1;
  /// Smallest radius as a fraction of the closest-pair distance.
  double radius_floor = 0.1;
  /// Generator entries are N(0, (scale * sigma)^2) with
  /// scale = generator_scale / (1 + decay * iteration).
  double generator_scale = 0.5;
  double decay = 0.02;
  /// Derivative cap: |X| L(sigma) for micro-bumps and |X| L(1) for rotations.
  double derivative_cap = 0.99;
};

inline double generator_scale(const SamplerConfig& cfg, int iteration) {
  return cfg.generator_scale / (1.0 + cfg.decay * std::max(0, iteration));
}

/// Independent stream for (seed, iteration, proposal).
inline std::mt19937_64 proposal_rng(std::uint64_t seed, std::uint64_t iteration, std::uint64_t proposal) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(iteration), static_cast<std::uint32_t>(proposal)};
  return std::mt19937_64(seq);
}

namespace detail {

inline Point sample_center(const SamplerConfig& cfg, std::mt19937_64& rng, const DataStats& s) {
  Point c(s.dim());
  for (Index i = 0; i < s.dim(); ++i) {
    const double pad = cfg.box_inflation * 0.5 * (s.hi(i) - s.lo(i));
    std::uniform_real_distribution<double> u(s.lo(i) - pad, s.hi(i) + pad);
    c(i) = u(rng);
  }
  return c;
}

inline double sample_radius(const SamplerConfig& cfg, std::mt19937_64& rng, const DataStats& s) {
  const double lo = s.min_radius(cfg.radius_floor);
  const double hi = s.diameter;
  if (!(hi > lo)) return hi;
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

}  // namespace detail

/// Maps between a theta and the unconstrained vector searched by the
/// optimisers. Decoding clamps the radius to the sampler's range and scales
/// the generator back under the derivative cap, so every decoded theta is valid.
template <typename F>
struct ThetaCodec;

template <>
struct ThetaCodec<MicroBump> {
  // [c0, c1, log sigma, X0, X1]
  static Vector encode(const BumpTheta& t) {
    Vector v(5);
    v << t.center(), std::log(std::max(t.sigma(), 1e-300)), t.shift();
    return v;
  }

  static BumpTheta decode(const Vector& v, const SamplerConfig& cfg, const DataStats& s) {
    const double sigma = std::clamp(std::exp(v(2)), s.min_radius(cfg.radius_floor), s.diameter);
    Point shift = v.segment(3, 2);
    const double limit = cfg.derivative_cap / geometry::bump_lipschitz(sigma);
    const double n = shift.norm();
    if (n > limit) shift *= limit / n;
    if (!shift.allFinite()) shift.setZero();
    return BumpTheta(v.head(2), sigma, shift);
  }

  static Vector step(const BumpTheta& t) {
    Vector v(5);
    const double s = t.sigma();
    v << 0.25 * s, 0.25 * s, 0.25, 0.25 * s, 0.25 * s;
    return v;
  }
};

template <>
struct ThetaCodec<RapidRotation> {
  // [c..., log sigma, s] with X = s * X0 for the sampled unit-norm direction X0
  static Vector encode(const RdrTheta& t, double rate) {
    const Index d = t.dim();
    Vector v(d + 2);
    v.head(d) = t.center();
    v(d) = std::log(t.sigma());
    v(d + 1) = rate;
    return v;
  }

  static RdrTheta decode(const Vector& v, const geometry::SkewMatrix& direction, const SamplerConfig& cfg,
                         const DataStats& s) {
    const Index d = v.size() - 2;
    const double sigma = std::clamp(std::exp(v(d)), s.min_radius(cfg.radius_floor), s.diameter);
    const double limit = cfg.derivative_cap / geometry::bump_unit_lipschitz();
    double rate = std::clamp(v(d + 1), -limit, limit);
    if (!std::isfinite(rate)) rate = 0.0;
    return RdrTheta(v.head(d), sigma, direction * rate);
  }
};

/// Random micro-bump: uniform centre, log-uniform radius, Gaussian shift scaled
/// by the radius and capped so that |X| L(sigma) <= cap.
inline BumpTheta propose_bump(const SamplerConfig& cfg, std::mt19937_64& rng, const DataStats& s, int iteration) {
  require_dim(s.dim(), 2, "propose_bump");
  const Point c = detail::sample_center(cfg, rng, s);
  const double sigma = detail::sample_radius(cfg, rng, s);
  std::normal_distribution<double> g(0.0, generator_scale(cfg, iteration) * sigma);
  Point shift(2);
  shift << g(rng), g(rng);
  const double limit = cfg.derivative_cap / geometry::bump_lipschitz(sigma);
  if (shift.norm() > limit) shift *= limit / shift.norm();
  return BumpTheta(c, sigma, shift);
}

/// Random rotation: Gaussian skew generator with operator norm capped so the
/// rotation rate stays below cap / L(1).
inline RdrTheta propose_rdr(const SamplerConfig& cfg, std::mt19937_64& rng, const DataStats& s, int iteration) {
  const Index d = s.dim();
  if (d < 2) throw DomainError("propose_rdr: dimension must be >= 2");
  const Point c = detail::sample_center(cfg, rng, s);
  const double sigma = detail::sample_radius(cfg, rng, s);
  std::normal_distribution<double> g(0.0, generator_scale(cfg, iteration));
  Matrix x = Matrix::Zero(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = i + 1; j < d; ++j) {
      x(i, j) = g(rng);
      x(j, i) = -x(i, j);
    }
  geometry::SkewMatrix gen(x);
  const double limit = cfg.derivative_cap / geometry::bump_unit_lipschitz();
  const double n = gen.operator_norm();
  if (n > limit) gen = gen * (limit / n);
  return RdrTheta(c, sigma, gen);
}

template <typename F>
typename F::theta_type propose_theta(const SamplerConfig& cfg, std::mt19937_64& rng, const DataStats& s, int iteration) {
  if constexpr (std::is_same_v<F, MicroBump>)
    return propose_bump(cfg, rng, s, iteration);
  else
    return propose_rdr(cfg, rng, s, iteration);
}

}  // namespace neu::meta
