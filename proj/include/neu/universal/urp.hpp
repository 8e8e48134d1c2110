#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "neu/geometry/local_transience.hpp"
#include "neu/meta/parallel.hpp"
#include "neu/reconfig/chain.hpp"

namespace neu::universal {

using geometry::MicroBump;
using geometry::RapidRotation;
using reconfig::ReconfigChain;

struct UrpOptions {
  double clearance_factor = 0.25;
  /// Step length as a fraction of the clearance.
  double step_fraction = 0.5;
  /// Detour offsets start at 2 * clearance and double this many times.
  int detour_doublings = 30;
};

template <typename F>
struct UrpConstruction {
  ReconfigChain<F> chain;
  double clearance = 0.0;
  /// moves_end[i]: chain length once point i has reached its target.
  std::vector<std::size_t> moves_end;
  /// Waypoints used for each point (start and end included).
  std::vector<std::vector<Point>> paths;
};

namespace detail {

inline double path_clearance(const std::vector<Point>& path, const std::vector<Point>& protect) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < path.size(); ++k)
    for (const auto& q : protect) best = std::min(best, geometry::detail::segment_distance(path[k], path[k + 1], q));
  return best;
}

/// Unit vector orthogonal to `u`; in the plane this is the quarter turn.
inline Vector normal_to(const Vector& u) {
  if (u.size() == 2) {
    Vector n(2);
    n << -u(1), u(0);
    return n;
  }
  return geometry::detail::orthogonal_unit(u);
}

inline std::vector<Point> find_path(const Point& a, const Point& b, const std::vector<Point>& protect, double clearance,
                                    const UrpOptions& opts, std::size_t index) {
  std::vector<Point> straight{a, b};
  if (path_clearance(straight, protect) >= clearance) return straight;
  const Vector u = (b - a).normalized();
  const Vector n = normal_to(u);
  const Point mid = 0.5 * (a + b);
  double offset = 2.0 * clearance;
  for (int k = 0; k <= opts.detour_doublings; ++k, offset *= 2.0)
    for (const double sign : {1.0, -1.0}) {
      std::vector<Point> path{a, Point(mid + sign * offset * n), b};
      if (path_clearance(path, protect) >= clearance) return path;
    }
  std::ostringstream os;
  os << "construct_reconfiguration: no clear path for point " << index << " (straight-path clearance "
     << path_clearance(straight, protect) << ", required " << clearance << ", largest detour offset " << offset / 2.0
     << ")";
  throw ConstructionError(os.str());
}

inline double min_pairwise(const std::vector<Point>& pts) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, (pts[i] - pts[j]).norm());
  return best;
}

}  // namespace detail

/// Carries sources[i] to targets[i] one point at a time while every other
/// listed point (other sources at their current positions and `fixed`) stays
/// put. Each path keeps a distance of at least the clearance
/// clearance_factor * (minimum pairwise distance of all points) from the
/// protected points and is cut into steps of step_fraction * clearance, one
/// local-transience move per step.
template <typename F>
UrpConstruction<F> construct_reconfiguration(const std::vector<Point>& sources, const std::vector<Point>& targets,
                                             const std::vector<Point>& fixed = {}, const UrpOptions& opts = {}) {
  if (sources.size() != targets.size())
    throw PreconditionError("construct_reconfiguration: sources and targets differ in length");
  if (!(opts.clearance_factor > 0.0) || !(opts.step_fraction > 0.0 && opts.step_fraction <= 1.0))
    throw ConfigurationError("construct_reconfiguration: invalid clearance options");
  const Index d = !sources.empty() ? sources.front().size() : (!fixed.empty() ? fixed.front().size() : 2);
  if (d < 2) throw DomainError("construct_reconfiguration: dimension must be >= 2");
  if constexpr (std::is_same_v<F, MicroBump>) require_dim(d, 2, "construct_reconfiguration micro-bump");
  for (const auto* set : {&sources, &targets, &fixed})
    for (const auto& p : *set) {
      require_dim(p.size(), d, "construct_reconfiguration");
      require_finite(p, "construct_reconfiguration");
    }

  // every point that must stay apart: sources, fixed points and targets, with
  // a source and its own target merged when they coincide
  std::vector<Point> all = fixed;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    all.push_back(sources[i]);
    if (targets[i] != sources[i]) all.push_back(targets[i]);
  }
  const double spread = detail::min_pairwise(all);
  if (!(spread > 0.0))
    throw PreconditionError("construct_reconfiguration: sources, targets and fixed points must be pairwise distinct");

  UrpConstruction<F> out{ReconfigChain<F>(d)};
  std::vector<typename F::theta_type> thetas;
  out.clearance = std::isfinite(spread) ? opts.clearance_factor * spread : 1.0;
  const double step_len = opts.step_fraction * out.clearance;
  std::vector<Point> current = sources;

  for (std::size_t i = 0; i < sources.size(); ++i) {
    std::vector<Point> protect = fixed;
    for (std::size_t j = 0; j < current.size(); ++j)
      if (j != i) protect.push_back(current[j]);
    if (current[i] == targets[i]) {
      thetas.push_back(F::identity(d));
      out.paths.push_back({current[i]});
      out.moves_end.push_back(thetas.size());
      continue;
    }
    const auto path = detail::find_path(current[i], targets[i], protect, out.clearance, opts, i);
    Point a = current[i];
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      const Point from = path[k];
      const Vector leg = path[k + 1] - from;
      const int pieces = std::max(1, static_cast<int>(std::ceil(leg.norm() / step_len)));
      for (int j = 1; j <= pieces; ++j) {
        const Point b = j == pieces ? Point(path[k + 1]) : Point(from + (double(j) / pieces) * leg);
        const auto move = geometry::local_transience<F>(a, b, protect);
        for (const auto& theta : move.thetas) {
          a = F::apply(a, theta);
          thetas.push_back(theta);
        }
      }
    }
    current[i] = a;
    out.paths.push_back(path);
    out.moves_end.push_back(thetas.size());
  }
  out.chain = ReconfigChain<F>(d, std::move(thetas));
  return out;
}

struct UrpReport {
  double max_endpoint_error = 0.0;
  double max_fixed_drift = 0.0;
  std::size_t chain_length = 0;
  std::vector<double> endpoint_errors;
  std::vector<double> fixed_drifts;

  bool ok(double endpoint_tol = 1e-7, double drift_tol = 1e-9) const {
    return max_endpoint_error < endpoint_tol && max_fixed_drift < drift_tol;
  }
};

template <typename F>
UrpReport verify_urp(const ReconfigChain<F>& chain, const std::vector<Point>& sources,
                     const std::vector<Point>& targets, const std::vector<Point>& fixed, int threads = 1) {
  if (sources.size() != targets.size()) throw PreconditionError("verify_urp: sources and targets differ in length");
  UrpReport r;
  r.chain_length = chain.size();
  r.endpoint_errors.assign(sources.size(), 0.0);
  r.fixed_drifts.assign(fixed.size(), 0.0);
  meta::parallel_for(static_cast<int>(sources.size() + fixed.size()), threads, [&](int k) {
    if (k < static_cast<int>(sources.size()))
      r.endpoint_errors[k] = (chain.reconfigure(sources[k]) - targets[k]).norm();
    else
      r.fixed_drifts[k - sources.size()] = (chain.reconfigure(fixed[k - sources.size()]) - fixed[k - sources.size()]).norm();
  });
  for (double e : r.endpoint_errors) r.max_endpoint_error = std::max(r.max_endpoint_error, e);
  for (double e : r.fixed_drifts) r.max_fixed_drift = std::max(r.max_fixed_drift, e);
  return r;
}

template <typename F>
struct GraphDemo {
  ReconfigChain<F> chain;
  double sup_error = 0.0;
};

/// Carries the graph points (x_i, g(x_i)) onto (x_i, f(x_i)) and reports the
/// largest response error of the reconfigured points over the grid.
template <typename F>
GraphDemo<F> graph_reconfigure_demo(const std::function<double(double)>& f, const std::function<double(double)>& g,
                                    const std::vector<double>& grid, const UrpOptions& opts = {}) {
  std::vector<Point> sources, targets;
  for (double x : grid) {
    Point s(2), t(2);
    s << x, g(x);
    t << x, f(x);
    sources.push_back(s);
    targets.push_back(t);
  }
  GraphDemo<F> out{construct_reconfiguration<F>(sources, targets, {}, opts).chain};
  for (std::size_t i = 0; i < grid.size(); ++i)
    out.sup_error = std::max(out.sup_error, std::abs(out.chain.reconfigure(sources[i])(1) - targets[i](1)));
  return out;
}

}  // namespace neu::universal
