#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "neu/types.hpp"

namespace neu::harness {

enum class Target { m1, m2, m3 };

inline Target parse_target(const std::string& s) {
  if (s == "m1") return Target::m1;
  if (s == "m2") return Target::m2;
  if (s == "m3") return Target::m3;
  throw ConfigurationError("unknown simulation target '" + s + "' (expected m1, m2 or m3)");
}

inline const char* to_string(Target t) {
  switch (t) {
    case Target::m1: return "m1";
    case Target::m2: return "m2";
    case Target::m3: return "m3";
  }
  return "?";
}

inline double target_value(Target t, double x) {
  switch (t) {
    case Target::m1: return std::min(std::exp(-1.0 / ((x + 1.0) * (x + 1.0))), x + std::cos(x));
    case Target::m2: return std::cos(std::exp(-x));
    case Target::m3: return x < 0.5 ? 1.0 : 0.0;
  }
  return 0.0;
}

struct SimulationSpec {
  Target target = Target::m1;
  double sigma = 0.1;
  int n = 1000;
  double lo = -3.0, hi = 3.0;
  int strata = 5;
  int per_stratum = 20;
  /// Fraction of the training subset held out for NEU's validation gate.
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigurationError("SimulationSpec: sigma must be >= 0");
    if (n < 10) throw ConfigurationError("SimulationSpec: n must be >= 10");
    if (!(hi > lo)) throw ConfigurationError("SimulationSpec: empty interval");
    if (strata < 1 || per_stratum < 1) throw ConfigurationError("SimulationSpec: strata sizes must be positive");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
      throw ConfigurationError("SimulationSpec: validation_fraction must lie in [0, 1)");
  }
};

/// A simulated sample on the unit square. `x`, `y` are normalised; `clean` is
/// m(x) under the same affine map as y. Index sets partition 0..n-1 into the
/// training subset (fit + validation) and the test remainder.
struct Simulation {
  Vector x, y, clean;
  /// raw y = y_offset + y_scale * y
  double y_offset = 0.0, y_scale = 1.0;
  std::vector<Index> fit_idx, validation_idx, test_idx;

  std::vector<Index> training_idx() const {
    std::vector<Index> all = fit_idx;
    all.insert(all.end(), validation_idx.begin(), validation_idx.end());
    std::sort(all.begin(), all.end());
    return all;
  }

  /// Points (x, y) for a set of indices, one per row.
  Matrix points(const std::vector<Index>& idx) const {
    Matrix m(static_cast<Index>(idx.size()), 2);
    for (std::size_t i = 0; i < idx.size(); ++i) m.row(i) << x(idx[i]), y(idx[i]);
    return m;
  }
};

inline Simulation generate_simulation(const SimulationSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u(spec.lo, spec.hi);
  std::normal_distribution<double> eps(0.0, 1.0);
  const Index n = spec.n;
  Vector raw_x(n), raw_y(n), raw_m(n);
  for (Index i = 0; i < n; ++i) {
    raw_x(i) = u(rng);
    raw_m(i) = target_value(spec.target, raw_x(i));
    raw_y(i) = raw_m(i) + spec.sigma * eps(rng);
  }
  Simulation s;
  s.x = (raw_x.array() - spec.lo) / (spec.hi - spec.lo);
  const double ymin = raw_y.minCoeff(), ymax = raw_y.maxCoeff();
  const double range = ymax > ymin ? ymax - ymin : 1.0;
  s.y = (raw_y.array() - ymin) / range;
  s.y_offset = ymin;
  s.y_scale = range;
  s.clean = (raw_m.array() - ymin) / range;

  // stratified subset: per_stratum points from each of `strata` equal cells
  std::vector<std::vector<Index>> cells(spec.strata);
  for (Index i = 0; i < n; ++i) {
    const int c = std::min(spec.strata - 1, static_cast<int>(s.x(i) * spec.strata));
    cells[c].push_back(i);
  }
  std::vector<bool> in_training(n, false);
  for (auto& cell : cells) {
    std::shuffle(cell.begin(), cell.end(), rng);
    const std::size_t take = std::min<std::size_t>(spec.per_stratum, cell.size());
    const std::size_t n_val = static_cast<std::size_t>(std::llround(spec.validation_fraction * take));
    for (std::size_t k = 0; k < take; ++k) {
      in_training[cell[k]] = true;
      (k < n_val ? s.validation_idx : s.fit_idx).push_back(cell[k]);
    }
  }
  std::sort(s.fit_idx.begin(), s.fit_idx.end());
  std::sort(s.validation_idx.begin(), s.validation_idx.end());
  for (Index i = 0; i < n; ++i)
    if (!in_training[i]) s.test_idx.push_back(i);
  return s;
}

}  // namespace neu::harness
