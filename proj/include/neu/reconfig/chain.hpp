#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "neu/geometry/families.hpp"

namespace neu::reconfig {

using geometry::ReconfigurationFamily;

/// Diffeomorphism pair applied before the first theta (and after the last
/// inverse). Identity unless supplied.
struct Ambient {
  std::function<Point(const Point&)> forward;
  std::function<Point(const Point&)> inverse;
};

inline constexpr double kAmbientTolerance = 1e-9;

/// Ordered, append-only composition of reconfiguration maps of one family.
template <ReconfigurationFamily F>
class ReconfigChain {
 public:
  using theta_type = typename F::theta_type;
  using family = F;

  explicit ReconfigChain(Index dim) : dim_(dim) {
    if (dim < 1) throw DomainError("ReconfigChain: dimension must be >= 1");
  }

  ReconfigChain(Index dim, std::vector<theta_type> thetas) : ReconfigChain(dim) {
    for (const auto& t : thetas) require_dim(F::dim(t), dim_, "ReconfigChain theta");
    thetas_ = std::move(thetas);
  }

  /// Attaches an ambient map after checking forward(inverse(p)) = p and
  /// inverse(forward(p)) = p on the probe points.
  ReconfigChain with_ambient(Ambient ambient, const std::vector<Point>& probes) const {
    if (!ambient.forward || !ambient.inverse) throw ConfigurationError("ReconfigChain: ambient needs both maps");
    for (const auto& p : probes) {
      require_dim(p.size(), dim_, "ambient probe");
      const double e1 = (ambient.forward(ambient.inverse(p)) - p).norm();
      const double e2 = (ambient.inverse(ambient.forward(p)) - p).norm();
      if (!(e1 <= kAmbientTolerance && e2 <= kAmbientTolerance))
        throw InvertibilityError("ReconfigChain: ambient maps are not mutually inverse on probes");
    }
    ReconfigChain out = *this;
    out.ambient_ = std::make_shared<const Ambient>(std::move(ambient));
    return out;
  }

  Index dim() const { return dim_; }
  std::size_t size() const { return thetas_.size(); }
  bool empty() const { return thetas_.empty(); }
  const std::vector<theta_type>& thetas() const { return thetas_; }
  const theta_type& operator[](std::size_t i) const { return thetas_.at(i); }
  bool has_ambient() const { return static_cast<bool>(ambient_); }

  ReconfigChain append(theta_type theta) const {
    require_dim(F::dim(theta), dim_, "ReconfigChain::append");
    ReconfigChain out = *this;
    out.thetas_.push_back(std::move(theta));
    return out;
  }

  /// The chain with its last `n` thetas removed.
  ReconfigChain truncated(std::size_t n) const {
    ReconfigChain out = *this;
    out.thetas_.resize(n <= thetas_.size() ? thetas_.size() - n : 0, F::identity(dim_));
    return out;
  }

  Point reconfigure(const Point& x) const {
    require_dim(x.size(), dim_, "reconfigure");
    Point p = ambient_ ? ambient_->forward(x) : x;
    for (const auto& t : thetas_) p = F::apply(p, t);
    return p;
  }

  Point deconfigure(const Point& y) const {
    require_dim(y.size(), dim_, "deconfigure");
    Point p = y;
    for (auto it = thetas_.rbegin(); it != thetas_.rend(); ++it) p = F::invert(p, *it);
    return ambient_ ? ambient_->inverse(p) : p;
  }

  /// Row-wise reconfiguration of a point matrix.
  Matrix reconfigure_rows(const Matrix& rows) const {
    require_dim(rows.cols(), dim_, "reconfigure_rows");
    Matrix out(rows.rows(), rows.cols());
    for (Index i = 0; i < rows.rows(); ++i) out.row(i) = reconfigure(rows.row(i).transpose()).transpose();
    return out;
  }

  Matrix deconfigure_rows(const Matrix& rows) const {
    require_dim(rows.cols(), dim_, "deconfigure_rows");
    Matrix out(rows.rows(), rows.cols());
    for (Index i = 0; i < rows.rows(); ++i) out.row(i) = deconfigure(rows.row(i).transpose()).transpose();
    return out;
  }

 private:
  Index dim_;
  std::vector<theta_type> thetas_;
  std::shared_ptr<const Ambient> ambient_;
};

/// max_p |deconfigure(reconfigure(p)) - p|.
template <ReconfigurationFamily F>
double chain_roundtrip_error(const ReconfigChain<F>& chain, const std::vector<Point>& points) {
  if (points.empty()) throw PreconditionError("chain_roundtrip_error: no points");
  double worst = 0.0;
  for (const auto& p : points) worst = std::max(worst, (chain.deconfigure(chain.reconfigure(p)) - p).norm());
  return worst;
}

template <ReconfigurationFamily F>
double chain_roundtrip_error(const ReconfigChain<F>& chain, const Matrix& rows) {
  std::vector<Point> pts;
  pts.reserve(rows.rows());
  for (Index i = 0; i < rows.rows(); ++i) pts.emplace_back(rows.row(i).transpose());
  return chain_roundtrip_error(chain, pts);
}

using RdrChain = ReconfigChain<geometry::RapidRotation>;
using BumpChain = ReconfigChain<geometry::MicroBump>;

}  // namespace neu::reconfig
