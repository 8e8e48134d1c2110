#pragma once

#include <concepts>
#include <string_view>

#include "neu/geometry/micro_bump.hpp"
#include "neu/geometry/rapid_rotation.hpp"

namespace neu::geometry {

/// A parametric family of self-diffeomorphisms of R^D with local support.
template <typename F>
concept ReconfigurationFamily = requires(const Point& x, const typename F::theta_type& t, Index d) {
  typename F::theta_type;
  { F::name } -> std::convertible_to<std::string_view>;
  { F::apply(x, t) } -> std::convertible_to<Point>;
  { F::invert(x, t) } -> std::convertible_to<Point>;
  { F::identity(d) } -> std::convertible_to<typename F::theta_type>;
  { F::center(t) } -> std::convertible_to<Point>;
  { F::radius(t) } -> std::convertible_to<double>;
  { F::dim(t) } -> std::convertible_to<Index>;
};

static_assert(ReconfigurationFamily<RapidRotation>);
static_assert(ReconfigurationFamily<MicroBump>);

enum class FamilyId { rdr, microbump };

inline std::string_view family_name(FamilyId id) { return id == FamilyId::rdr ? "rdr" : "microbump"; }

inline FamilyId parse_family(std::string_view s) {
  if (s == "rdr") return FamilyId::rdr;
  if (s == "microbump" || s == "micro-bump") return FamilyId::microbump;
  throw ConfigurationError("unknown reconfiguration family '" + std::string(s) + "'");
}

}  // namespace neu::geometry
