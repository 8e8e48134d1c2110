#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "neu/reconfig/chain.hpp"

namespace neu::reconfig {

using json = nlohmann::json;

namespace detail {

inline json vector_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Vector json_vector(const json& a, Index expected, const char* what) {
  if (!a.is_array()) throw DomainError(std::string(what) + ": expected array");
  Vector v(static_cast<Index>(a.size()));
  for (Index i = 0; i < v.size(); ++i) v(i) = a.at(i).get<double>();
  if (expected >= 0) require_dim(v.size(), expected, what);
  return v;
}

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
  return rows;
}

inline Matrix json_matrix(const json& a, Index dim, const char* what) {
  if (!a.is_array()) throw DomainError(std::string(what) + ": expected array of rows");
  require_dim(static_cast<Index>(a.size()), dim, what);
  Matrix m(dim, dim);
  for (Index i = 0; i < dim; ++i) m.row(i) = json_vector(a.at(i), dim, what).transpose();
  return m;
}

inline json theta_json(const geometry::RdrTheta& t) {
  return {{"c", vector_json(t.center())}, {"sigma", t.sigma()}, {"X", matrix_json(t.generator().matrix())}};
}

inline json theta_json(const geometry::BumpTheta& t) {
  return {{"c", vector_json(t.center())}, {"sigma", t.sigma()}, {"X", vector_json(t.shift())}};
}

}  // namespace detail

template <ReconfigurationFamily F>
json chain_to_json(const ReconfigChain<F>& chain) {
  json thetas = json::array();
  for (const auto& t : chain.thetas()) thetas.push_back(detail::theta_json(t));
  return {{"family", std::string(F::name)}, {"dimension", chain.dim()}, {"thetas", std::move(thetas)}};
}

template <ReconfigurationFamily F>
ReconfigChain<F> chain_from_json(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family != F::name)
    throw ConfigurationError("chain_from_json: family '" + family + "' != '" + std::string(F::name) + "'");
  const Index dim = j.at("dimension").get<Index>();
  if (dim < 1) throw DomainError("chain_from_json: dimension must be >= 1");
  std::vector<typename F::theta_type> thetas;
  for (const auto& t : j.at("thetas")) {
    const Vector c = detail::json_vector(t.at("c"), dim, "theta c");
    const double sigma = t.at("sigma").get<double>();
    if constexpr (std::is_same_v<F, geometry::RapidRotation>) {
      thetas.emplace_back(c, sigma, geometry::SkewMatrix(detail::json_matrix(t.at("X"), dim, "theta X")));
    } else {
      thetas.emplace_back(c, sigma, detail::json_vector(t.at("X"), dim, "theta X"));
    }
  }
  return ReconfigChain<F>(dim, std::move(thetas));
}

/// Family name stored in a chain document.
inline std::string chain_family(const json& j) { return j.at("family").get<std::string>(); }

}  // namespace neu::reconfig
