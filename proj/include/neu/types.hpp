#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "neu/errors.hpp"

namespace neu {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Points are column vectors; datasets are matrices with one point per row.
using Point = Vector;

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

inline void require_finite(const Eigen::Ref<const Matrix>& m, const char* what) {
  if (!m.allFinite()) throw DomainError(std::string(what) + ": non-finite entry");
}

inline void require_dim(Index got, Index want, const char* what) {
  if (got != want)
    throw DomainError(std::string(what) + ": dimension " + std::to_string(got) + " != " +
                      std::to_string(want));
}

}  // namespace neu
