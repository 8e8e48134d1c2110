#pragma once

// Independent reference computations used as test oracles.

#include <Eigen/Dense>
#include <cmath>
#include <random>

namespace oracle {

/// exp(A) by a 30-term power series on A / 2^s, squared back s times.
inline Eigen::MatrixXd series_exp(const Eigen::MatrixXd& a) {
  const double norm = a.norm();
  int s = 0;
  while (norm / std::ldexp(1.0, s) > 0.5) ++s;
  const Eigen::MatrixXd x = a / std::ldexp(1.0, s);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * x / double(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

inline Eigen::MatrixXd random_skew(std::mt19937_64& rng, int d, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      m(i, j) = n(rng);
      m(j, i) = -m(i, j);
    }
  return m;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int d, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = u(rng);
  return v;
}

/// Planar rotation by angle a applied to v.
inline Eigen::Vector2d rotate2(double a, const Eigen::Vector2d& v) {
  return {std::cos(a) * v(0) - std::sin(a) * v(1), std::sin(a) * v(0) + std::cos(a) * v(1)};
}

}  // namespace oracle
