#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "fsi/discretization.hpp"
#include "fsi/geometry.hpp"
#include "fsi/interface_field.hpp"

namespace fsi::testing {

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611u);
  return gen;
}

inline double uniform(double a = -1.0, double b = 1.0) {
  return std::uniform_real_distribution<double>(a, b)(rng());
}

inline Eigen::VectorXd random_vector(Eigen::Index n, double scale = 1.0) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * uniform();
  return v;
}

inline DiscretizationPtr unit_square(int n) { return make_discretization(unit_square_polygon(), {n, n}); }

/// Random Hermite field with the clamped entries zeroed.
inline Eigen::VectorXd random_clamped(const InterfaceGrid& grid, double scale = 1.0) {
  Eigen::VectorXd v = random_vector(static_cast<Eigen::Index>(hermite_size(grid)), scale);
  apply_clamp(grid, v);
  return v;
}

}  // namespace fsi::testing
