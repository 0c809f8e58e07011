#pragma once

// Finite element building blocks: Gauss rules, Q1/Q2 Lagrange bases on the
// unit square, cubic Hermite basis on an interval, and the bilinear cell map.

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace fsi {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Gauss-Legendre rule on [0, 1].
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;
  std::size_t size() const { return points.size(); }
};

/// n = 1..5 points.
const GaussRule& gauss_rule(int n);

namespace q1 {
inline constexpr int kNodes = 4;
/// Vertex order (0,0), (1,0), (1,1), (0,1).
std::array<double, 4> values(double s, double t);
std::array<Vec2, 4> ref_gradients(double s, double t);
}  // namespace q1

namespace q2 {
inline constexpr int kNodes = 9;
/// Tensor-product nodes at {0, 1/2, 1}^2; local index i + 3 j.
std::array<double, 9> values(double s, double t);
std::array<Vec2, 9> ref_gradients(double s, double t);
}  // namespace q2

/// Cubic Hermite shape functions on an element of length `h`, local
/// coordinate xi in [0, 1]. Order: value at left, slope at left, value at
/// right, slope at right.
namespace hermite {
std::array<double, 4> values(double xi, double h);
std::array<double, 4> first_derivatives(double xi, double h);
std::array<double, 4> second_derivatives(double xi, double h);
}  // namespace hermite

/// Bilinear map from the unit square onto a straight-sided quadrilateral.
struct CellMap {
  std::array<Vec2, 4> vertices;

  Vec2 point(double s, double t) const;
  /// Columns are d/ds and d/dt.
  Mat2 jacobian(double s, double t) const;
};

}  // namespace fsi
