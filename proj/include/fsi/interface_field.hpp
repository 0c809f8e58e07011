#pragma once

// Cubic Hermite fields on the interface grid. A field stores (value, slope)
// per node for the z and r components; entry c * 2N + 2k + s holds component
// c at node k, s = 0 value, s = 1 slope.

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

#include "fsi/fe.hpp"
#include "fsi/geometry.hpp"

namespace fsi {

inline std::size_t hermite_dof(const InterfaceGrid& grid, int component, std::size_t node,
                               int slope) {
  return static_cast<std::size_t>(component) * 2 * grid.n_nodes() + 2 * node +
         static_cast<std::size_t>(slope);
}

inline std::size_t hermite_size(const InterfaceGrid& grid) { return 4 * grid.n_nodes(); }

struct InterfaceSample {
  Vec2 value = Vec2::Zero();  // (z, r) components
  Vec2 dz = Vec2::Zero();
  Vec2 dzz = Vec2::Zero();
};

InterfaceSample sample(const InterfaceGrid& grid, const Eigen::VectorXd& field,
                       std::size_t element, double xi);

/// Hermite interpolant from a function and its z-derivative, both returning
/// (z, r) components.
Eigen::VectorXd hermite_interpolant(const InterfaceGrid& grid,
                                    const std::function<Vec2(double)>& f,
                                    const std::function<Vec2(double)>& df);

/// (z, r) components to reference-plane coordinates.
inline Vec2 to_plane(const InterfaceFrame& frame, const Vec2& zr) {
  return zr.x() * frame.tangent + zr.y() * frame.normal;
}

/// Zeroes the clamped value and slope entries.
void apply_clamp(const InterfaceGrid& grid, Eigen::VectorXd& field);

}  // namespace fsi
