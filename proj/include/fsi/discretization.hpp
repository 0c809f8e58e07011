#pragma once

// Mixed Q2/Q1 spaces on the reference mesh with cached quadrature data, plus
// the interface element layout shared by the fluid and structure solvers.

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "fsi/fe.hpp"
#include "fsi/geometry.hpp"

namespace fsi {

/// Local Q2 indices (i + 3j) of the three nodes on each cell side, listed in
/// the side's own direction.
inline constexpr std::array<std::array<int, 3>, 4> kQ2SideNodes{
    {{0, 1, 2}, {2, 5, 8}, {8, 7, 6}, {6, 3, 0}}};

struct CellQuadrature {
  std::vector<double> weight;  // reference weight times det of the cell map
  std::vector<Vec2> point;     // physical (reference-domain) position
  std::vector<std::array<double, 9>> q2;
  std::vector<std::array<Vec2, 9>> q2_grad;
  std::vector<std::array<double, 4>> q1;
  std::vector<std::array<Vec2, 4>> q1_grad;
};

struct EdgeQuadrature {
  std::size_t boundary_edge = 0;
  double length = 0.0;
  std::vector<double> weight;  // includes the edge length
  std::vector<Vec2> point;
  std::vector<std::array<double, 9>> q2;  // cell-local Q2 values
};

struct InterfaceElement {
  std::size_t cell = 0;
  int side = 0;
  bool reversed = false;
  double h = 0.0;
  std::vector<double> xi;      // local Hermite coordinate in [0, 1]
  std::vector<double> weight;  // includes h
  std::vector<std::array<double, 9>> q2;
};

class Discretization {
 public:
  explicit Discretization(Mesh mesh);

  const Mesh& mesh() const { return mesh_; }
  const InterfaceGrid& grid() const { return grid_; }

  std::size_t n_cells() const { return mesh_.cells.size(); }
  std::size_t n_vertices() const { return mesh_.nodes.size(); }
  std::size_t n_velocity_nodes() const { return velocity_nodes_.size(); }
  /// Velocity vectors are interleaved: entry 2 * node + component.
  std::size_t n_velocity_dofs() const { return 2 * velocity_nodes_.size(); }

  const std::vector<Vec2>& velocity_nodes() const { return velocity_nodes_; }
  const std::array<std::size_t, 9>& cell_velocity_nodes(std::size_t cell) const {
    return cell_nodes_[cell];
  }
  /// Global Q2 nodes of a boundary edge, in the edge's direction.
  std::array<std::size_t, 3> edge_velocity_nodes(std::size_t boundary_edge) const;

  static constexpr int kCellRule = 3;
  static constexpr int kEdgeRule = 3;
  static constexpr int kInterfaceRule = 4;
  std::size_t qp_per_cell() const { return kCellRule * kCellRule; }
  std::size_t n_qp() const { return n_cells() * qp_per_cell(); }

  const CellQuadrature& cell_quadrature(std::size_t cell) const { return cell_quad_[cell]; }
  /// Quadrature of an arbitrary tensor Gauss rule (not cached).
  CellQuadrature cell_quadrature(std::size_t cell, int points) const;
  const std::vector<EdgeQuadrature>& rigid_edges() const { return rigid_edges_; }
  const std::vector<InterfaceElement>& interface_elements() const { return interface_; }

  /// Q2 interpolant of a vector field.
  template <class F>
  Eigen::VectorXd interpolate(F&& f) const {
    Eigen::VectorXd out(n_velocity_dofs());
    for (std::size_t i = 0; i < velocity_nodes_.size(); ++i) {
      const Vec2 v = f(velocity_nodes_[i]);
      out[2 * i] = v.x();
      out[2 * i + 1] = v.y();
    }
    return out;
  }

  /// Value of a Q2 field at a cell quadrature point.
  Vec2 velocity_at(const Eigen::VectorXd& u, std::size_t cell, std::size_t qp) const;
  /// Reference gradient (rows: components) at a cell quadrature point.
  Mat2 velocity_gradient_at(const Eigen::VectorXd& u, std::size_t cell, std::size_t qp) const;

 private:
  Mesh mesh_;
  InterfaceGrid grid_;
  std::vector<Vec2> velocity_nodes_;
  std::vector<std::array<std::size_t, 9>> cell_nodes_;
  std::vector<CellQuadrature> cell_quad_;
  std::vector<EdgeQuadrature> rigid_edges_;
  std::vector<InterfaceElement> interface_;
};

using DiscretizationPtr = std::shared_ptr<const Discretization>;

DiscretizationPtr make_discretization(const ReferencePolygon& polygon, Resolution resolution);

}  // namespace fsi
