#pragma once

// Discrete ALE map: harmonic extension of the interface displacement, its
// gradient, Jacobian and inverse at the cell quadrature points, the ALE
// velocity, the deformed-interface frame and the admissibility guards.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "fsi/discretization.hpp"

namespace fsi {

class AleMap {
 public:
  AleMap(DiscretizationPtr space, std::vector<Vec2> displacement, double residual = 0.0);

  const DiscretizationPtr& space() const { return space_; }
  /// Nodal B on mesh vertices.
  const std::vector<Vec2>& displacement() const { return b_; }
  /// Quadrature-point data, cell-major with Discretization::qp_per_cell() per cell.
  const std::vector<Mat2>& grad_A() const { return grad_a_; }
  const std::vector<Mat2>& grad_A_inv() const { return grad_a_inv_; }
  const std::vector<double>& jacobian() const { return j_; }
  double sup_grad_B() const { return sup_grad_b_; }
  double j_min() const { return j_min_; }
  /// Relative residual of the extension solve.
  double residual() const { return residual_; }

  /// Gradient of B at the points of an arbitrary cell quadrature.
  std::vector<Mat2> grad_B(std::size_t cell, const CellQuadrature& quad) const;
  /// B interpolated at the points of an arbitrary cell quadrature.
  std::vector<Vec2> displacement_at(std::size_t cell, const CellQuadrature& quad) const;

 private:
  DiscretizationPtr space_;
  std::vector<Vec2> b_;
  std::vector<Mat2> grad_a_;
  std::vector<Mat2> grad_a_inv_;
  std::vector<double> j_;
  double sup_grad_b_ = 0.0;
  double j_min_ = 1.0;
  double residual_ = 0.0;
};

/// Q1 Laplace solver with Dirichlet data on the whole boundary; factorized
/// once per mesh.
class HarmonicExtension {
 public:
  explicit HarmonicExtension(DiscretizationPtr space);

  /// Extends a clamped Hermite interface displacement (B = eta nodal values
  /// on the interface, 0 on the rigid faces).
  AleMap extend(const Eigen::VectorXd& eta) const;
  /// Same, from nodal (z, r) values at the interface nodes.
  AleMap extend_nodal(const std::vector<Vec2>& eta_zr) const;
  AleMap identity() const;

  const DiscretizationPtr& space() const { return space_; }

 private:
  DiscretizationPtr space_;
  std::vector<long> interior_;  // vertex -> interior unknown, -1 on the boundary
  Eigen::SparseMatrix<double> k_ii_;
  Eigen::SparseMatrix<double> k_ib_;  // interior rows, all-vertex columns
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

/// Deformed-interface frame at every interface quadrature point, flattened
/// as element * Discretization::kInterfaceRule + point.
struct InterfaceGeometry {
  std::vector<Vec2> tangent;
  std::vector<Vec2> normal;
  std::vector<double> stretch;
  std::vector<Vec2> position;
};

InterfaceGeometry interface_geometry(const Discretization& space, const Eigen::VectorXd& eta);

/// Nodal (B_new - B_old) / dt.
std::vector<Vec2> ale_velocity(const AleMap& a_new, const AleMap& a_old, double dt);

struct DomainStatus {
  double j_min = 1.0;
  double injectivity_margin = 0.0;
  bool admissible = true;
};

DomainStatus check_admissible(const AleMap& map, double c_omega, double j_floor);

/// Per quadrature point grad(u) * grad_A_inv.
std::vector<Mat2> transformed_gradient(const Eigen::VectorXd& u, const AleMap& map);
/// Transformed divergence assembled basis-function by basis-function.
std::vector<double> transformed_divergence(const Eigen::VectorXd& u, const AleMap& map);
/// ||grad^eta u|| / ||D^eta u|| in unweighted L2 on the reference domain.
double korn_ratio(const Eigen::VectorXd& u, const AleMap& map);

double spectral_norm(const Mat2& m);

}  // namespace fsi
