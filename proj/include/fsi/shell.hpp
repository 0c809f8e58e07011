#pragma once

// Clamped Euler-Bernoulli shell on cubic Hermite elements and the structure
// half-step (backward Euler on the shell alone).

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "fsi/geometry.hpp"

namespace fsi {

struct StructureParams {
  double rho_s = 1.0;
  double thickness = 0.1;
  double bending_z = 1.0;
  double bending_r = 1.0;

  double inertia() const { return rho_s * thickness; }
};

struct StructureState {
  Eigen::VectorXd eta;
  Eigen::VectorXd v;
  Eigen::VectorXd v_star;
};

StructureState rest_structure(const InterfaceGrid& grid);

/// Mass and stiffness matrices over the full Hermite layout (both
/// components); clamped rows and columns are kept but never solved for.
class ShellOperator {
 public:
  /// Zero bending is accepted only with allow_singular (free-drift checks).
  ShellOperator(const InterfaceGrid& grid, const StructureParams& params, bool allow_singular = false);

  const InterfaceGrid& grid() const { return grid_; }
  const StructureParams& params() const { return params_; }
  const Eigen::MatrixXd& mass() const { return mass_; }
  const Eigen::MatrixXd& stiffness() const { return stiffness_; }
  const std::vector<std::size_t>& free_dofs() const { return free_; }
  /// Stiffness restricted to the unclamped DOFs.
  Eigen::MatrixXd reduced_stiffness() const { return restrict(stiffness_); }
  Eigen::MatrixXd restrict(const Eigen::MatrixXd& m) const;
  /// Lower bound of <K eta, eta> / |eta|_{H^2}^2.
  double coercivity_constant() const;

  double energy_norm2(const Eigen::VectorXd& eta) const { return eta.dot(stiffness_ * eta); }
  double mass_norm2(const Eigen::VectorXd& v) const { return v.dot(mass_ * v); }

 private:
  InterfaceGrid grid_;
  StructureParams params_;
  Eigen::MatrixXd mass_;
  Eigen::MatrixXd stiffness_;
  std::vector<std::size_t> free_;
};

/// Advances eta and computes v_star; `v` is left untouched. `load`, when
/// non-empty, is a consistent Hermite load vector added to the momentum
/// balance.
StructureState structure_step(const StructureState& state, double dt, const ShellOperator& op,
                              const Eigen::VectorXd& load = Eigen::VectorXd());

enum class Velocity { V, VStar };

struct StructureEnergy {
  double kinetic = 0.0;
  double elastic = 0.0;
  double total() const { return kinetic + elastic; }
};

StructureEnergy structure_energy(const StructureState& state, Velocity which, const ShellOperator& op);

/// |LHS - RHS| / max(1, |RHS|) of the backward-Euler energy identity.
double verify_structure_identity(const StructureState& pre, const StructureState& post, double dt,
                                 const ShellOperator& op);

}  // namespace fsi
