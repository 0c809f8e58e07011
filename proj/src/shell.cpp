#include "fsi/shell.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "fsi/errors.hpp"
#include "fsi/fe.hpp"
#include "fsi/interface_field.hpp"

namespace fsi {

StructureState rest_structure(const InterfaceGrid& grid) {
  const auto n = static_cast<Eigen::Index>(hermite_size(grid));
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
}

namespace {

// Per-component matrices with unit coefficient.
void assemble_1d(const InterfaceGrid& grid, Eigen::MatrixXd& mass, Eigen::MatrixXd& bend) {
  const auto n = static_cast<Eigen::Index>(2 * grid.n_nodes());
  mass = Eigen::MatrixXd::Zero(n, n);
  bend = Eigen::MatrixXd::Zero(n, n);
  const GaussRule& rule = gauss_rule(4);
  for (std::size_t e = 0; e < grid.n_elements(); ++e) {
    const double h = grid.element_length(e);
    for (std::size_t g = 0; g < rule.size(); ++g) {
      const auto v = hermite::values(rule.points[g], h);
      const auto d2 = hermite::second_derivatives(rule.points[g], h);
      const double w = rule.weights[g] * h;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          mass(2 * e + a, 2 * e + b) += w * v[a] * v[b];
          bend(2 * e + a, 2 * e + b) += w * d2[a] * d2[b];
        }
    }
  }
}

}  // namespace

ShellOperator::ShellOperator(const InterfaceGrid& grid, const StructureParams& params,
                             bool allow_singular)
    : grid_(grid), params_(params) {
  if (grid.n_elements() < 2) throw SingularOperator("shell needs at least two elements");
  if (!(params.rho_s > 0.0) || !(params.thickness > 0.0))
    throw SingularOperator("structure density and thickness must be positive");
  Eigen::MatrixXd m1;
  Eigen::MatrixXd k1;
  assemble_1d(grid, m1, k1);
  const Eigen::Index n = m1.rows();
  mass_ = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  stiffness_ = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  mass_.topLeftCorner(n, n) = m1;
  mass_.bottomRightCorner(n, n) = m1;
  stiffness_.topLeftCorner(n, n) = params.bending_z * k1;
  stiffness_.bottomRightCorner(n, n) = params.bending_r * k1;

  const auto free1 = grid.free_scalar_dofs();
  for (int c = 0; c < 2; ++c)
    for (std::size_t i : free1) free_.push_back(static_cast<std::size_t>(c) * n + i);

  if (!allow_singular) {
    if (!(params.bending_z > 0.0) || !(params.bending_r > 0.0))
      throw SingularOperator("bending rigidity must be positive");
    Eigen::LLT<Eigen::MatrixXd> llt(reduced_stiffness());
    if (llt.info() != Eigen::Success) throw SingularOperator("shell operator is not positive definite");
  }
}

Eigen::MatrixXd ShellOperator::restrict(const Eigen::MatrixXd& m) const {
  const auto n = static_cast<Eigen::Index>(free_.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = m(free_[i], free_[j]);
  return out;
}

double ShellOperator::coercivity_constant() const {
  Eigen::MatrixXd m1;
  Eigen::MatrixXd k1;
  assemble_1d(grid_, m1, k1);
  const Eigen::Index n = k1.rows();
  Eigen::MatrixXd seminorm = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  seminorm.topLeftCorner(n, n) = k1;
  seminorm.bottomRightCorner(n, n) = k1;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(reduced_stiffness(), restrict(seminorm));
  return eig.eigenvalues().minCoeff();
}

StructureState structure_step(const StructureState& state, double dt, const ShellOperator& op,
                              const Eigen::VectorXd& load) {
  if (!(dt > 0.0)) throw SolverFailure("structure step needs a positive dt");
  const double rh = op.params().inertia();
  const Eigen::MatrixXd& m = op.mass();
  const Eigen::MatrixXd& k = op.stiffness();
  Eigen::VectorXd rhs = rh * (m * state.v) - dt * (k * state.eta);
  if (load.size() > 0) rhs += dt * load;

  const auto& free = op.free_dofs();
  const auto nf = static_cast<Eigen::Index>(free.size());
  const Eigen::MatrixXd a = op.restrict(rh * m + dt * dt * k);
  Eigen::VectorXd b(nf);
  for (Eigen::Index i = 0; i < nf; ++i) b[i] = rhs[free[i]];
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw SolverFailure("structure factorization failed");
  const Eigen::VectorXd x = ldlt.solve(b);
  if (!x.allFinite()) throw SolverFailure("structure solve produced non-finite values");

  StructureState out = state;
  out.v_star = Eigen::VectorXd::Zero(state.v.size());
  for (Eigen::Index i = 0; i < nf; ++i) out.v_star[free[i]] = x[i];
  out.eta = state.eta + dt * out.v_star;
  return out;
}

StructureEnergy structure_energy(const StructureState& state, Velocity which, const ShellOperator& op) {
  const Eigen::VectorXd& v = which == Velocity::V ? state.v : state.v_star;
  return {0.5 * op.params().inertia() * op.mass_norm2(v), 0.5 * op.energy_norm2(state.eta)};
}

double verify_structure_identity(const StructureState& pre, const StructureState& post, double dt,
                                 const ShellOperator& op) {
  (void)dt;
  const double rh = op.params().inertia();
  const Eigen::VectorXd dv = post.v_star - pre.v;
  const Eigen::VectorXd deta = post.eta - pre.eta;
  const double lhs = 0.5 * rh * (op.mass_norm2(post.v_star) + op.mass_norm2(dv)) +
                     0.5 * (op.energy_norm2(post.eta) + op.energy_norm2(deta));
  const double rhs = 0.5 * rh * op.mass_norm2(pre.v) + 0.5 * op.energy_norm2(pre.eta);
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
}

}  // namespace fsi
