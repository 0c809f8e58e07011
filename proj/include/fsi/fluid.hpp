#pragma once

// Fluid sub-problem on the reference mesh: Q2/Q1 Taylor-Hood pair, skew
// convection, Navier slip on the interface and on type III faces, structure
// inertia on the interface and a P1 multiplier for the normal kinematic
// constraint.

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/UmfPackSupport>

#include "fsi/ale.hpp"
#include "fsi/discretization.hpp"
#include "fsi/shell.hpp"

namespace fsi {

enum class JacobianVariant { New, Old };

struct FluidParams {
  double rho_f = 1.0;
  double mu = 0.05;
  double alpha = 1.0;
  /// Slip coefficient of every type III face unless overridden per face.
  double alpha_walls = 1.0;
  std::map<std::size_t, double> alpha_face;
  JacobianVariant jacobian = JacobianVariant::New;

  double wall_alpha(std::size_t face) const {
    const auto it = alpha_face.find(face);
    return it == alpha_face.end() ? alpha_walls : it->second;
  }
};

/// Time profile of a dynamic-pressure datum.
class PressureProfile {
 public:
  enum class Kind { Constant, Sine, Pulse };

  static PressureProfile constant(double value);
  /// amplitude * sin(omega t + phase) + offset
  static PressureProfile sine(double amplitude, double omega, double phase, double offset);
  /// amplitude * sin^2(pi t / duration) on [0, duration], zero afterwards
  static PressureProfile pulse(double amplitude, double duration);
  /// "0.5", "const:0.5", "sin:amp,omega,phase,offset", "pulse:amp,duration"
  static PressureProfile parse(const std::string& text);

  double at(double t) const;
  /// Mean value over [t0, t1].
  double average(double t0, double t1) const;
  std::string to_string() const;
  Kind kind() const { return kind_; }
  bool operator==(const PressureProfile&) const = default;

 private:
  Kind kind_ = Kind::Constant;
  std::array<double, 4> c_{0.0, 0.0, 0.0, 0.0};
};

/// Step-averaged dynamic pressure per type I face.
struct SourceTerm {
  std::map<std::size_t, double> face_pressure;

  bool is_zero() const;
  /// Sum over faces of P^2 |Gamma_i|.
  double norm2(const Mesh& mesh) const;
};

SourceTerm source_term(const std::map<std::size_t, PressureProfile>& data, std::size_t n, double dt);

enum class FluidMode { Coupled, Fixed };

struct FluidState {
  Eigen::VectorXd u;       // Q2 nodal, interleaved
  Eigen::VectorXd p;       // Q1 nodal
  Eigen::VectorXd v;       // Hermite structure velocity
  Eigen::VectorXd lambda;  // normal-constraint multipliers at interior interface nodes
};

using BodyForce = std::function<Vec2(const Vec2& x, double t)>;

struct FluidStepInput {
  const Eigen::VectorXd* u_prev = nullptr;
  const Eigen::VectorXd* v_star = nullptr;  // ignored in fixed mode
  const AleMap* map_prev = nullptr;
  const AleMap* map_new = nullptr;
  const std::vector<Vec2>* w = nullptr;  // nodal ALE velocity
  const InterfaceGeometry* geom_new = nullptr;
  double dt = 0.0;
  double t_new = 0.0;
  SourceTerm source;
  BodyForce body;
};

struct FluidSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
};

struct FluidSolveReport {
  double relative_residual = 0.0;
};

/// Owns the constrained DOF numbering and the sparse factorization; the
/// sparsity pattern is analysed once and reused for every step.
class FluidSolver {
 public:
  FluidSolver(DiscretizationPtr space, FluidParams params, FluidMode mode,
              const ShellOperator* shell = nullptr);

  const FluidParams& params() const { return params_; }
  FluidMode mode() const { return mode_; }
  const Discretization& space() const { return *space_; }

  std::size_t n_unknowns() const { return n_u_ + n_p_ + n_v_ + n_l_; }
  std::size_t n_velocity_unknowns() const { return n_u_; }
  std::size_t n_pressure_unknowns() const { return n_p_; }
  std::size_t n_structure_unknowns() const { return n_v_; }
  std::size_t n_multipliers() const { return n_l_; }
  /// Free direction(s) of every Q2 node after the rigid-boundary conditions.
  const std::vector<std::vector<Vec2>>& node_directions() const { return directions_; }

  FluidSystem assemble(const FluidStepInput& in) const;
  FluidState solve(const FluidSystem& system, FluidSolveReport* report = nullptr);

  /// Reduced unknown vector of a state (used to evaluate assembled forms).
  Eigen::VectorXd pack(const FluidState& state) const;
  FluidState unpack(const Eigen::VectorXd& x) const;
  /// Projects a nodal velocity onto the constrained space.
  Eigen::VectorXd constrain(const Eigen::VectorXd& u) const;

  FluidState rest_state() const;

 private:
  struct Entry {
    long index;
    double coef;
  };

  DiscretizationPtr space_;
  FluidParams params_;
  FluidMode mode_;
  const ShellOperator* shell_;
  std::vector<std::vector<Vec2>> directions_;
  std::vector<std::vector<Entry>> u_map_;  // full velocity DOF -> reduced unknowns
  std::vector<long> p_map_;                // vertex -> pressure unknown or -1
  std::vector<long> v_map_;                // Hermite DOF -> structure unknown or -1
  std::size_t n_u_ = 0;
  std::size_t n_p_ = 0;
  std::size_t n_v_ = 0;
  std::size_t n_l_ = 0;
  Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu_;
  bool analysed_ = false;
};

/// (rho / 2) sum of w J |u|^2 over the cell quadrature.
double fluid_kinetic_energy(const Discretization& space, const Eigen::VectorXd& u,
                            const std::vector<double>& jacobian, double rho);

/// Relative residual of the discrete geometric conservation identity.
double verify_gcl_identity(const Discretization& space, const Eigen::VectorXd& u_prev,
                           const Eigen::VectorXd& u_new, const std::vector<double>& j_prev,
                           const std::vector<double>& j_new, double rho);
/// Same identity with the left side evaluated on an lhs_points^2 Gauss rule
/// and the right side on rhs_points^2; J is evaluated from the maps.
double verify_gcl_identity(const Eigen::VectorXd& u_prev, const Eigen::VectorXd& u_new,
                           const AleMap& map_prev, const AleMap& map_new, double rho,
                           int lhs_points, int rhs_points);

struct Dissipation {
  double viscous = 0.0;
  double walls = 0.0;
  double interface = 0.0;             // S-weighted
  double interface_unweighted = 0.0;
  double total() const { return viscous + walls + interface; }
  double total_unweighted() const { return viscous + walls + interface_unweighted; }
};

/// dt * [mu int J |D(u)|^2 + 1/2 sum 1/alpha_i int u_tau^2
///       + 1/alpha int |v_tau - u_tau|^2 S]
Dissipation dissipation(const FluidSolver& solver, const FluidState& state, const AleMap& map,
                        const InterfaceGeometry& geom, double dt);

/// E_half + C dt |R|^2 - (E_full + fluid and structure increments + D).
double verify_fluid_energy_inequality(double e_half, double e_full, double fluid_increment,
                                      double structure_increment, double d, double r_norm2,
                                      double dt, double c = 0.0);

struct ConstraintResiduals {
  double divergence = 0.0;  // max_k |int J q_k div u|
  double normal = 0.0;      // max_m |int hat_m (u - v).nu|
};

ConstraintResiduals constraint_residuals(const FluidSolver& solver, const FluidState& state,
                                         const AleMap& map, const InterfaceGeometry& geom);

/// Skew convection form c(xi, zeta) assembled alone (tests).
Eigen::SparseMatrix<double> convection_matrix(const Discretization& space, const Eigen::VectorXd& u_prev,
                                              const std::vector<Vec2>& w, const AleMap& map, double rho);

}  // namespace fsi
