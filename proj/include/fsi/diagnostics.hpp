#pragma once

// Post-hoc diagnostics on stored trajectories: time-shift norms, power-law
// fits, the piecewise-linear structure interpolant, refinement (Cauchy)
// studies and a manufactured-solution harness.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fsi/discretization.hpp"
#include "fsi/driver.hpp"
#include "fsi/shell.hpp"

namespace fsi {

/// Unweighted L2 mass matrix of the interleaved Q2 velocity space.
Eigen::SparseMatrix<double> velocity_mass_matrix(const Discretization& space);

/// Gram matrices of the spatial norms: L2(Omega) for u, L2(Gamma) for v and
/// v*, the shell energy (H2-seminorm equivalent) for eta.
struct FieldNorms {
  Eigen::SparseMatrix<double> velocity;
  Eigen::MatrixXd interface_mass;
  Eigen::MatrixXd stiffness;

  FieldNorms(const Discretization& space, const ShellOperator& shell);
};

enum class ShiftField { U, V, VStar, Eta, EtaTilde };
std::string_view to_string(ShiftField field);
ShiftField shift_field_from_string(std::string_view text);

/// ||T_h f - f||_{L2(h, T; X)} for the piecewise-constant approximants
/// (f = f^n on ((n-1) dt, n dt]) or the piecewise-linear eta tilde.
double time_shift_norm(const Trajectory& traj, ShiftField field, double h, const FieldNorms& norms);

struct PowerFit {
  double c = 0.0;
  double beta = 0.0;
};

/// Least squares of log(value) against log(h).
PowerFit sqrt_fit(const std::vector<double>& h, const std::vector<double>& value);

struct ShiftReport {
  ShiftField field = ShiftField::U;
  std::vector<double> h;
  std::vector<double> value;
  PowerFit fit;
  bool fitted = false;
};

ShiftReport shift_report(const Trajectory& traj, ShiftField field, const std::vector<double>& h,
                         const FieldNorms& norms);

/// Continuous, piecewise-linear-in-time view of eta.
class InterpolantView {
 public:
  explicit InterpolantView(const Trajectory& traj);

  double duration() const;
  std::size_t n_steps() const { return traj_->states.size() - 1; }
  Eigen::VectorXd eta_tilde(double t) const;
  /// Slope on the open subinterval containing t.
  Eigen::VectorXd eta_tilde_dt(double t) const;
  /// Piecewise-constant v* at t.
  const Eigen::VectorXd& v_star(double t) const;

 private:
  std::size_t interval(double t) const;

  const Trajectory* traj_;
};

struct RefinementRow {
  double dt_coarse = 0.0;
  double dt_fine = 0.0;
  double diff_u = 0.0;    // L2(0, T; L2(Omega))
  double diff_eta = 0.0;  // Linf(0, T; L2(Gamma))
};

struct RefinementTable {
  std::vector<RefinementRow> rows;
  bool decreasing = true;  // diff_u strictly decreasing down the table
};

/// Runs the driver once per dt (strictly decreasing list, common horizon
/// and mesh) and compares consecutive runs.
RefinementTable refinement_study(const SimConfig& config, const std::vector<double>& dt_list);

/// Fixed-domain channel with the exact slip solution
/// u = g(t) U(r) e_z, U = r (H - r) + alpha mu H, p = -(rho/2)|u|^2,
/// g(t) = 1 + a sin(omega t), driven by the matching body force.
struct MmsOptions {
  Resolution resolution{8, 8};
  double t_end = 0.5;
  double rho = 1.0;
  double mu = 0.05;
  double alpha = 1.0;
  double amplitude = 0.5;
  double omega = 4.0;
};

struct MmsRow {
  double dt = 0.0;
  double error_final = 0.0;  // ||u_h(T) - u(T)||_{L2}
  double error_l2 = 0.0;     // L2(0, T; L2) of the piecewise-constant error
  double order_final = 0.0;  // against the previous row
  double order_l2 = 0.0;
};

SimConfig mms_config(const MmsOptions& options);
std::vector<MmsRow> mms_study(const MmsOptions& options, const std::vector<double>& dt_list);

}  // namespace fsi
