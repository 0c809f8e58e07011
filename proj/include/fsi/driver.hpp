#pragma once

// Lie splitting time loop: structure half-step, ALE update, fluid half-step,
// with the per-step energy ledger and the admissibility guards.

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fsi/ale.hpp"
#include "fsi/discretization.hpp"
#include "fsi/fluid.hpp"
#include "fsi/geometry.hpp"
#include "fsi/shell.hpp"

namespace fsi {

enum class StructureMode { Coupled, Fixed };

struct SimConfig {
  std::vector<Vec2> polygon{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  std::vector<FaceTag> faces{FaceTag::RigidSlip, FaceTag::DynamicPressure, FaceTag::Elastic,
                             FaceTag::DynamicPressure};
  Resolution resolution{16, 16};

  StructureParams structure;
  StructureMode mode = StructureMode::Coupled;
  /// Amplitudes of the clamped sin^2(pi z / L) initial profiles.
  double eta0_z = 0.0;
  double eta0_r = 0.0;
  double v0_z = 0.0;
  double v0_r = 0.0;

  FluidParams fluid;
  /// "zero" or "linear:a,b,c,d" for u0 = (a x + b y, c x + d y).
  std::string u0 = "zero";
  /// Overrides u0 when set (manufactured solutions only; not read from files).
  std::function<Vec2(const Vec2&)> u0_field;

  /// Dynamic-pressure data keyed by polygon face index.
  std::map<std::size_t, PressureProfile> pressure;
  /// Volume force (manufactured solutions only; not read from files).
  BodyForce body;

  double dt = 1e-3;
  double t_end = 0.2;
  double c_omega = 0.5;
  double j_floor = 1e-3;

  bool dump_fields = false;
  std::size_t dump_every = 1;

  std::size_t n_steps() const;
  ReferencePolygon reference_polygon() const { return ReferencePolygon(polygon, faces); }
};

/// Throws ValidationError on the first violated constraint.
void validate(const SimConfig& config);

struct LedgerRow {
  std::size_t step = 0;
  double t = 0.0;
  double e_half = 0.0;
  double e_full = 0.0;
  double d = 0.0;
  double gcl_res = 0.0;
  double struct_res = 0.0;
  double fluid_margin = 0.0;
  double j_min = 1.0;
  double inj_margin = 0.0;
  double div_res = 0.0;
  double normal_res = 0.0;
  // not written to the CSV
  double d_unweighted = 0.0;
  double fluid_increment = 0.0;      // (rho_f/2) int J^n |u^{n+1} - u^n|^2
  double structure_increment = 0.0;  // (rho_s h/2) |v^{n+1} - v*|_M^2
  double eta_increment = 0.0;        // <K d eta, d eta>
  double vstar_increment = 0.0;      // rho_s h |v* - v^n|_M^2
  double r_norm2 = 0.0;
  double solver_residual = 0.0;
};

struct TelescopedSums {
  double fluid = 0.0;      // rho_f sum int J^n |u^{n+1} - u^n|^2
  double structure = 0.0;  // rho_s h sum |v^{n+1} - v*|^2
  double eta = 0.0;        // sum <K d eta, d eta>
  double vstar = 0.0;      // rho_s h sum |v* - v^n|^2
};

struct EnergyLedger {
  std::vector<LedgerRow> rows;
  TelescopedSums sums;
  double dissipation_sum = 0.0;
  double r_l2_norm2 = 0.0;  // sum dt |R^n|^2
  bool failed = false;
  std::vector<std::string> failures;

  double e0() const { return rows.empty() ? 0.0 : rows.front().e_full; }
};

enum class StopReason { Completed, DomainDegenerate, SolverFailure };
std::string_view to_string(StopReason reason);

struct Snapshot {
  Eigen::VectorXd u;
  Eigen::VectorXd eta;
  Eigen::VectorXd v;
  Eigen::VectorXd v_star;
};

/// Entry n holds the state at t = n dt; v_star of entry n is the
/// intermediate velocity of step n (entry 0 carries v0).
struct Trajectory {
  double dt = 0.0;
  std::vector<Snapshot> states;
  StopReason stop_reason = StopReason::Completed;
  std::size_t stop_step = 0;
  DomainStatus last_status;
  std::string stop_message;
};

struct RunSummary {
  double e0 = 0.0;
  double e_final = 0.0;
  double e_max = 0.0;
  double empirical_c = 0.0;
  double max_step_c = 0.0;
  double coercivity = 0.0;
  double telescoping_bound = 0.0;
};

struct RunResult {
  EnergyLedger ledger;
  Trajectory trajectory;
  RunSummary summary;
};

class Simulation {
 public:
  explicit Simulation(SimConfig config);

  const SimConfig& config() const { return config_; }
  const DiscretizationPtr& space() const { return space_; }
  const ShellOperator& shell() const { return *shell_; }
  const FluidSolver& fluid() const { return *fluid_; }
  const HarmonicExtension& extension() const { return *extension_; }

  /// Checks compatibility of the initial data and writes ledger row 0.
  /// Returns false when the initial domain already fails the guards.
  bool initialize();
  /// One splitting step; false once the run has stopped.
  bool step();
  bool stopped() const { return stopped_; }
  std::size_t current_step() const { return n_; }

  const StructureState& structure() const { return structure_; }
  const FluidState& fluid_state() const { return fluid_state_; }
  const AleMap& map() const { return *map_; }
  const EnergyLedger& ledger() const { return ledger_; }
  const Trajectory& trajectory() const { return trajectory_; }
  RunSummary summary() const;

  /// Optional observer called after initialization and after every step.
  std::function<void(const Simulation&)> on_step;
  bool record_trajectory = true;

 private:
  void stop(StopReason reason, std::string message);
  void check(bool ok, const std::string& what);
  double structure_part(const Eigen::VectorXd& v) const;

  SimConfig config_;
  DiscretizationPtr space_;
  std::unique_ptr<ShellOperator> shell_;
  std::unique_ptr<FluidSolver> fluid_;
  std::unique_ptr<HarmonicExtension> extension_;

  StructureState structure_;
  FluidState fluid_state_;
  std::unique_ptr<AleMap> map_;
  EnergyLedger ledger_;
  Trajectory trajectory_;
  std::size_t n_ = 0;
  bool initialized_ = false;
  bool stopped_ = false;
  double max_step_c_ = 0.0;
};

RunResult run(const SimConfig& config);

/// Initial interface profiles and velocity.
Eigen::VectorXd initial_profile(const InterfaceGrid& grid, double amp_z, double amp_r);
Eigen::VectorXd initial_velocity(const Discretization& space, const std::string& spec);

}  // namespace fsi
