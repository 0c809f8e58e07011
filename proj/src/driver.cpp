#include "fsi/driver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fsi/errors.hpp"
#include "fsi/interface_field.hpp"

namespace fsi {

namespace {

constexpr double kStructTol = 1e-10;
constexpr double kGclTol = 1e-12;
constexpr double kEnergyTol = 1e-10;
constexpr double kConstraintTol = 1e-9;

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

}  // namespace

std::size_t SimConfig::n_steps() const {
  return static_cast<std::size_t>(std::llround(t_end / dt));
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Completed: return "Completed";
    case StopReason::DomainDegenerate: return "DomainDegenerate";
    case StopReason::SolverFailure: return "SolverFailure";
  }
  return "?";
}

void validate(const SimConfig& c) {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(key, "positivity");
  };
  try {
    (void)c.reference_polygon();
  } catch (const Error& e) {
    throw ValidationError("domain.polygon", e.what());
  }
  if (c.resolution.nx < 2 || c.resolution.ny < 2) throw ValidationError("domain.resolution", "at least 2 per axis");
  positive(c.structure.rho_s, "structure.rho_s");
  positive(c.structure.thickness, "structure.thickness");
  positive(c.structure.bending_z, "structure.bending_z");
  positive(c.structure.bending_r, "structure.bending_r");
  positive(c.fluid.rho_f, "fluid.rho_f");
  positive(c.fluid.mu, "fluid.mu");
  positive(c.fluid.alpha, "fluid.alpha");
  positive(c.fluid.alpha_walls, "fluid.alpha_walls");
  for (const auto& [face, a] : c.fluid.alpha_face) {
    if (face >= c.faces.size()) throw ValidationError("fluid.alpha." + std::to_string(face), "face index out of range");
    positive(a, "fluid.alpha.<face>");
  }
  positive(c.dt, "time.dt");
  if (!(c.t_end >= 0.0) || !std::isfinite(c.t_end)) throw ValidationError("time.t_end", "non-negative");
  positive(c.c_omega, "guards.c_omega");
  positive(c.j_floor, "guards.j_floor");
  if (c.dump_every < 1) throw ValidationError("output.dump_every", "at least 1");
  for (const auto& [face, profile] : c.pressure) {
    if (face >= c.faces.size() || c.faces[face] != FaceTag::DynamicPressure)
      throw ValidationError("boundary.pressure." + std::to_string(face), "face must be of type I");
  }
  if (c.u0 != "zero" && c.u0.rfind("linear:", 0) != 0) throw ValidationError("fluid.u0", "zero or linear:a,b,c,d");
  if (c.u0 != "zero") {
    std::stringstream ss(c.u0.substr(7));
    std::string item;
    int count = 0;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        (void)std::stod(item, &used);
        if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw ValidationError("fluid.u0", "linear:a,b,c,d with numeric coefficients");
      }
      ++count;
    }
    if (count != 4) throw ValidationError("fluid.u0", "linear:a,b,c,d with four coefficients");
  }
}

Eigen::VectorXd initial_profile(const InterfaceGrid& grid, double amp_z, double amp_r) {
  const double len = grid.frame.length;
  auto f = [&](double z) {
    const double s = std::sin(M_PI * z / len);
    return Vec2(amp_z * s * s, amp_r * s * s);
  };
  auto df = [&](double z) {
    const double d = M_PI / len * std::sin(2.0 * M_PI * z / len);
    return Vec2(amp_z * d, amp_r * d);
  };
  Eigen::VectorXd out = hermite_interpolant(grid, f, df);
  apply_clamp(grid, out);
  return out;
}

Eigen::VectorXd initial_velocity(const Discretization& space, const std::string& spec) {
  if (spec == "zero") return Eigen::VectorXd::Zero(static_cast<long>(space.n_velocity_dofs()));
  std::array<double, 4> k{};
  std::stringstream ss(spec.substr(spec.find(':') + 1));
  std::string item;
  for (double& v : k) {
    std::getline(ss, item, ',');
    v = std::stod(item);
  }
  return space.interpolate([&](const Vec2& x) {
    return Vec2(k[0] * x.x() + k[1] * x.y(), k[2] * x.x() + k[3] * x.y());
  });
}

Simulation::Simulation(SimConfig config) : config_(std::move(config)) {
  validate(config_);
  space_ = make_discretization(config_.reference_polygon(), config_.resolution);
  shell_ = std::make_unique<ShellOperator>(space_->grid(), config_.structure);
  const FluidMode mode = config_.mode == StructureMode::Coupled ? FluidMode::Coupled : FluidMode::Fixed;
  fluid_ = std::make_unique<FluidSolver>(space_, config_.fluid, mode, shell_.get());
  extension_ = std::make_unique<HarmonicExtension>(space_);
  trajectory_.dt = config_.dt;
}

double Simulation::structure_part(const Eigen::VectorXd& v) const {
  return 0.5 * shell_->params().inertia() * shell_->mass_norm2(v) + 0.5 * shell_->energy_norm2(structure_.eta);
}

void Simulation::check(bool ok, const std::string& what) {
  if (ok) return;
  ledger_.failed = true;
  ledger_.failures.push_back("step " + std::to_string(n_) + ": " + what);
}

void Simulation::stop(StopReason reason, std::string message) {
  stopped_ = true;
  trajectory_.stop_reason = reason;
  trajectory_.stop_step = n_;
  trajectory_.stop_message = std::move(message);
}

bool Simulation::initialize() {
  if (initialized_) return !stopped_;
  initialized_ = true;
  const Discretization& sp = *space_;
  const InterfaceGrid& grid = sp.grid();
  const bool coupled = config_.mode == StructureMode::Coupled;

  structure_ = rest_structure(grid);
  if (coupled) {
    structure_.eta = initial_profile(grid, config_.eta0_z, config_.eta0_r);
    structure_.v = initial_profile(grid, config_.v0_z, config_.v0_r);
  }
  structure_.v_star = structure_.v;

  fluid_state_ = fluid_->rest_state();
  fluid_state_.u = config_.u0_field ? sp.interpolate(config_.u0_field) : initial_velocity(sp, config_.u0);
  fluid_state_.v = structure_.v;

  map_ = std::make_unique<AleMap>(extension_->extend(structure_.eta));
  const DomainStatus status = check_admissible(*map_, config_.c_omega, config_.j_floor);
  trajectory_.last_status = status;

  LedgerRow row;
  row.j_min = status.j_min;
  row.inj_margin = status.injectivity_margin;
  const bool small = map_->sup_grad_B() <= 0.5 * config_.c_omega;
  if (!status.admissible || !small) {
    trajectory_.last_status.admissible = false;
    row.e_half = row.e_full = fluid_kinetic_energy(sp, fluid_state_.u, map_->jacobian(), config_.fluid.rho_f) +
                              structure_part(structure_.v);
    ledger_.rows.push_back(row);
    if (record_trajectory) trajectory_.states.push_back({fluid_state_.u, structure_.eta, structure_.v, structure_.v_star});
    stop(StopReason::DomainDegenerate, status.admissible ? "initial displacement exceeds the small-data guard"
                                                         : "initial domain is not admissible");
    return false;
  }

  InterfaceGeometry geom;
  try {
    geom = interface_geometry(sp, structure_.eta);
  } catch (const DegenerateTangent& e) {
    ledger_.rows.push_back(row);
    stop(StopReason::DomainDegenerate, e.what());
    return false;
  }

  // Compatibility of the initial data.
  const Eigen::VectorXd& u0 = fluid_state_.u;
  const double scale = std::max(1.0, u0.cwiseAbs().maxCoeff());
  const ConstraintResiduals cr = constraint_residuals(*fluid_, fluid_state_, *map_, geom);
  if (cr.divergence > 1e-10 * scale)
    throw IncompatibleInitialData("divergence", "discrete divergence " + sci(cr.divergence));
  const Eigen::VectorXd projected = fluid_->constrain(u0);
  if ((projected - u0).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw IncompatibleInitialData("wall_normal", "u0 violates the rigid-wall conditions");
  if (cr.normal > 1e-10 * scale)
    throw IncompatibleInitialData("normal_trace", "(u0 - v0).nu0 residual " + sci(cr.normal));

  const double e0 = fluid_kinetic_energy(sp, u0, map_->jacobian(), config_.fluid.rho_f) + structure_part(structure_.v);
  row.e_half = row.e_full = e0;
  row.div_res = cr.divergence;
  row.normal_res = cr.normal;
  ledger_.rows.push_back(row);
  if (record_trajectory) trajectory_.states.push_back({u0, structure_.eta, structure_.v, structure_.v_star});
  if (config_.n_steps() == 0) stop(StopReason::Completed, "");
  if (on_step) on_step(*this);
  return true;
}

bool Simulation::step() {
  if (!initialized_) initialize();
  if (stopped_) return false;
  const Discretization& sp = *space_;
  const double dt = config_.dt;
  const double rho = config_.fluid.rho_f;
  const double rh = shell_->params().inertia();
  const bool coupled = config_.mode == StructureMode::Coupled;

  // Structure half-step.
  const StructureState pre = structure_;
  StructureState post = pre;
  double struct_res = 0.0;
  if (coupled) {
    post = structure_step(pre, dt, *shell_);
    struct_res = verify_structure_identity(pre, post, dt, *shell_);
  } else {
    post.v_star = pre.v;
  }

  // ALE update and guards.
  AleMap map_new = extension_->extend(post.eta);
  const DomainStatus status = check_admissible(map_new, config_.c_omega, config_.j_floor);
  trajectory_.last_status = status;
  ++n_;
  if (!status.admissible) {
    stop(StopReason::DomainDegenerate, "ALE map lost admissibility");
    return false;
  }
  InterfaceGeometry geom;
  try {
    geom = interface_geometry(sp, post.eta);
  } catch (const DegenerateTangent& e) {
    stop(StopReason::DomainDegenerate, e.what());
    return false;
  }
  const std::vector<Vec2> w = ale_velocity(map_new, *map_, dt);

  // Fluid half-step.
  FluidStepInput in;
  in.u_prev = &fluid_state_.u;
  in.v_star = &post.v_star;
  in.map_prev = map_.get();
  in.map_new = &map_new;
  in.w = &w;
  in.geom_new = &geom;
  in.dt = dt;
  in.t_new = static_cast<double>(n_) * dt;
  in.source = source_term(config_.pressure, n_ - 1, dt);
  in.body = config_.body;
  FluidState next;
  FluidSolveReport report;
  try {
    next = fluid_->solve(fluid_->assemble(in), &report);
  } catch (const SolverFailure& e) {
    stop(StopReason::SolverFailure, e.what());
    return false;
  }
  if (!coupled) next.v.setZero();

  // Ledger.
  LedgerRow row;
  row.step = n_;
  row.t = static_cast<double>(n_) * dt;
  const Eigen::VectorXd& u0 = fluid_state_.u;
  const Eigen::VectorXd& u1 = next.u;
  structure_ = post;
  const double elastic = 0.5 * shell_->energy_norm2(post.eta);
  row.e_half = fluid_kinetic_energy(sp, u0, map_->jacobian(), rho) + 0.5 * rh * shell_->mass_norm2(post.v_star) + elastic;
  row.e_full = fluid_kinetic_energy(sp, u1, map_new.jacobian(), rho) + 0.5 * rh * shell_->mass_norm2(next.v) + elastic;
  const AleMap& visc_map = config_.fluid.jacobian == JacobianVariant::New ? map_new : *map_;
  const Dissipation dis = dissipation(*fluid_, next, visc_map, geom, dt);
  row.d = dis.total();
  row.d_unweighted = dis.total_unweighted();
  row.fluid_increment = fluid_kinetic_energy(sp, u1 - u0, map_->jacobian(), rho);
  row.structure_increment = 0.5 * rh * shell_->mass_norm2(next.v - post.v_star);
  row.eta_increment = shell_->energy_norm2(post.eta - pre.eta);
  row.vstar_increment = rh * shell_->mass_norm2(post.v_star - pre.v);
  row.r_norm2 = in.source.norm2(sp.mesh());
  row.gcl_res = verify_gcl_identity(sp, u0, u1, map_->jacobian(), map_new.jacobian(), rho);
  row.struct_res = struct_res;
  row.fluid_margin = verify_fluid_energy_inequality(row.e_half, row.e_full, row.fluid_increment,
                                                    row.structure_increment, row.d, row.r_norm2, dt);
  row.j_min = status.j_min;
  row.inj_margin = status.injectivity_margin;
  const ConstraintResiduals cr = constraint_residuals(*fluid_, next, map_new, geom);
  row.div_res = cr.divergence;
  row.normal_res = cr.normal;
  row.solver_residual = report.relative_residual;

  const double e_prev = ledger_.rows.back().e_full;
  check(row.struct_res <= kStructTol, "structure identity residual " + sci(row.struct_res));
  check(row.gcl_res <= kGclTol, "GCL residual " + sci(row.gcl_res));
  check(row.d >= 0.0, "negative dissipation");
  check(row.div_res <= kConstraintTol, "divergence residual " + sci(row.div_res));
  check(row.normal_res <= kConstraintTol, "normal constraint residual " + sci(row.normal_res));
  if (row.r_norm2 == 0.0) {
    check(row.fluid_margin >= -kEnergyTol, "fluid energy margin " + sci(row.fluid_margin));
    check(row.e_half <= e_prev + kEnergyTol, "E_half exceeds previous E");
  } else if (row.fluid_margin < 0.0) {
    max_step_c_ = std::max(max_step_c_, -row.fluid_margin / (dt * row.r_norm2));
  }

  ledger_.sums.fluid += 2.0 * row.fluid_increment;
  ledger_.sums.structure += 2.0 * row.structure_increment;
  ledger_.sums.eta += row.eta_increment;
  ledger_.sums.vstar += row.vstar_increment;
  ledger_.dissipation_sum += row.d;
  ledger_.r_l2_norm2 += dt * row.r_norm2;
  ledger_.rows.push_back(row);

  fluid_state_ = std::move(next);
  structure_.v = fluid_state_.v;
  map_ = std::make_unique<AleMap>(std::move(map_new));
  if (record_trajectory)
    trajectory_.states.push_back({fluid_state_.u, structure_.eta, structure_.v, structure_.v_star});

  if (n_ >= config_.n_steps()) {
    stop(StopReason::Completed, "");
    const RunSummary s = summary();
    const double bound = s.telescoping_bound + 1e-9;
    check(ledger_.sums.fluid <= bound && ledger_.sums.structure <= bound && ledger_.sums.eta <= bound &&
              ledger_.sums.vstar <= bound,
          "telescoped difference sums exceed the energy bound");
  }
  if (on_step) on_step(*this);
  return !stopped_;
}

RunSummary Simulation::summary() const {
  RunSummary s;
  s.e0 = ledger_.e0();
  s.e_final = ledger_.rows.empty() ? 0.0 : ledger_.rows.back().e_full;
  double r_acc = 0.0;
  for (const auto& row : ledger_.rows) {
    s.e_max = std::max(s.e_max, row.e_full);
    r_acc += config_.dt * row.r_norm2;
    if (r_acc > 0.0) s.empirical_c = std::max(s.empirical_c, (row.e_full - s.e0) / r_acc);
  }
  s.max_step_c = max_step_c_;
  s.coercivity = shell_->coercivity_constant();
  s.telescoping_bound = 2.0 * (s.e0 + s.empirical_c * ledger_.r_l2_norm2);
  return s;
}

RunResult run(const SimConfig& config) {
  Simulation sim(config);
  if (sim.initialize())
    while (sim.step()) {
    }
  RunResult out;
  out.ledger = sim.ledger();
  out.trajectory = sim.trajectory();
  out.summary = sim.summary();
  return out;
}

}  // namespace fsi
