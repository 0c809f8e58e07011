#include "fsi/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fsi/errors.hpp"

namespace fsi {

Eigen::SparseMatrix<double> velocity_mass_matrix(const Discretization& space) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(space.n_cells() * 162);
  for (std::size_t c = 0; c < space.n_cells(); ++c) {
    const auto& quad = space.cell_quadrature(c);
    const auto& nodes = space.cell_velocity_nodes(c);
    Eigen::Matrix<double, 9, 9> me = Eigen::Matrix<double, 9, 9>::Zero();
    for (std::size_t q = 0; q < quad.weight.size(); ++q)
      for (int a = 0; a < 9; ++a)
        for (int b = 0; b < 9; ++b) me(a, b) += quad.weight[q] * quad.q2[q][a] * quad.q2[q][b];
    for (int a = 0; a < 9; ++a)
      for (int b = 0; b < 9; ++b)
        for (int k = 0; k < 2; ++k)
          trip.emplace_back(static_cast<long>(2 * nodes[a] + k), static_cast<long>(2 * nodes[b] + k), me(a, b));
  }
  const auto n = static_cast<long>(space.n_velocity_dofs());
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

FieldNorms::FieldNorms(const Discretization& space, const ShellOperator& shell)
    : velocity(velocity_mass_matrix(space)), interface_mass(shell.mass()), stiffness(shell.stiffness()) {}

std::string_view to_string(ShiftField field) {
  switch (field) {
    case ShiftField::U: return "u";
    case ShiftField::V: return "v";
    case ShiftField::VStar: return "v_star";
    case ShiftField::Eta: return "eta";
    case ShiftField::EtaTilde: return "eta_tilde";
  }
  return "?";
}

ShiftField shift_field_from_string(std::string_view text) {
  for (ShiftField f : {ShiftField::U, ShiftField::V, ShiftField::VStar, ShiftField::Eta, ShiftField::EtaTilde})
    if (text == to_string(f)) return f;
  throw std::invalid_argument("unknown field '" + std::string(text) + "'");
}

namespace {

const Eigen::VectorXd& pick(const Snapshot& s, ShiftField field) {
  switch (field) {
    case ShiftField::U: return s.u;
    case ShiftField::V: return s.v;
    case ShiftField::VStar: return s.v_star;
    default: return s.eta;
  }
}

double quad_form(ShiftField field, const Eigen::VectorXd& x, const FieldNorms& norms) {
  switch (field) {
    case ShiftField::U: return x.dot(norms.velocity * x);
    case ShiftField::V:
    case ShiftField::VStar: return x.dot(norms.interface_mass * x);
    default: return x.dot(norms.stiffness * x);
  }
}

Eigen::VectorXd linear_eta(const Trajectory& traj, double tau) {
  const std::size_t n_max = traj.states.size() - 2;
  const auto n = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(tau))), n_max);
  const double theta = tau - static_cast<double>(n);
  return (1.0 - theta) * traj.states[n].eta + theta * traj.states[n + 1].eta;
}

}  // namespace

double time_shift_norm(const Trajectory& traj, ShiftField field, double h, const FieldNorms& norms) {
  if (traj.states.size() < 2 || !(traj.dt > 0.0)) throw ShiftTooLarge("trajectory has no time steps");
  const std::size_t n_steps = traj.states.size() - 1;
  const double dt = traj.dt;
  const double horizon = static_cast<double>(n_steps) * dt;
  if (!(h >= 0.0)) throw std::invalid_argument("shift must be non-negative");
  if (h >= horizon) throw ShiftTooLarge("shift " + std::to_string(h) + " not below the horizon");
  if (h == 0.0) return 0.0;

  // Shift in units of dt: h = (l + s) dt, 0 <= s < 1.
  const double ht = h / dt;
  auto l = static_cast<long>(std::floor(ht));
  double s = ht - static_cast<double>(l);
  if (s > 1.0 - 1e-9) {
    ++l;
    s = 0.0;
  } else if (s < 1e-9) {
    s = 0.0;
  }
  const auto nn = static_cast<long>(n_steps);

  if (field != ShiftField::EtaTilde) {
    // On ((n-1) dt, n dt] the shifted function takes f^{n-1-l} for the
    // first s dt and f^{n-l} for the rest; both require a positive index.
    double acc = 0.0;
    for (long n = 1; n <= nn; ++n) {
      const Eigen::VectorXd& fn = pick(traj.states[static_cast<std::size_t>(n)], field);
      if (s > 0.0 && n - 1 - l >= 1)
        acc += s * quad_form(field, fn - pick(traj.states[static_cast<std::size_t>(n - 1 - l)], field), norms);
      if (n - l >= 1)
        acc += (1.0 - s) * quad_form(field, fn - pick(traj.states[static_cast<std::size_t>(n - l)], field), norms);
    }
    return std::sqrt(dt * acc);
  }

  // Piecewise linear: merge the breakpoints of both functions on (ht, N) and
  // integrate the quadratic integrand exactly with Simpson's rule.
  const double shift = static_cast<double>(l) + s;
  std::vector<double> cuts{shift, static_cast<double>(nn)};
  for (long k = l + 1; k < nn; ++k) cuts.push_back(static_cast<double>(k));
  if (s > 0.0)
    for (long k = l + 1; static_cast<double>(k) + s < static_cast<double>(nn); ++k) cuts.push_back(static_cast<double>(k) + s);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto diff = [&](double tau) { return Eigen::VectorXd(linear_eta(traj, tau) - linear_eta(traj, tau - shift)); };
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    if (b - a < 1e-12) continue;
    const double fa = quad_form(field, diff(a), norms);
    const double fm = quad_form(field, diff(0.5 * (a + b)), norms);
    const double fb = quad_form(field, diff(b), norms);
    acc += (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  }
  return std::sqrt(dt * acc);
}

PowerFit sqrt_fit(const std::vector<double>& h, const std::vector<double>& value) {
  if (h.size() != value.size()) throw std::invalid_argument("sqrt_fit: size mismatch");
  if (h.size() < 4) throw std::invalid_argument("sqrt_fit: at least four shifts required");
  if (std::all_of(value.begin(), value.end(), [](double v) { return v == 0.0; })) throw DegenerateFit();
  for (std::size_t i = 0; i < h.size(); ++i)
    if (!(value[i] > 0.0) || !(h[i] > 0.0)) throw DegenerateFit("power-law fit needs positive shifts and values");
  const auto n = static_cast<long>(h.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (long i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::log(h[static_cast<std::size_t>(i)]);
    b[i] = std::log(value[static_cast<std::size_t>(i)]);
  }
  const Eigen::Vector2d x = a.colPivHouseholderQr().solve(b);
  return {std::exp(x[0]), x[1]};
}

ShiftReport shift_report(const Trajectory& traj, ShiftField field, const std::vector<double>& h,
                         const FieldNorms& norms) {
  ShiftReport r;
  r.field = field;
  r.h = h;
  for (double hh : h) r.value.push_back(time_shift_norm(traj, field, hh, norms));
  try {
    r.fit = sqrt_fit(r.h, r.value);
    r.fitted = true;
  } catch (const DegenerateFit&) {
  } catch (const std::invalid_argument&) {
  }
  return r;
}

InterpolantView::InterpolantView(const Trajectory& traj) : traj_(&traj) {
  if (traj.states.size() < 2 || !(traj.dt > 0.0)) throw std::invalid_argument("interpolant needs at least one step");
}

double InterpolantView::duration() const { return static_cast<double>(n_steps()) * traj_->dt; }

std::size_t InterpolantView::interval(double t) const {
  const double tau = std::floor(t / traj_->dt);
  if (tau <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(tau), n_steps() - 1);
}

Eigen::VectorXd InterpolantView::eta_tilde(double t) const {
  const std::size_t n = interval(t);
  const double theta = t / traj_->dt - static_cast<double>(n);
  return (1.0 - theta) * traj_->states[n].eta + theta * traj_->states[n + 1].eta;
}

Eigen::VectorXd InterpolantView::eta_tilde_dt(double t) const {
  const std::size_t n = interval(t);
  return (traj_->states[n + 1].eta - traj_->states[n].eta) / traj_->dt;
}

const Eigen::VectorXd& InterpolantView::v_star(double t) const {
  const double tau = std::ceil(t / traj_->dt);
  const auto n = static_cast<std::size_t>(std::clamp(tau, 1.0, static_cast<double>(n_steps())));
  return traj_->states[n].v_star;
}

RefinementTable refinement_study(const SimConfig& config, const std::vector<double>& dt_list) {
  for (std::size_t i = 0; i < dt_list.size(); ++i) {
    if (!(dt_list[i] > 0.0)) throw ValidationError("dt_list", "positivity");
    if (i > 0 && !(dt_list[i] < dt_list[i - 1])) throw ValidationError("dt_list", "strictly decreasing");
  }
  RefinementTable table;
  if (dt_list.size() < 2) return table;

  std::vector<Eigen::VectorXd> prev_u;
  std::vector<Eigen::VectorXd> prev_eta;
  double prev_dt = 0.0;
  for (std::size_t k = 0; k < dt_list.size(); ++k) {
    SimConfig cfg = config;
    cfg.dt = dt_list[k];
    cfg.dump_fields = false;
    Simulation sim(cfg);
    sim.record_trajectory = false;
    const FieldNorms norms(*sim.space(), sim.shell());
    const bool keep = k + 1 < dt_list.size();
    std::vector<Eigen::VectorXd> cur_u;
    std::vector<Eigen::VectorXd> cur_eta;
    double acc_u = 0.0;
    double max_eta = 0.0;
    const double dt = cfg.dt;
    const auto n_prev = prev_u.empty() ? 0L : static_cast<long>(prev_u.size()) - 1;

    sim.on_step = [&](const Simulation& s) {
      const std::size_t m = s.current_step();
      const Eigen::VectorXd& u = s.fluid_state().u;
      const Eigen::VectorXd& eta = s.structure().eta;
      if (keep) {
        cur_u.push_back(u);
        cur_eta.push_back(eta);
      }
      if (m == 0 || k == 0) return;
      const double a = static_cast<double>(m - 1) * dt;
      const double b = static_cast<double>(m) * dt;
      const long first = std::max(1L, static_cast<long>(std::floor(a / prev_dt)) + 1);
      const long last = std::min(n_prev, static_cast<long>(std::ceil(b / prev_dt)));
      for (long n = first; n <= last; ++n) {
        const double lo = std::max(a, static_cast<double>(n - 1) * prev_dt);
        const double hi = std::min(b, static_cast<double>(n) * prev_dt);
        if (hi - lo <= 1e-12 * dt) continue;
        const Eigen::VectorXd du = u - prev_u[static_cast<std::size_t>(n)];
        const Eigen::VectorXd de = eta - prev_eta[static_cast<std::size_t>(n)];
        acc_u += (hi - lo) * du.dot(norms.velocity * du);
        max_eta = std::max(max_eta, std::sqrt(std::max(0.0, de.dot(norms.interface_mass * de))));
      }
    };
    if (sim.initialize())
      while (sim.step()) {
      }
    if (sim.trajectory().stop_reason != StopReason::Completed)
      throw RunIncomplete("refinement run at dt = " + std::to_string(dt) + " stopped: " +
                          std::string(to_string(sim.trajectory().stop_reason)));
    if (k > 0) table.rows.push_back({prev_dt, dt, std::sqrt(acc_u), max_eta});
    prev_u = std::move(cur_u);
    prev_eta = std::move(cur_eta);
    prev_dt = dt;
  }
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    if (!(table.rows[i].diff_u < table.rows[i - 1].diff_u)) table.decreasing = false;
  return table;
}

namespace {

struct Channel {
  MmsOptions o;
  double height = 1.0;

  double g(double t) const { return 1.0 + o.amplitude * std::sin(o.omega * t); }
  double dg(double t) const { return o.amplitude * o.omega * std::cos(o.omega * t); }
  double profile(double r) const { return r * (height - r) + o.alpha * o.mu * height; }
  double dprofile(double r) const { return height - 2.0 * r; }
  Vec2 u(const Vec2& x, double t) const { return Vec2(g(t) * profile(x.y()), 0.0); }
  Vec2 force(const Vec2& x, double t) const {
    const double uu = profile(x.y());
    return Vec2(o.rho * dg(t) * uu + 2.0 * o.mu * g(t), -o.rho * g(t) * g(t) * uu * dprofile(x.y()));
  }
};

double l2_error(const Discretization& sp, const Eigen::VectorXd& u, const Channel& ch, double t) {
  double acc = 0.0;
  for (std::size_t c = 0; c < sp.n_cells(); ++c) {
    const auto& quad = sp.cell_quadrature(c);
    for (std::size_t q = 0; q < quad.weight.size(); ++q)
      acc += quad.weight[q] * (sp.velocity_at(u, c, q) - ch.u(quad.point[q], t)).squaredNorm();
  }
  return std::sqrt(acc);
}

}  // namespace

SimConfig mms_config(const MmsOptions& options) {
  const Channel ch{options};
  SimConfig cfg;
  cfg.resolution = options.resolution;
  cfg.mode = StructureMode::Fixed;
  cfg.fluid.rho_f = options.rho;
  cfg.fluid.mu = options.mu;
  cfg.fluid.alpha = options.alpha;
  cfg.fluid.alpha_walls = options.alpha;
  cfg.t_end = options.t_end;
  cfg.body = [ch](const Vec2& x, double t) { return ch.force(x, t); };
  cfg.u0_field = [ch](const Vec2& x) { return ch.u(x, 0.0); };
  return cfg;
}

std::vector<MmsRow> mms_study(const MmsOptions& options, const std::vector<double>& dt_list) {
  const Channel ch{options};
  std::vector<MmsRow> rows;
  for (double dt : dt_list) {
    SimConfig cfg = mms_config(options);
    cfg.dt = dt;
    Simulation sim(cfg);
    sim.record_trajectory = false;
    MmsRow row;
    row.dt = dt;
    double acc = 0.0;
    sim.on_step = [&](const Simulation& s) {
      if (s.current_step() == 0) return;
      const double t = static_cast<double>(s.current_step()) * dt;
      const double e = l2_error(*s.space(), s.fluid_state().u, ch, t);
      acc += dt * e * e;
      row.error_final = e;
    };
    if (sim.initialize())
      while (sim.step()) {
      }
    if (sim.trajectory().stop_reason != StopReason::Completed)
      throw RunIncomplete("manufactured run at dt = " + std::to_string(dt) + " did not complete");
    row.error_l2 = std::sqrt(acc);
    if (!rows.empty()) {
      const MmsRow& p = rows.back();
      const double r = std::log(p.dt / dt);
      row.order_final = std::log(p.error_final / row.error_final) / r;
      row.order_l2 = std::log(p.error_l2 / row.error_l2) / r;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fsi
