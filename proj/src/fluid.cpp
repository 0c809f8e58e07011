#include "fsi/fluid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "fsi/errors.hpp"
#include "fsi/interface_field.hpp"

namespace fsi {

// ---------------------------------------------------------------- data

PressureProfile PressureProfile::constant(double value) {
  PressureProfile p;
  p.kind_ = Kind::Constant;
  p.c_ = {value, 0.0, 0.0, 0.0};
  return p;
}

PressureProfile PressureProfile::sine(double amplitude, double omega, double phase, double offset) {
  PressureProfile p;
  p.kind_ = Kind::Sine;
  p.c_ = {amplitude, omega, phase, offset};
  return p;
}

PressureProfile PressureProfile::pulse(double amplitude, double duration) {
  if (!(duration > 0.0)) throw std::invalid_argument("pulse duration must be positive");
  PressureProfile p;
  p.kind_ = Kind::Pulse;
  p.c_ = {amplitude, duration, 0.0, 0.0};
  return p;
}

namespace {

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw std::invalid_argument("empty number in '" + text + "'");
    const std::string tok = item.substr(b, e - b + 1);
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
      throw std::invalid_argument("not a number: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

PressureProfile PressureProfile::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    const auto v = parse_numbers(text);
    if (v.size() != 1) throw std::invalid_argument("expected a single pressure value");
    return constant(v[0]);
  }
  const std::string kind = text.substr(0, colon);
  const auto v = parse_numbers(text.substr(colon + 1));
  if (kind == "const" && v.size() == 1) return constant(v[0]);
  if (kind == "sin" && v.size() == 4) return sine(v[0], v[1], v[2], v[3]);
  if (kind == "pulse" && v.size() == 2) return pulse(v[0], v[1]);
  throw std::invalid_argument("unknown pressure profile '" + text + "'");
}

std::string PressureProfile::to_string() const {
  switch (kind_) {
    case Kind::Constant: return "const:" + fmt(c_[0]);
    case Kind::Sine:
      return "sin:" + fmt(c_[0]) + "," + fmt(c_[1]) + "," + fmt(c_[2]) + "," + fmt(c_[3]);
    case Kind::Pulse: return "pulse:" + fmt(c_[0]) + "," + fmt(c_[1]);
  }
  return {};
}

double PressureProfile::at(double t) const {
  switch (kind_) {
    case Kind::Constant: return c_[0];
    case Kind::Sine: return c_[0] * std::sin(c_[1] * t + c_[2]) + c_[3];
    case Kind::Pulse: {
      if (t < 0.0 || t > c_[1]) return 0.0;
      const double s = std::sin(M_PI * t / c_[1]);
      return c_[0] * s * s;
    }
  }
  return 0.0;
}

double PressureProfile::average(double t0, double t1) const {
  if (!(t1 > t0)) throw std::invalid_argument("average needs t1 > t0");
  const double len = t1 - t0;
  switch (kind_) {
    case Kind::Constant: return c_[0];
    case Kind::Sine: {
      const double a = c_[0], w = c_[1], ph = c_[2], off = c_[3];
      if (w == 0.0) return a * std::sin(ph) + off;
      return a * (std::cos(w * t0 + ph) - std::cos(w * t1 + ph)) / (w * len) + off;
    }
    case Kind::Pulse: {
      const GaussRule& rule = gauss_rule(5);
      double sum = 0.0;
      for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * at(t0 + rule.points[i] * len);
      return sum;
    }
  }
  return 0.0;
}

bool SourceTerm::is_zero() const {
  return std::all_of(face_pressure.begin(), face_pressure.end(),
                     [](const auto& kv) { return kv.second == 0.0; });
}

double SourceTerm::norm2(const Mesh& mesh) const {
  double s = 0.0;
  for (const auto& [face, p] : face_pressure) s += p * p * mesh.face_lengths.at(face);
  return s;
}

SourceTerm source_term(const std::map<std::size_t, PressureProfile>& data, std::size_t n, double dt) {
  SourceTerm r;
  const double t0 = static_cast<double>(n) * dt;
  for (const auto& [face, profile] : data) r.face_pressure[face] = profile.average(t0, t0 + dt);
  return r;
}

// ---------------------------------------------------------------- solver

FluidSolver::FluidSolver(DiscretizationPtr space, FluidParams params, FluidMode mode,
                         const ShellOperator* shell)
    : space_(std::move(space)), params_(std::move(params)), mode_(mode), shell_(shell) {
  if (!(params_.rho_f > 0.0) || !(params_.mu > 0.0) || !(params_.alpha > 0.0))
    throw ValidationError("fluid", "rho_f, mu and alpha must be positive");
  if (mode_ == FluidMode::Coupled && shell_ == nullptr)
    throw AssemblyShapeMismatch("coupled fluid step needs the shell operator");
  // pattern is structurally symmetric
  lu_.umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
  const Discretization& sp = *space_;
  const Mesh& mesh = sp.mesh();

  std::vector<std::vector<Vec2>> constraints(sp.n_velocity_nodes());
  bool has_pressure_face = false;
  for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
    const auto& be = mesh.boundary_edges[e];
    const Vec2 tau = mesh.face_tangents[be.face];
    const Vec2 nu = mesh.face_normals[be.face];
    std::vector<Vec2> dirs;
    switch (be.tag) {
      case FaceTag::DynamicPressure:
        dirs = {tau};
        has_pressure_face = true;
        break;
      case FaceTag::NoSlip: dirs = {Vec2::UnitX(), Vec2::UnitY()}; break;
      case FaceTag::RigidSlip:
      case FaceTag::Symmetry: dirs = {nu}; break;
      case FaceTag::Elastic:
        if (mode_ == FluidMode::Fixed) dirs = {mesh.frame.normal};
        break;
    }
    for (std::size_t node : sp.edge_velocity_nodes(e))
      for (const Vec2& d : dirs) constraints[node].push_back(d);
  }
  if (mode_ == FluidMode::Coupled) {
    constraints[mesh.interface_nodes.front()].push_back(mesh.frame.normal);
    constraints[mesh.interface_nodes.back()].push_back(mesh.frame.normal);
  }

  directions_.resize(sp.n_velocity_nodes());
  u_map_.resize(sp.n_velocity_dofs());
  long next = 0;
  for (std::size_t node = 0; node < sp.n_velocity_nodes(); ++node) {
    const auto& cs = constraints[node];
    auto& dirs = directions_[node];
    if (cs.empty()) {
      dirs = {Vec2::UnitX(), Vec2::UnitY()};
    } else {
      const Vec2 d0 = cs.front().normalized();
      const bool parallel = std::all_of(cs.begin(), cs.end(), [&](const Vec2& d) {
        return std::abs(d0.x() * d.y() - d0.y() * d.x()) < 1e-12 * d.norm();
      });
      if (parallel) dirs = {Vec2(-d0.y(), d0.x())};
    }
    for (const Vec2& d : dirs) {
      for (int c = 0; c < 2; ++c)
        if (d[c] != 0.0) u_map_[2 * node + c].push_back({next, d[c]});
      ++next;
    }
  }
  n_u_ = static_cast<std::size_t>(next);

  p_map_.assign(sp.n_vertices(), -1);
  long np = 0;
  for (std::size_t v = 0; v < sp.n_vertices(); ++v) {
    if (!has_pressure_face && v == 0) continue;  // pressure defined up to a constant
    p_map_[v] = np++;
  }
  n_p_ = static_cast<std::size_t>(np);

  const InterfaceGrid& grid = sp.grid();
  v_map_.assign(hermite_size(grid), -1);
  if (mode_ == FluidMode::Coupled) {
    if (shell_->grid().n_nodes() != grid.n_nodes()) throw MeshMismatch();
    long nv = 0;
    for (std::size_t i : shell_->free_dofs()) v_map_[i] = nv++;
    n_v_ = static_cast<std::size_t>(nv);
    n_l_ = grid.n_nodes() - 2;
  }
}

FluidState FluidSolver::rest_state() const {
  const Discretization& sp = *space_;
  FluidState s;
  s.u = Eigen::VectorXd::Zero(static_cast<long>(sp.n_velocity_dofs()));
  s.p = Eigen::VectorXd::Zero(static_cast<long>(sp.n_vertices()));
  s.v = Eigen::VectorXd::Zero(static_cast<long>(hermite_size(sp.grid())));
  s.lambda = Eigen::VectorXd::Zero(static_cast<long>(n_l_));
  return s;
}

Eigen::VectorXd FluidSolver::pack(const FluidState& state) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<long>(n_unknowns()));
  long r = 0;
  for (std::size_t node = 0; node < directions_.size(); ++node)
    for (const Vec2& d : directions_[node])
      x[r++] = d.x() * state.u[2 * node] + d.y() * state.u[2 * node + 1];
  const long op = static_cast<long>(n_u_);
  for (std::size_t v = 0; v < p_map_.size(); ++v)
    if (p_map_[v] >= 0) x[op + p_map_[v]] = state.p[v];
  const long ov = op + static_cast<long>(n_p_);
  for (std::size_t i = 0; i < v_map_.size(); ++i)
    if (v_map_[i] >= 0) x[ov + v_map_[i]] = state.v[i];
  const long ol = ov + static_cast<long>(n_v_);
  for (std::size_t m = 0; m < n_l_; ++m) x[ol + static_cast<long>(m)] = state.lambda[m];
  return x;
}

FluidState FluidSolver::unpack(const Eigen::VectorXd& x) const {
  FluidState s = rest_state();
  for (std::size_t f = 0; f < u_map_.size(); ++f)
    for (const Entry& e : u_map_[f]) s.u[f] += e.coef * x[e.index];
  const long op = static_cast<long>(n_u_);
  for (std::size_t v = 0; v < p_map_.size(); ++v)
    if (p_map_[v] >= 0) s.p[v] = x[op + p_map_[v]];
  const long ov = op + static_cast<long>(n_p_);
  for (std::size_t i = 0; i < v_map_.size(); ++i)
    if (v_map_[i] >= 0) s.v[i] = x[ov + v_map_[i]];
  const long ol = ov + static_cast<long>(n_v_);
  for (std::size_t m = 0; m < n_l_; ++m) s.lambda[m] = x[ol + static_cast<long>(m)];
  return s;
}

Eigen::VectorXd FluidSolver::constrain(const Eigen::VectorXd& u) const {
  FluidState s = rest_state();
  s.u = u;
  return unpack(pack(s)).u;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Q1 interpolation of a nodal vertex field at a cell quadrature point.
Vec2 vertex_field_at(const Discretization& sp, const std::vector<Vec2>& f, std::size_t cell, std::size_t q) {
  const auto& v = sp.mesh().cells[cell];
  const auto& n = sp.cell_quadrature(cell).q1[q];
  return n[0] * f[v[0]] + n[1] * f[v[1]] + n[2] * f[v[2]] + n[3] * f[v[3]];
}

Vec2 interface_velocity(const InterfaceGrid& grid, const Eigen::VectorXd& v, std::size_t e, double xi) {
  return to_plane(grid.frame, sample(grid, v, e, xi).value);
}

Vec2 cell_velocity(const Discretization& sp, const Eigen::VectorXd& u, std::size_t cell,
                   const std::array<double, 9>& phi) {
  const auto& nodes = sp.cell_velocity_nodes(cell);
  Vec2 out = Vec2::Zero();
  for (int a = 0; a < 9; ++a) out += phi[a] * Vec2(u[2 * nodes[a]], u[2 * nodes[a] + 1]);
  return out;
}

}  // namespace

FluidSystem FluidSolver::assemble(const FluidStepInput& in) const {
  const Discretization& sp = *space_;
  const Mesh& mesh = sp.mesh();
  const InterfaceGrid& grid = sp.grid();
  if (!in.u_prev || !in.map_prev || !in.map_new || !in.w || !in.geom_new)
    throw AssemblyShapeMismatch("fluid step input is incomplete");
  if (static_cast<std::size_t>(in.u_prev->size()) != sp.n_velocity_dofs() ||
      in.w->size() != sp.n_vertices())
    throw AssemblyShapeMismatch("fluid step fields do not match the mesh");
  if (in.map_prev->space() != space_ || in.map_new->space() != space_) throw MeshMismatch();
  if (!(in.dt > 0.0)) throw AssemblyShapeMismatch("dt must be positive");
  if (!(in.map_new->j_min() > 0.0)) throw InadmissibleDomain("Jacobian is not positive");
  if (in.geom_new->stretch.size() != sp.interface_elements().size() * Discretization::kInterfaceRule)
    throw AssemblyShapeMismatch("interface geometry does not match the mesh");
  const bool coupled = mode_ == FluidMode::Coupled;
  if (coupled && (!in.v_star || static_cast<std::size_t>(in.v_star->size()) != hermite_size(grid)))
    throw AssemblyShapeMismatch("v_star missing or of the wrong size");

  const double rho = params_.rho_f;
  const double mu = params_.mu;
  const double dt = in.dt;
  const long op = static_cast<long>(n_u_);
  const long ov = op + static_cast<long>(n_p_);
  const long ol = ov + static_cast<long>(n_v_);
  const Eigen::VectorXd& u0 = *in.u_prev;
  const bool use_new = params_.jacobian == JacobianVariant::New;
  const AleMap& visc_map = use_new ? *in.map_new : *in.map_prev;

  Triplets trip;
  trip.reserve(sp.n_cells() * (18 * 18 + 2 * 4 * 18) + 64 * grid.n_nodes() * 30);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<long>(n_unknowns()));

  auto add_uu = [&](std::size_t fa, std::size_t fb, double val) {
    for (const Entry& ea : u_map_[fa])
      for (const Entry& eb : u_map_[fb]) trip.emplace_back(ea.index, eb.index, ea.coef * eb.coef * val);
  };
  auto add_u_rhs = [&](std::size_t fa, double val) {
    for (const Entry& ea : u_map_[fa]) rhs[ea.index] += ea.coef * val;
  };
  // Symmetric coupling between a velocity DOF and a non-velocity unknown.
  auto add_ux = [&](std::size_t fa, long x, double val) {
    for (const Entry& ea : u_map_[fa]) {
      trip.emplace_back(ea.index, x, ea.coef * val);
      trip.emplace_back(x, ea.index, ea.coef * val);
    }
  };

  const std::size_t nq = sp.qp_per_cell();
  Eigen::Matrix<double, 18, 18> ke;
  Eigen::Matrix<double, 4, 18> be;
  Eigen::Matrix<double, 18, 1> fe;
  for (std::size_t c = 0; c < sp.n_cells(); ++c) {
    const auto& quad = sp.cell_quadrature(c);
    const auto& nodes = sp.cell_velocity_nodes(c);
    const auto& verts = mesh.cells[c];
    ke.setZero();
    be.setZero();
    fe.setZero();
    std::vector<Vec2> body_points;
    if (in.body) body_points = in.map_new->displacement_at(c, quad);
    for (std::size_t q = 0; q < nq; ++q) {
      const std::size_t i = c * nq + q;
      const double w = quad.weight[q];
      const double j0 = in.map_prev->jacobian()[i];
      const double j1 = in.map_new->jacobian()[i];
      const double jc = visc_map.jacobian()[i];
      const Mat2 f1t = in.map_new->grad_A_inv()[i].transpose();
      const Mat2 fct = visc_map.grad_A_inv()[i].transpose();
      const auto& phi = quad.q2[q];
      const Vec2 un = cell_velocity(sp, u0, c, phi);
      const Vec2 beta = un - vertex_field_at(sp, *in.w, c, q);
      std::array<Vec2, 9> g1;
      std::array<Vec2, 9> gc;
      std::array<double, 9> bg;
      for (int a = 0; a < 9; ++a) {
        g1[a] = f1t * quad.q2_grad[q][a];
        gc[a] = fct * quad.q2_grad[q][a];
        bg[a] = beta.dot(gc[a]);
      }
      const double m = rho / (2.0 * dt) * (j0 + j1) * w;
      const double cv = 0.5 * rho * jc * w;
      const double vv = mu * jc * w;
      Vec2 force = Vec2::Zero();
      if (in.body) force = in.body(quad.point[q] + body_points[q], in.t_new);
      for (int a = 0; a < 9; ++a) {
        for (int b = 0; b < 9; ++b) {
          const double diag = m * phi[a] * phi[b] + cv * (bg[b] * phi[a] - bg[a] * phi[b]) +
                              vv * gc[a].dot(gc[b]);
          for (int cc = 0; cc < 2; ++cc) {
            ke(2 * a + cc, 2 * b + cc) += diag;
            for (int d = 0; d < 2; ++d) ke(2 * a + cc, 2 * b + d) += vv * gc[a][d] * gc[b][cc];
          }
        }
        for (int cc = 0; cc < 2; ++cc) {
          fe(2 * a + cc) += rho / dt * j0 * w * un[cc] * phi[a] + j1 * w * force[cc] * phi[a];
          for (int k = 0; k < 4; ++k) be(k, 2 * a + cc) -= j1 * w * quad.q1[q][k] * g1[a][cc];
        }
      }
    }
    for (int a = 0; a < 18; ++a) {
      const std::size_t fa = 2 * nodes[a / 2] + static_cast<std::size_t>(a % 2);
      add_u_rhs(fa, fe(a));
      for (int b = 0; b < 18; ++b) add_uu(fa, 2 * nodes[b / 2] + static_cast<std::size_t>(b % 2), ke(a, b));
      for (int k = 0; k < 4; ++k)
        if (p_map_[verts[k]] >= 0) add_ux(fa, op + p_map_[verts[k]], be(k, a));
    }
  }

  // Rigid faces: wall friction on type III, dynamic pressure data on type I.
  for (const auto& eq : sp.rigid_edges()) {
    const auto& bedge = mesh.boundary_edges[eq.boundary_edge];
    const auto& nodes = sp.cell_velocity_nodes(bedge.cell);
    const Vec2 tau = mesh.face_tangents[bedge.face];
    const Vec2 nu = mesh.face_normals[bedge.face];
    if (bedge.tag == FaceTag::RigidSlip) {
      const double inv_alpha = 1.0 / params_.wall_alpha(bedge.face);
      for (std::size_t g = 0; g < eq.weight.size(); ++g) {
        const auto& phi = eq.q2[g];
        for (int a : kQ2SideNodes[bedge.side])
          for (int b : kQ2SideNodes[bedge.side])
            for (int ca = 0; ca < 2; ++ca)
              for (int cb = 0; cb < 2; ++cb)
                add_uu(2 * nodes[a] + ca, 2 * nodes[b] + cb,
                       inv_alpha * eq.weight[g] * phi[a] * phi[b] * tau[ca] * tau[cb]);
      }
    } else if (bedge.tag == FaceTag::DynamicPressure) {
      const auto it = in.source.face_pressure.find(bedge.face);
      const double pbar = it == in.source.face_pressure.end() ? 0.0 : it->second;
      if (pbar == 0.0) continue;
      for (std::size_t g = 0; g < eq.weight.size(); ++g)
        for (int a : kQ2SideNodes[bedge.side])
          for (int ca = 0; ca < 2; ++ca)
            add_u_rhs(2 * nodes[a] + ca, -pbar * eq.weight[g] * eq.q2[g][a] * nu[ca]);
    }
  }

  // Interface: slip friction, structure inertia and the normal constraint.
  const double inv_alpha = 1.0 / params_.alpha;
  const std::array<Vec2, 2> axes{grid.frame.tangent, grid.frame.normal};
  const auto& elements = sp.interface_elements();
  for (std::size_t e = 0; e < elements.size(); ++e) {
    const auto& el = elements[e];
    const auto& nodes = sp.cell_velocity_nodes(el.cell);
    const auto& side = kQ2SideNodes[el.side];
    std::array<std::size_t, 8> sdof{};
    for (int cc = 0; cc < 2; ++cc)
      for (int j = 0; j < 4; ++j) sdof[4 * cc + j] = hermite_dof(grid, cc, e + j / 2, j % 2);
    for (std::size_t g = 0; g < el.xi.size(); ++g) {
      const std::size_t gi = e * Discretization::kInterfaceRule + g;
      const double w = el.weight[g];
      const Vec2 tau = in.geom_new->tangent[gi];
      const Vec2 nu = in.geom_new->normal[gi];
      const double s = in.geom_new->stretch[gi];
      const auto& phi = el.q2[g];
      const double fs = inv_alpha * s * w;
      for (int a : side)
        for (int b : side)
          for (int ca = 0; ca < 2; ++ca)
            for (int cb = 0; cb < 2; ++cb)
              add_uu(2 * nodes[a] + ca, 2 * nodes[b] + cb, fs * phi[a] * phi[b] * tau[ca] * tau[cb]);
      if (!coupled) continue;

      const auto hv = hermite::values(el.xi[g], el.h);
      std::array<double, 8> psi_tau{};
      std::array<double, 8> psi_nu{};
      for (int cc = 0; cc < 2; ++cc)
        for (int j = 0; j < 4; ++j) {
          psi_tau[4 * cc + j] = hv[j] * axes[cc].dot(tau);
          psi_nu[4 * cc + j] = hv[j] * axes[cc].dot(nu);
        }
      for (int a : side)
        for (int ca = 0; ca < 2; ++ca)
          for (int j = 0; j < 8; ++j) {
            const long vj = v_map_[sdof[j]];
            if (vj >= 0) add_ux(2 * nodes[a] + ca, ov + vj, -fs * phi[a] * tau[ca] * psi_tau[j]);
          }
      for (int i = 0; i < 8; ++i) {
        const long vi = v_map_[sdof[i]];
        if (vi < 0) continue;
        for (int j = 0; j < 8; ++j) {
          const long vj = v_map_[sdof[j]];
          if (vj >= 0) trip.emplace_back(ov + vi, ov + vj, fs * psi_tau[i] * psi_tau[j]);
        }
      }
      const std::array<double, 2> hat{1.0 - el.xi[g], el.xi[g]};
      for (int k = 0; k < 2; ++k) {
        const std::size_t node = e + static_cast<std::size_t>(k);
        if (node == 0 || node + 1 == grid.n_nodes()) continue;
        const long lm = ol + static_cast<long>(node - 1);
        for (int b : side)
          for (int cb = 0; cb < 2; ++cb) add_ux(2 * nodes[b] + cb, lm, hat[k] * w * phi[b] * nu[cb]);
        for (int j = 0; j < 8; ++j) {
          const long vj = v_map_[sdof[j]];
          if (vj < 0) continue;
          trip.emplace_back(lm, ov + vj, -hat[k] * w * psi_nu[j]);
          trip.emplace_back(ov + vj, lm, -hat[k] * w * psi_nu[j]);
        }
      }
    }
  }

  if (coupled) {
    const double rh = shell_->params().inertia() / dt;
    const Eigen::MatrixXd& mm = shell_->mass();
    const Eigen::VectorXd mv = mm * *in.v_star;
    for (std::size_t i = 0; i < v_map_.size(); ++i) {
      if (v_map_[i] < 0) continue;
      rhs[ov + v_map_[i]] += rh * mv[static_cast<long>(i)];
      for (std::size_t j = 0; j < v_map_.size(); ++j)
        if (v_map_[j] >= 0 && mm(static_cast<long>(i), static_cast<long>(j)) != 0.0)
          trip.emplace_back(ov + v_map_[i], ov + v_map_[j], rh * mm(static_cast<long>(i), static_cast<long>(j)));
    }
  }

  FluidSystem sys;
  const auto n = static_cast<long>(n_unknowns());
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.matrix.makeCompressed();
  sys.rhs = std::move(rhs);
  return sys;
}

FluidState FluidSolver::solve(const FluidSystem& system, FluidSolveReport* report) {
  if (system.matrix.rows() != static_cast<long>(n_unknowns()) || system.rhs.size() != system.matrix.rows())
    throw AssemblyShapeMismatch("fluid system does not match the solver layout");
  if (!analysed_) {
    lu_.analyzePattern(system.matrix);
    analysed_ = true;
  }
  lu_.factorize(system.matrix);
  if (lu_.info() != Eigen::Success) throw SolverFailure("fluid factorization failed");
  Eigen::VectorXd x = lu_.solve(system.rhs);
  if (lu_.info() != Eigen::Success || !x.allFinite()) throw SolverFailure("fluid solve failed");
  const double bnorm = system.rhs.norm();
  auto rel = [&](const Eigen::VectorXd& y) {
    const double r = (system.matrix * y - system.rhs).norm();
    return bnorm > 0.0 ? r / bnorm : r;
  };
  double res = rel(x);
  if (res > 1e-12) {
    const Eigen::VectorXd r = system.rhs - system.matrix * x;
    x += lu_.solve(r);
    res = rel(x);
  }
  if (res > 1e-10) throw SolverFailure("fluid solve residual " + std::to_string(res));
  if (report) report->relative_residual = res;
  return unpack(x);
}

// ---------------------------------------------------------------- diagnostics

double fluid_kinetic_energy(const Discretization& space, const Eigen::VectorXd& u,
                            const std::vector<double>& jacobian, double rho) {
  const std::size_t nq = space.qp_per_cell();
  if (jacobian.size() != space.n_qp()) throw AssemblyShapeMismatch("Jacobian size mismatch");
  double s = 0.0;
  for (std::size_t c = 0; c < space.n_cells(); ++c) {
    const auto& quad = space.cell_quadrature(c);
    for (std::size_t q = 0; q < nq; ++q)
      s += quad.weight[q] * jacobian[c * nq + q] * space.velocity_at(u, c, q).squaredNorm();
  }
  return 0.5 * rho * s;
}

namespace {

struct GclSums {
  double lhs = 0.0;
  double rhs = 0.0;
  double scale = 0.0;
};

void gcl_lhs(GclSums& s, double w, double j0, double j1, const Vec2& u0, const Vec2& u1, double rho) {
  s.lhs += rho * w * j0 * (u1 - u0).dot(u1) + 0.5 * rho * w * (j1 - j0) * u1.squaredNorm();
}

void gcl_rhs(GclSums& s, double w, double j0, double j1, const Vec2& u0, const Vec2& u1, double rho) {
  const double a = w * j1 * u1.squaredNorm();
  const double b = w * j0 * (u1 - u0).squaredNorm();
  const double c = w * j0 * u0.squaredNorm();
  s.rhs += 0.5 * rho * (a + b - c);
  s.scale += 0.5 * rho * (std::abs(a) + std::abs(b) + std::abs(c));
}

double gcl_result(const GclSums& s) { return s.scale > 0.0 ? std::abs(s.lhs - s.rhs) / s.scale : 0.0; }

}  // namespace

double verify_gcl_identity(const Discretization& space, const Eigen::VectorXd& u_prev,
                           const Eigen::VectorXd& u_new, const std::vector<double>& j_prev,
                           const std::vector<double>& j_new, double rho) {
  if (j_prev.size() != space.n_qp() || j_new.size() != space.n_qp()) throw MeshMismatch();
  const std::size_t nq = space.qp_per_cell();
  GclSums s;
  for (std::size_t c = 0; c < space.n_cells(); ++c) {
    const auto& quad = space.cell_quadrature(c);
    for (std::size_t q = 0; q < nq; ++q) {
      const std::size_t i = c * nq + q;
      const Vec2 u0 = space.velocity_at(u_prev, c, q);
      const Vec2 u1 = space.velocity_at(u_new, c, q);
      gcl_lhs(s, quad.weight[q], j_prev[i], j_new[i], u0, u1, rho);
      gcl_rhs(s, quad.weight[q], j_prev[i], j_new[i], u0, u1, rho);
    }
  }
  return gcl_result(s);
}

double verify_gcl_identity(const Eigen::VectorXd& u_prev, const Eigen::VectorXd& u_new,
                           const AleMap& map_prev, const AleMap& map_new, double rho,
                           int lhs_points, int rhs_points) {
  if (map_prev.space() != map_new.space()) throw MeshMismatch();
  const Discretization& space = *map_new.space();
  GclSums s;
  for (std::size_t c = 0; c < space.n_cells(); ++c) {
    for (int side = 0; side < 2; ++side) {
      const CellQuadrature quad = space.cell_quadrature(c, side == 0 ? lhs_points : rhs_points);
      const auto g0 = map_prev.grad_B(c, quad);
      const auto g1 = map_new.grad_B(c, quad);
      for (std::size_t q = 0; q < quad.weight.size(); ++q) {
        const double j0 = (Mat2::Identity() + g0[q]).determinant();
        const double j1 = (Mat2::Identity() + g1[q]).determinant();
        const Vec2 u0 = cell_velocity(space, u_prev, c, quad.q2[q]);
        const Vec2 u1 = cell_velocity(space, u_new, c, quad.q2[q]);
        if (side == 0)
          gcl_lhs(s, quad.weight[q], j0, j1, u0, u1, rho);
        else
          gcl_rhs(s, quad.weight[q], j0, j1, u0, u1, rho);
      }
    }
  }
  return gcl_result(s);
}

Dissipation dissipation(const FluidSolver& solver, const FluidState& state, const AleMap& map,
                        const InterfaceGeometry& geom, double dt) {
  const Discretization& sp = solver.space();
  const Mesh& mesh = sp.mesh();
  const FluidParams& prm = solver.params();
  Dissipation d;
  const auto grad = transformed_gradient(state.u, map);
  const std::size_t nq = sp.qp_per_cell();
  for (std::size_t c = 0; c < sp.n_cells(); ++c) {
    const auto& quad = sp.cell_quadrature(c);
    for (std::size_t q = 0; q < nq; ++q) {
      const Mat2& g = grad[c * nq + q];
      const Mat2 sym = 0.5 * (g + g.transpose());
      d.viscous += quad.weight[q] * map.jacobian()[c * nq + q] * sym.squaredNorm();
    }
  }
  d.viscous *= dt * prm.mu;

  for (const auto& eq : sp.rigid_edges()) {
    const auto& be = mesh.boundary_edges[eq.boundary_edge];
    if (be.tag != FaceTag::RigidSlip) continue;
    const Vec2 tau = mesh.face_tangents[be.face];
    double s = 0.0;
    for (std::size_t g = 0; g < eq.weight.size(); ++g) {
      const double ut = cell_velocity(sp, state.u, be.cell, eq.q2[g]).dot(tau);
      s += eq.weight[g] * ut * ut;
    }
    d.walls += 0.5 * dt / prm.wall_alpha(be.face) * s;
  }

  const auto& elements = sp.interface_elements();
  const bool coupled = solver.mode() == FluidMode::Coupled;
  for (std::size_t e = 0; e < elements.size(); ++e) {
    const auto& el = elements[e];
    for (std::size_t g = 0; g < el.xi.size(); ++g) {
      const std::size_t gi = e * Discretization::kInterfaceRule + g;
      Vec2 jump = -cell_velocity(sp, state.u, el.cell, el.q2[g]);
      if (coupled) jump += interface_velocity(sp.grid(), state.v, e, el.xi[g]);
      const double jt = jump.dot(geom.tangent[gi]);
      d.interface += el.weight[g] * jt * jt * geom.stretch[gi];
      d.interface_unweighted += el.weight[g] * jt * jt;
    }
  }
  d.interface *= dt / prm.alpha;
  d.interface_unweighted *= dt / prm.alpha;
  return d;
}

double verify_fluid_energy_inequality(double e_half, double e_full, double fluid_increment,
                                      double structure_increment, double d, double r_norm2,
                                      double dt, double c) {
  return e_half + c * dt * r_norm2 - (e_full + fluid_increment + structure_increment + d);
}

ConstraintResiduals constraint_residuals(const FluidSolver& solver, const FluidState& state,
                                         const AleMap& map, const InterfaceGeometry& geom) {
  const Discretization& sp = solver.space();
  ConstraintResiduals r;
  const auto div = transformed_divergence(state.u, map);
  std::vector<double> per_vertex(sp.n_vertices(), 0.0);
  const std::size_t nq = sp.qp_per_cell();
  for (std::size_t c = 0; c < sp.n_cells(); ++c) {
    const auto& quad = sp.cell_quadrature(c);
    const auto& v = sp.mesh().cells[c];
    for (std::size_t q = 0; q < nq; ++q) {
      const double val = quad.weight[q] * map.jacobian()[c * nq + q] * div[c * nq + q];
      for (int k = 0; k < 4; ++k) per_vertex[v[k]] += quad.q1[q][k] * val;
    }
  }
  for (double x : per_vertex) r.divergence = std::max(r.divergence, std::abs(x));

  if (solver.mode() == FluidMode::Coupled) {
    const InterfaceGrid& grid = sp.grid();
    std::vector<double> per_node(grid.n_nodes(), 0.0);
    const auto& elements = sp.interface_elements();
    for (std::size_t e = 0; e < elements.size(); ++e) {
      const auto& el = elements[e];
      for (std::size_t g = 0; g < el.xi.size(); ++g) {
        const std::size_t gi = e * Discretization::kInterfaceRule + g;
        const Vec2 jump = cell_velocity(sp, state.u, el.cell, el.q2[g]) -
                          interface_velocity(grid, state.v, e, el.xi[g]);
        const double val = el.weight[g] * jump.dot(geom.normal[gi]);
        per_node[e] += (1.0 - el.xi[g]) * val;
        per_node[e + 1] += el.xi[g] * val;
      }
    }
    for (std::size_t k = 1; k + 1 < per_node.size(); ++k) r.normal = std::max(r.normal, std::abs(per_node[k]));
  }
  return r;
}

Eigen::SparseMatrix<double> convection_matrix(const Discretization& space, const Eigen::VectorXd& u_prev,
                                              const std::vector<Vec2>& w, const AleMap& map, double rho) {
  const std::size_t nq = space.qp_per_cell();
  Triplets trip;
  for (std::size_t c = 0; c < space.n_cells(); ++c) {
    const auto& quad = space.cell_quadrature(c);
    const auto& nodes = space.cell_velocity_nodes(c);
    for (std::size_t q = 0; q < nq; ++q) {
      const std::size_t i = c * nq + q;
      const Mat2 ft = map.grad_A_inv()[i].transpose();
      const auto& phi = quad.q2[q];
      const Vec2 beta = cell_velocity(space, u_prev, c, phi) - vertex_field_at(space, w, c, q);
      const double cv = 0.5 * rho * map.jacobian()[i] * quad.weight[q];
      std::array<double, 9> bg;
      for (int a = 0; a < 9; ++a) bg[a] = beta.dot(ft * quad.q2_grad[q][a]);
      for (int a = 0; a < 9; ++a)
        for (int b = 0; b < 9; ++b)
          for (int cc = 0; cc < 2; ++cc)
            trip.emplace_back(static_cast<long>(2 * nodes[a] + cc), static_cast<long>(2 * nodes[b] + cc),
                              cv * (bg[b] * phi[a] - bg[a] * phi[b]));
    }
  }
  const auto n = static_cast<long>(space.n_velocity_dofs());
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace fsi
