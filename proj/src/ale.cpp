#include "fsi/ale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fsi/errors.hpp"
#include "fsi/interface_field.hpp"

namespace fsi {

double spectral_norm(const Mat2& m) {
  const double fro2 = m.squaredNorm();
  const double det = m.determinant();
  const double disc = std::max(0.0, fro2 * fro2 - 4.0 * det * det);
  return std::sqrt(0.5 * (fro2 + std::sqrt(disc)));
}

AleMap::AleMap(DiscretizationPtr space, std::vector<Vec2> displacement, double residual)
    : space_(std::move(space)), b_(std::move(displacement)), residual_(residual) {
  const Discretization& sp = *space_;
  if (b_.size() != sp.n_vertices()) throw MeshMismatch();
  const std::size_t nq = sp.qp_per_cell();
  grad_a_.resize(sp.n_qp());
  grad_a_inv_.resize(sp.n_qp());
  j_.resize(sp.n_qp());
  j_min_ = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < sp.n_cells(); ++c) {
    const auto gb = grad_B(c, sp.cell_quadrature(c));
    for (std::size_t q = 0; q < nq; ++q) {
      const std::size_t i = c * nq + q;
      grad_a_[i] = Mat2::Identity() + gb[q];
      grad_a_inv_[i] = grad_a_[i].inverse();
      j_[i] = grad_a_[i].determinant();
      j_min_ = std::min(j_min_, j_[i]);
      sup_grad_b_ = std::max(sup_grad_b_, spectral_norm(gb[q]));
    }
  }
}

std::vector<Mat2> AleMap::grad_B(std::size_t cell, const CellQuadrature& quad) const {
  const auto& v = space_->mesh().cells[cell];
  std::vector<Mat2> out(quad.weight.size(), Mat2::Zero());
  for (std::size_t q = 0; q < out.size(); ++q)
    for (int a = 0; a < 4; ++a) out[q] += b_[v[a]] * quad.q1_grad[q][a].transpose();
  return out;
}

std::vector<Vec2> AleMap::displacement_at(std::size_t cell, const CellQuadrature& quad) const {
  const auto& v = space_->mesh().cells[cell];
  std::vector<Vec2> out(quad.weight.size(), Vec2::Zero());
  for (std::size_t q = 0; q < out.size(); ++q)
    for (int a = 0; a < 4; ++a) out[q] += quad.q1[q][a] * b_[v[a]];
  return out;
}

HarmonicExtension::HarmonicExtension(DiscretizationPtr space) : space_(std::move(space)) {
  const Discretization& sp = *space_;
  const Mesh& mesh = sp.mesh();
  const std::size_t nv = sp.n_vertices();
  std::vector<bool> boundary(nv, false);
  for (const auto& e : mesh.boundary_edges) boundary[e.nodes[0]] = boundary[e.nodes[1]] = true;
  interior_.assign(nv, -1);
  long n_int = 0;
  for (std::size_t v = 0; v < nv; ++v)
    if (!boundary[v]) interior_[v] = n_int++;

  std::vector<Eigen::Triplet<double>> tii;
  std::vector<Eigen::Triplet<double>> tib;
  for (std::size_t c = 0; c < sp.n_cells(); ++c) {
    const auto& quad = sp.cell_quadrature(c);
    const auto& v = mesh.cells[c];
    Eigen::Matrix4d ke = Eigen::Matrix4d::Zero();
    for (std::size_t q = 0; q < quad.weight.size(); ++q)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          ke(a, b) += quad.weight[q] * quad.q1_grad[q][a].dot(quad.q1_grad[q][b]);
    for (int a = 0; a < 4; ++a) {
      const long ia = interior_[v[a]];
      if (ia < 0) continue;
      for (int b = 0; b < 4; ++b) {
        const long ib = interior_[v[b]];
        if (ib >= 0)
          tii.emplace_back(ia, ib, ke(a, b));
        else
          tib.emplace_back(ia, static_cast<long>(v[b]), ke(a, b));
      }
    }
  }
  k_ii_.resize(n_int, n_int);
  k_ii_.setFromTriplets(tii.begin(), tii.end());
  k_ib_.resize(n_int, static_cast<long>(nv));
  k_ib_.setFromTriplets(tib.begin(), tib.end());
  if (n_int > 0) {
    solver_.compute(k_ii_);
    if (solver_.info() != Eigen::Success) throw SolverFailure("harmonic extension factorization failed");
  }
}

AleMap HarmonicExtension::extend(const Eigen::VectorXd& eta) const {
  const InterfaceGrid& grid = space_->grid();
  if (static_cast<std::size_t>(eta.size()) != hermite_size(grid))
    throw AssemblyShapeMismatch("interface displacement has the wrong size");
  for (std::size_t k : {std::size_t{0}, grid.n_nodes() - 1})
    for (int c = 0; c < 2; ++c)
      for (int s = 0; s < 2; ++s)
        if (std::abs(eta[hermite_dof(grid, c, k, s)]) > 1e-14)
          throw ClampViolatedInput("interface displacement is not clamped at node " + std::to_string(k));
  std::vector<Vec2> zr(grid.n_nodes());
  for (std::size_t k = 0; k < grid.n_nodes(); ++k)
    zr[k] = Vec2(eta[hermite_dof(grid, 0, k, 0)], eta[hermite_dof(grid, 1, k, 0)]);
  return extend_nodal(zr);
}

AleMap HarmonicExtension::extend_nodal(const std::vector<Vec2>& eta_zr) const {
  const Discretization& sp = *space_;
  const Mesh& mesh = sp.mesh();
  if (eta_zr.size() != mesh.interface_nodes.size())
    throw AssemblyShapeMismatch("one displacement per interface node required");
  if (eta_zr.front().norm() > 1e-14 || eta_zr.back().norm() > 1e-14)
    throw ClampViolatedInput("interface displacement must vanish at both ends");

  std::vector<Vec2> b(sp.n_vertices(), Vec2::Zero());
  for (std::size_t k = 0; k < eta_zr.size(); ++k)
    b[mesh.interface_nodes[k]] = to_plane(mesh.frame, eta_zr[k]);

  double residual = 0.0;
  const long n_int = k_ii_.rows();
  if (n_int > 0) {
    for (int c = 0; c < 2; ++c) {
      Eigen::VectorXd bb(static_cast<long>(b.size()));
      for (std::size_t v = 0; v < b.size(); ++v) bb[static_cast<long>(v)] = b[v][c];
      const Eigen::VectorXd rhs = -(k_ib_ * bb);
      const Eigen::VectorXd x = solver_.solve(rhs);
      if (solver_.info() != Eigen::Success) throw SolverFailure("harmonic extension solve failed");
      const double scale = rhs.norm();
      if (scale > 0.0) residual = std::max(residual, (k_ii_ * x - rhs).norm() / scale);
      for (std::size_t v = 0; v < b.size(); ++v)
        if (interior_[v] >= 0) b[v][c] = x[interior_[v]];
    }
  }
  if (residual > 1e-10) throw SolverFailure("harmonic extension residual too large");
  return AleMap(space_, std::move(b), residual);
}

AleMap HarmonicExtension::identity() const {
  return AleMap(space_, std::vector<Vec2>(space_->n_vertices(), Vec2::Zero()), 0.0);
}

InterfaceGeometry interface_geometry(const Discretization& space, const Eigen::VectorXd& eta) {
  const InterfaceGrid& grid = space.grid();
  const InterfaceFrame& frame = grid.frame;
  if (static_cast<std::size_t>(eta.size()) != hermite_size(grid))
    throw AssemblyShapeMismatch("interface displacement has the wrong size");
  InterfaceGeometry g;
  const auto& elements = space.interface_elements();
  for (std::size_t e = 0; e < elements.size(); ++e) {
    for (double xi : elements[e].xi) {
      const InterfaceSample s = sample(grid, eta, e, xi);
      const double a = 1.0 + s.dz.x();
      const double b = s.dz.y();
      const double stretch = std::sqrt(a * a + b * b);
      if (!(stretch > 1e-12)) throw DegenerateTangent("deformed interface has zero stretch");
      g.stretch.push_back(stretch);
      g.tangent.push_back((a * frame.tangent + b * frame.normal) / stretch);
      g.normal.push_back((-b * frame.tangent + a * frame.normal) / stretch);
      const double z = grid.z[e] + xi * grid.element_length(e);
      g.position.push_back(frame.origin + z * frame.tangent + to_plane(frame, s.value));
    }
  }
  return g;
}

std::vector<Vec2> ale_velocity(const AleMap& a_new, const AleMap& a_old, double dt) {
  if (a_new.space() != a_old.space()) throw MeshMismatch();
  if (!(dt > 0.0)) throw std::invalid_argument("ale_velocity: dt must be positive");
  std::vector<Vec2> w(a_new.displacement().size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = (a_new.displacement()[i] - a_old.displacement()[i]) / dt;
  return w;
}

DomainStatus check_admissible(const AleMap& map, double c_omega, double j_floor) {
  DomainStatus st;
  st.j_min = map.j_min();
  st.injectivity_margin = c_omega - map.sup_grad_B();
  st.admissible = st.j_min >= j_floor && st.injectivity_margin > 0.0;
  return st;
}

namespace {

void require_field(const Eigen::VectorXd& u, const Discretization& sp) {
  if (static_cast<std::size_t>(u.size()) != sp.n_velocity_dofs())
    throw AssemblyShapeMismatch("velocity vector does not match the mesh");
}

}  // namespace

std::vector<Mat2> transformed_gradient(const Eigen::VectorXd& u, const AleMap& map) {
  const Discretization& sp = *map.space();
  require_field(u, sp);
  const std::size_t nq = sp.qp_per_cell();
  std::vector<Mat2> out(sp.n_qp());
  for (std::size_t c = 0; c < sp.n_cells(); ++c)
    for (std::size_t q = 0; q < nq; ++q)
      out[c * nq + q] = sp.velocity_gradient_at(u, c, q) * map.grad_A_inv()[c * nq + q];
  return out;
}

std::vector<double> transformed_divergence(const Eigen::VectorXd& u, const AleMap& map) {
  const Discretization& sp = *map.space();
  require_field(u, sp);
  const std::size_t nq = sp.qp_per_cell();
  std::vector<double> out(sp.n_qp(), 0.0);
  for (std::size_t c = 0; c < sp.n_cells(); ++c) {
    const auto& quad = sp.cell_quadrature(c);
    const auto& nodes = sp.cell_velocity_nodes(c);
    for (std::size_t q = 0; q < nq; ++q) {
      const Mat2 finv_t = map.grad_A_inv()[c * nq + q].transpose();
      double div = 0.0;
      for (int a = 0; a < 9; ++a) {
        const Vec2 g = finv_t * quad.q2_grad[q][a];
        div += u[2 * nodes[a]] * g.x() + u[2 * nodes[a] + 1] * g.y();
      }
      out[c * nq + q] = div;
    }
  }
  return out;
}

double korn_ratio(const Eigen::VectorXd& u, const AleMap& map) {
  const Discretization& sp = *map.space();
  const auto grad = transformed_gradient(u, map);
  const std::size_t nq = sp.qp_per_cell();
  double full = 0.0;
  double sym = 0.0;
  for (std::size_t c = 0; c < sp.n_cells(); ++c) {
    const auto& quad = sp.cell_quadrature(c);
    for (std::size_t q = 0; q < nq; ++q) {
      const Mat2& g = grad[c * nq + q];
      full += quad.weight[q] * g.squaredNorm();
      sym += quad.weight[q] * (0.5 * (g + g.transpose())).squaredNorm();
    }
  }
  if (std::sqrt(sym) <= 1e-14) throw ZeroDeformation();
  return std::sqrt(full / sym);
}

}  // namespace fsi
