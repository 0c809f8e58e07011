#include "fsi/discretization.hpp"

#include <map>
#include <utility>

#include "fsi/errors.hpp"

namespace fsi {

namespace {

// Local vertex index of the Q2 nodes at (i, j) in {0, 2}^2.
constexpr std::array<int, 4> kVertexLocal{0, 2, 8, 6};
// Local Q2 index of each side's midpoint.
constexpr std::array<int, 4> kSideMid{1, 5, 7, 3};

CellQuadrature build_quadrature(const Mesh& mesh, std::size_t cell, int points) {
  const CellMap map = mesh.cell_map(cell);
  const GaussRule& rule = gauss_rule(points);
  CellQuadrature q;
  for (std::size_t j = 0; j < rule.size(); ++j) {
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double s = rule.points[i];
      const double t = rule.points[j];
      const Mat2 jac = map.jacobian(s, t);
      const double det = jac.determinant();
      if (!(det > 0.0)) throw InvalidPolygon("inverted reference cell " + std::to_string(cell));
      const Mat2 inv_t = jac.inverse().transpose();
      q.weight.push_back(rule.weights[i] * rule.weights[j] * det);
      q.point.push_back(map.point(s, t));
      q.q2.push_back(q2::values(s, t));
      q.q1.push_back(q1::values(s, t));
      const auto g2 = q2::ref_gradients(s, t);
      const auto g1 = q1::ref_gradients(s, t);
      std::array<Vec2, 9> p2;
      std::array<Vec2, 4> p1;
      for (int a = 0; a < 9; ++a) p2[a] = inv_t * g2[a];
      for (int a = 0; a < 4; ++a) p1[a] = inv_t * g1[a];
      q.q2_grad.push_back(p2);
      q.q1_grad.push_back(p1);
    }
  }
  return q;
}

}  // namespace

Discretization::Discretization(Mesh mesh) : mesh_(std::move(mesh)) {
  grid_ = interface_grid(mesh_);

  velocity_nodes_ = mesh_.nodes;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_ids;
  cell_nodes_.resize(mesh_.cells.size());
  for (std::size_t c = 0; c < mesh_.cells.size(); ++c) {
    const auto& v = mesh_.cells[c];
    auto& nodes = cell_nodes_[c];
    for (int k = 0; k < 4; ++k) nodes[kVertexLocal[k]] = v[k];
    for (int side = 0; side < 4; ++side) {
      const std::size_t a = v[side];
      const std::size_t b = v[(side + 1) % 4];
      const auto key = std::minmax(a, b);
      auto it = edge_ids.find(key);
      if (it == edge_ids.end()) {
        it = edge_ids.emplace(key, velocity_nodes_.size()).first;
        velocity_nodes_.push_back(0.5 * (mesh_.nodes[a] + mesh_.nodes[b]));
      }
      nodes[kSideMid[side]] = it->second;
    }
  }
  for (std::size_t c = 0; c < mesh_.cells.size(); ++c) {
    cell_nodes_[c][4] = velocity_nodes_.size();
    velocity_nodes_.push_back(mesh_.cell_map(c).point(0.5, 0.5));
  }

  cell_quad_.reserve(mesh_.cells.size());
  for (std::size_t c = 0; c < mesh_.cells.size(); ++c)
    cell_quad_.push_back(build_quadrature(mesh_, c, kCellRule));

  const GaussRule& erule = gauss_rule(kEdgeRule);
  for (std::size_t e = 0; e < mesh_.boundary_edges.size(); ++e) {
    const auto& be = mesh_.boundary_edges[e];
    if (be.tag == FaceTag::Elastic) continue;
    EdgeQuadrature q;
    q.boundary_edge = e;
    q.length = (mesh_.nodes[be.nodes[1]] - mesh_.nodes[be.nodes[0]]).norm();
    const CellMap map = mesh_.cell_map(be.cell);
    for (std::size_t k = 0; k < erule.size(); ++k) {
      const auto st = Mesh::side_point(be.side, erule.points[k]);
      q.weight.push_back(erule.weights[k] * q.length);
      q.point.push_back(map.point(st[0], st[1]));
      q.q2.push_back(q2::values(st[0], st[1]));
    }
    rigid_edges_.push_back(std::move(q));
  }

  const GaussRule& irule = gauss_rule(kInterfaceRule);
  for (std::size_t k = 0; k < mesh_.interface_edges.size(); ++k) {
    const auto& ie = mesh_.interface_edges[k];
    const auto& be = mesh_.boundary_edges[ie.boundary_edge];
    InterfaceElement el;
    el.cell = be.cell;
    el.side = be.side;
    el.reversed = ie.reversed;
    el.h = grid_.element_length(k);
    for (std::size_t g = 0; g < irule.size(); ++g) {
      const double xi = irule.points[g];
      const auto st = Mesh::side_point(be.side, ie.reversed ? 1.0 - xi : xi);
      el.xi.push_back(xi);
      el.weight.push_back(irule.weights[g] * el.h);
      el.q2.push_back(q2::values(st[0], st[1]));
    }
    interface_.push_back(std::move(el));
  }
}

std::array<std::size_t, 3> Discretization::edge_velocity_nodes(std::size_t boundary_edge) const {
  const auto& be = mesh_.boundary_edges.at(boundary_edge);
  const auto& nodes = cell_nodes_[be.cell];
  const auto& loc = kQ2SideNodes[be.side];
  return {nodes[loc[0]], nodes[loc[1]], nodes[loc[2]]};
}

CellQuadrature Discretization::cell_quadrature(std::size_t cell, int points) const {
  return build_quadrature(mesh_, cell, points);
}

Vec2 Discretization::velocity_at(const Eigen::VectorXd& u, std::size_t cell, std::size_t qp) const {
  const auto& phi = cell_quad_[cell].q2[qp];
  const auto& nodes = cell_nodes_[cell];
  Vec2 out = Vec2::Zero();
  for (int a = 0; a < 9; ++a) out += phi[a] * Vec2(u[2 * nodes[a]], u[2 * nodes[a] + 1]);
  return out;
}

Mat2 Discretization::velocity_gradient_at(const Eigen::VectorXd& u, std::size_t cell,
                                          std::size_t qp) const {
  const auto& grad = cell_quad_[cell].q2_grad[qp];
  const auto& nodes = cell_nodes_[cell];
  Mat2 out = Mat2::Zero();
  for (int a = 0; a < 9; ++a)
    out += Vec2(u[2 * nodes[a]], u[2 * nodes[a] + 1]) * grad[a].transpose();
  return out;
}

DiscretizationPtr make_discretization(const ReferencePolygon& polygon, Resolution resolution) {
  return std::make_shared<const Discretization>(build_reference_mesh(polygon, resolution));
}

}  // namespace fsi
