#include "fsi/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <ostream>

#include "fsi/errors.hpp"

namespace fsi {

namespace {

constexpr double kAngleTol = 1e-12;

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(FaceTag tag) {
  switch (tag) {
    case FaceTag::Elastic: return "elastic";
    case FaceTag::DynamicPressure: return "I";
    case FaceTag::NoSlip: return "II";
    case FaceTag::RigidSlip: return "III";
    case FaceTag::Symmetry: return "IV";
  }
  return "?";
}

FaceTag face_tag_from_string(std::string_view text) {
  const std::string t = lower(text);
  if (t == "elastic") return FaceTag::Elastic;
  if (t == "i" || t == "dynamic_pressure") return FaceTag::DynamicPressure;
  if (t == "ii" || t == "no_slip") return FaceTag::NoSlip;
  if (t == "iii" || t == "slip") return FaceTag::RigidSlip;
  if (t == "iv" || t == "symmetry") return FaceTag::Symmetry;
  throw InvalidPolygon("unknown face tag '" + std::string(text) + "'");
}

ReferencePolygon::ReferencePolygon(std::vector<Vec2> vertices, std::vector<FaceTag> tags)
    : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3) throw InvalidPolygon("polygon needs at least 3 vertices");
  if (tags.size() != n) throw InvalidPolygon("one tag per face required");

  double area2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) area2 += cross(vertices_[i], vertices_[(i + 1) % n]);
  if (!(area2 > 0.0)) throw InvalidPolygon("vertices must be in counter-clockwise order");

  std::size_t n_elastic = 0;
  double turning = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    faces_.push_back({i, (i + 1) % n, tags[i]});
    const Vec2 e0 = vertices_[(i + 1) % n] - vertices_[i];
    const Vec2 e1 = vertices_[(i + 2) % n] - vertices_[(i + 1) % n];
    if (e0.norm() == 0.0) throw InvalidPolygon("zero-length face " + std::to_string(i));
    const double c = cross(e0, e1);
    if (c < -kAngleTol * e0.norm() * e1.norm())
      throw InvalidPolygon("interior angle exceeds pi at vertex " + std::to_string((i + 1) % n));
    turning += std::atan2(c, e0.dot(e1));
    if (tags[i] == FaceTag::Elastic) {
      ++n_elastic;
      elastic_face_ = i;
    }
  }
  if (std::abs(turning - 2.0 * M_PI) > 1e-9) throw InvalidPolygon("polygon is not simple");
  if (n_elastic != 1) throw InvalidPolygon("exactly one face must be tagged Elastic");
  const Vec2 t = face_tangent(elastic_face_);
  if (std::abs(t.x()) != 1.0 && std::abs(t.y()) != 1.0)
    throw InvalidPolygon("the elastic face must be axis-aligned");
}

double ReferencePolygon::face_length(std::size_t face) const {
  const auto& f = faces_.at(face);
  return (vertices_[f.v1] - vertices_[f.v0]).norm();
}

Vec2 ReferencePolygon::face_tangent(std::size_t face) const {
  const auto& f = faces_.at(face);
  return (vertices_[f.v1] - vertices_[f.v0]) / face_length(face);
}

Vec2 ReferencePolygon::face_normal(std::size_t face) const {
  const Vec2 t = face_tangent(face);
  return Vec2(t.y(), -t.x());
}

ReferencePolygon unit_square_polygon() {
  return ReferencePolygon({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)},
                          {FaceTag::RigidSlip, FaceTag::DynamicPressure, FaceTag::Elastic,
                           FaceTag::DynamicPressure});
}

CellMap Mesh::cell_map(std::size_t cell) const {
  const auto& c = cells[cell];
  return CellMap{{nodes[c[0]], nodes[c[1]], nodes[c[2]], nodes[c[3]]}};
}

std::array<double, 2> Mesh::side_point(int side, double p) {
  switch (side) {
    case 0: return {p, 0.0};
    case 1: return {1.0, p};
    case 2: return {1.0 - p, 1.0};
    default: return {0.0, 1.0 - p};
  }
}

namespace {

struct SideBreak {
  double param;        // parameter along the square's axis (s or t)
  std::size_t vertex;  // polygon vertex sitting there
};

std::vector<double> refine(const std::vector<double>& breaks, int n) {
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    for (int i = 0; i < n; ++i)
      out.push_back(breaks[k] + (breaks[k + 1] - breaks[k]) * static_cast<double>(i) / n);
  }
  out.push_back(breaks.back());
  return out;
}

std::vector<double> merge(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  std::vector<double> out;
  for (double v : a)
    if (out.empty() || v - out.back() > 1e-12) out.push_back(v);
  out.front() = 0.0;
  out.back() = 1.0;
  return out;
}

}  // namespace

Mesh build_reference_mesh(const ReferencePolygon& polygon, Resolution resolution) {
  if (resolution.nx < 2 || resolution.ny < 2)
    throw NonRectifiablePolygon("resolution must be at least 2 per axis");

  const auto& verts = polygon.vertices();
  const std::size_t nv = verts.size();
  std::vector<std::size_t> corners;
  for (std::size_t i = 0; i < nv; ++i) {
    const Vec2 e0 = verts[i] - verts[(i + nv - 1) % nv];
    const Vec2 e1 = verts[(i + 1) % nv] - verts[i];
    if (cross(e0, e1) > kAngleTol * e0.norm() * e1.norm()) corners.push_back(i);
  }
  if (corners.size() != 4)
    throw NonRectifiablePolygon("polygon must have exactly four corners, found " +
                                std::to_string(corners.size()));

  const std::array<Vec2, 4> c{verts[corners[0]], verts[corners[1]], verts[corners[2]],
                              verts[corners[3]]};
  // Side k runs from corner k to corner k+1. Sides 0 and 1 increase s and t,
  // sides 2 and 3 decrease them.
  std::array<std::vector<SideBreak>, 4> side_breaks;
  std::array<std::vector<std::size_t>, 4> side_faces;
  for (int k = 0; k < 4; ++k) {
    const Vec2 a = c[k];
    const Vec2 b = c[(k + 1) % 4];
    const double len = (b - a).norm();
    std::size_t v = corners[k];
    while (true) {
      double p = (verts[v] - a).norm() / len;
      if (v == corners[k]) p = 0.0;
      if (v == corners[(k + 1) % 4]) p = 1.0;
      side_breaks[k].push_back({k < 2 ? p : 1.0 - p, v});
      if (v == corners[(k + 1) % 4]) break;
      side_faces[k].push_back(v);  // face v joins v and v+1
      v = (v + 1) % nv;
    }
  }

  auto params = [](const std::vector<SideBreak>& b) {
    std::vector<double> out;
    for (const auto& x : b) out.push_back(x.param);
    return out;
  };
  const std::vector<double> s_grid =
      refine(merge(params(side_breaks[0]), params(side_breaks[2])), resolution.nx);
  const std::vector<double> t_grid =
      refine(merge(params(side_breaks[1]), params(side_breaks[3])), resolution.ny);
  const std::size_t ns = s_grid.size();
  const std::size_t nt = t_grid.size();

  Mesh mesh;
  const CellMap square{c};
  auto node_id = [ns](std::size_t i, std::size_t j) { return i + ns * j; };
  mesh.nodes.resize(ns * nt);
  for (std::size_t j = 0; j < nt; ++j)
    for (std::size_t i = 0; i < ns; ++i) mesh.nodes[node_id(i, j)] = square.point(s_grid[i], t_grid[j]);

  // Snap boundary nodes that coincide with polygon vertices.
  for (int k = 0; k < 4; ++k) {
    for (const auto& br : side_breaks[k]) {
      const auto& grid = (k % 2 == 0) ? s_grid : t_grid;
      const auto it = std::min_element(grid.begin(), grid.end(), [&](double x, double y) {
        return std::abs(x - br.param) < std::abs(y - br.param);
      });
      const std::size_t idx = static_cast<std::size_t>(it - grid.begin());
      std::size_t id = 0;
      switch (k) {
        case 0: id = node_id(idx, 0); break;
        case 1: id = node_id(ns - 1, idx); break;
        case 2: id = node_id(idx, nt - 1); break;
        default: id = node_id(0, idx); break;
      }
      mesh.nodes[id] = verts[br.vertex];
    }
  }

  for (std::size_t j = 0; j + 1 < nt; ++j)
    for (std::size_t i = 0; i + 1 < ns; ++i)
      mesh.cells.push_back({node_id(i, j), node_id(i + 1, j), node_id(i + 1, j + 1), node_id(i, j + 1)});

  for (std::size_t f = 0; f < polygon.faces().size(); ++f) {
    mesh.face_tags.push_back(polygon.faces()[f].tag);
    mesh.face_normals.push_back(polygon.face_normal(f));
    mesh.face_tangents.push_back(polygon.face_tangent(f));
    mesh.face_lengths.push_back(polygon.face_length(f));
  }

  // Face owning the parameter interval around `mid` on side k.
  auto face_on_side = [&](int k, double mid) {
    const auto& br = side_breaks[k];
    for (std::size_t m = 0; m + 1 < br.size(); ++m) {
      const double lo = std::min(br[m].param, br[m + 1].param);
      const double hi = std::max(br[m].param, br[m + 1].param);
      if (mid >= lo && mid <= hi) return side_faces[k][m];
    }
    throw NonRectifiablePolygon("boundary edge not covered by any face");
  };
  auto add_edge = [&](std::size_t a, std::size_t b, int k, double mid, std::size_t cell, int side) {
    const std::size_t face = face_on_side(k, mid);
    mesh.boundary_edges.push_back({{a, b}, face, polygon.faces()[face].tag, cell, side});
  };
  const std::size_t ncs = ns - 1;
  for (std::size_t i = 0; i + 1 < ns; ++i)
    add_edge(node_id(i, 0), node_id(i + 1, 0), 0, 0.5 * (s_grid[i] + s_grid[i + 1]), i, 0);
  for (std::size_t j = 0; j + 1 < nt; ++j)
    add_edge(node_id(ns - 1, j), node_id(ns - 1, j + 1), 1, 0.5 * (t_grid[j] + t_grid[j + 1]),
             ncs - 1 + ncs * j, 1);
  for (std::size_t i = ns - 1; i > 0; --i)
    add_edge(node_id(i, nt - 1), node_id(i - 1, nt - 1), 2, 0.5 * (s_grid[i] + s_grid[i - 1]),
             (i - 1) + ncs * (nt - 2), 2);
  for (std::size_t j = nt - 1; j > 0; --j)
    add_edge(node_id(0, j), node_id(0, j - 1), 3, 0.5 * (t_grid[j] + t_grid[j - 1]), ncs * (j - 1), 3);

  // Interface frame and ordering.
  const std::size_t ef = polygon.elastic_face();
  const Vec2 t = polygon.face_tangent(ef);
  const Vec2 p0 = verts[polygon.faces()[ef].v0];
  const Vec2 p1 = verts[polygon.faces()[ef].v1];
  mesh.has_elastic_face = true;
  mesh.frame.tangent = std::abs(t.x()) == 1.0 ? Vec2::UnitX() : Vec2::UnitY();
  mesh.frame.normal = polygon.face_normal(ef);
  mesh.frame.origin = (p1 - p0).dot(mesh.frame.tangent) > 0 ? p0 : p1;
  mesh.frame.length = std::abs((p1 - p0).dot(mesh.frame.tangent));

  auto zcoord = [&](std::size_t node) { return (mesh.nodes[node] - mesh.frame.origin).dot(mesh.frame.tangent); };
  std::vector<std::size_t> iface_nodes;
  for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
    const auto& be = mesh.boundary_edges[e];
    if (be.tag != FaceTag::Elastic) continue;
    const bool reversed = zcoord(be.nodes[0]) > zcoord(be.nodes[1]);
    mesh.interface_edges.push_back({e, reversed});
    iface_nodes.push_back(be.nodes[0]);
    iface_nodes.push_back(be.nodes[1]);
  }
  std::sort(iface_nodes.begin(), iface_nodes.end(),
            [&](std::size_t a, std::size_t b) { return zcoord(a) < zcoord(b); });
  iface_nodes.erase(std::unique(iface_nodes.begin(), iface_nodes.end()), iface_nodes.end());
  mesh.interface_nodes = iface_nodes;
  std::sort(mesh.interface_edges.begin(), mesh.interface_edges.end(),
            [&](const InterfaceEdge& a, const InterfaceEdge& b) {
              const auto& ea = mesh.boundary_edges[a.boundary_edge];
              const auto& eb = mesh.boundary_edges[b.boundary_edge];
              return std::min(zcoord(ea.nodes[0]), zcoord(ea.nodes[1])) <
                     std::min(zcoord(eb.nodes[0]), zcoord(eb.nodes[1]));
            });
  return mesh;
}

std::vector<std::size_t> InterfaceGrid::free_scalar_dofs() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (clamped[k]) continue;
    out.push_back(2 * k);
    out.push_back(2 * k + 1);
  }
  return out;
}

InterfaceGrid interface_grid(const Mesh& mesh) {
  if (!mesh.has_elastic_face || mesh.interface_nodes.size() < 2) throw MissingElasticFace();
  InterfaceGrid grid;
  grid.frame = mesh.frame;
  for (std::size_t node : mesh.interface_nodes)
    grid.z.push_back((mesh.nodes[node] - mesh.frame.origin).dot(mesh.frame.tangent));
  grid.z.front() = 0.0;
  grid.z.back() = mesh.frame.length;
  grid.clamped.assign(grid.z.size(), false);
  grid.clamped.front() = true;
  grid.clamped.back() = true;
  return grid;
}

void write_vtk_mesh(std::ostream& out, const Mesh& mesh) {
  out.precision(17);
  out << "# vtk DataFile Version 3.0\nfsi reference mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.nodes.size() << " double\n";
  for (const auto& x : mesh.nodes) out << x.x() << ' ' << x.y() << " 0\n";
  out << "CELLS " << mesh.cells.size() << ' ' << 5 * mesh.cells.size() << '\n';
  for (const auto& c : mesh.cells) out << "4 " << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << c[3] << '\n';
  out << "CELL_TYPES " << mesh.cells.size() << '\n';
  for (std::size_t i = 0; i < mesh.cells.size(); ++i) out << "9\n";
}

}  // namespace fsi
