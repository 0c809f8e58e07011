#pragma once

// Reference polygon, structured quadrilateral mesh and the 1D interface grid
// on the elastic face.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fsi/fe.hpp"

namespace fsi {

/// Boundary condition type carried by a polygon face.
enum class FaceTag {
  Elastic,          // the compliant face Gamma_0
  DynamicPressure,  // type I:   p + rho/2 |u|^2 = P_i, u.tau = 0
  NoSlip,           // type II:  u = 0
  RigidSlip,        // type III: u.nu = 0, Navier slip with alpha_i
  Symmetry,         // type IV:  u.nu = 0, natural tangential condition
};

std::string_view to_string(FaceTag tag);
/// Accepts "elastic", "I"/"dynamic_pressure", "II"/"no_slip",
/// "III"/"slip", "IV"/"symmetry" (case-insensitive).
FaceTag face_tag_from_string(std::string_view text);

struct PolygonFace {
  std::size_t v0 = 0;
  std::size_t v1 = 0;
  FaceTag tag = FaceTag::NoSlip;
};

/// Closed convex polygon, vertices in counter-clockwise order; face i joins
/// vertex i and vertex i+1.
class ReferencePolygon {
 public:
  ReferencePolygon(std::vector<Vec2> vertices, std::vector<FaceTag> tags);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<PolygonFace>& faces() const { return faces_; }
  std::size_t elastic_face() const { return elastic_face_; }
  double face_length(std::size_t face) const;
  Vec2 face_tangent(std::size_t face) const;
  /// Unit outward normal.
  Vec2 face_normal(std::size_t face) const;
  /// Length L of the elastic face.
  double length() const { return face_length(elastic_face_); }

 private:
  std::vector<Vec2> vertices_;
  std::vector<PolygonFace> faces_;
  std::size_t elastic_face_ = 0;
};

/// Unit square with bottom type III, right type I, top elastic, left type I.
ReferencePolygon unit_square_polygon();

struct BoundaryEdge {
  std::array<std::size_t, 2> nodes{};
  std::size_t face = 0;
  FaceTag tag = FaceTag::NoSlip;
  std::size_t cell = 0;
  /// Local side of `cell`: 0 bottom (v0 v1), 1 right (v1 v2), 2 top (v2 v3),
  /// 3 left (v3 v0).
  int side = 0;
};

/// Elastic-face frame: z runs from `origin` along `tangent`, the reference
/// outward normal is `normal`.
struct InterfaceFrame {
  Vec2 origin = Vec2::Zero();
  Vec2 tangent = Vec2::UnitX();
  Vec2 normal = Vec2::UnitY();
  double length = 1.0;
};

struct InterfaceEdge {
  std::size_t boundary_edge = 0;
  /// True when the cell side runs against increasing z.
  bool reversed = false;
};

/// Conforming structured quadrilateral mesh of the reference polygon.
struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<std::size_t, 4>> cells;
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<std::size_t> interface_nodes;  // increasing z
  std::vector<InterfaceEdge> interface_edges;  // increasing z
  std::vector<FaceTag> face_tags;
  std::vector<Vec2> face_normals;
  std::vector<Vec2> face_tangents;
  std::vector<double> face_lengths;
  bool has_elastic_face = false;
  InterfaceFrame frame;

  CellMap cell_map(std::size_t cell) const;
  /// Reference-square coordinates of a point on a local side, parameter
  /// p in [0, 1] running in the side's own direction.
  static std::array<double, 2> side_point(int side, double p);
};

struct Resolution {
  int nx = 2;
  int ny = 2;
};

/// Tensor-product mesh over the bilinear map of the polygon's four corners.
/// Vertices with a straight angle split sides into faces; every face
/// interval receives nx (resp. ny) cells.
Mesh build_reference_mesh(const ReferencePolygon& polygon, Resolution resolution);

/// Degrees of freedom of the cubic Hermite space on Gamma_0.
struct InterfaceGrid {
  std::vector<double> z;
  std::vector<bool> clamped;  // per node; value and slope are constrained
  InterfaceFrame frame;

  std::size_t n_nodes() const { return z.size(); }
  std::size_t n_elements() const { return z.size() - 1; }
  double element_length(std::size_t e) const { return z[e + 1] - z[e]; }
  /// Scalar Hermite DOFs: 2 per node (value, slope).
  std::size_t n_scalar_dofs() const { return 2 * z.size(); }
  /// Scalar DOFs not fixed by the clamped conditions.
  std::vector<std::size_t> free_scalar_dofs() const;
};

InterfaceGrid interface_grid(const Mesh& mesh);

/// VTK legacy ASCII (UNSTRUCTURED_GRID, VTK_QUAD cells).
void write_vtk_mesh(std::ostream& out, const Mesh& mesh);

}  // namespace fsi
