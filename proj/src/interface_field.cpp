#include "fsi/interface_field.hpp"

namespace fsi {

InterfaceSample sample(const InterfaceGrid& grid, const Eigen::VectorXd& field,
                       std::size_t element, double xi) {
  const double h = grid.element_length(element);
  const auto n = hermite::values(xi, h);
  const auto d1 = hermite::first_derivatives(xi, h);
  const auto d2 = hermite::second_derivatives(xi, h);
  InterfaceSample s;
  for (int c = 0; c < 2; ++c) {
    const std::array<std::size_t, 4> idx{
        hermite_dof(grid, c, element, 0), hermite_dof(grid, c, element, 1),
        hermite_dof(grid, c, element + 1, 0), hermite_dof(grid, c, element + 1, 1)};
    for (int a = 0; a < 4; ++a) {
      s.value[c] += n[a] * field[idx[a]];
      s.dz[c] += d1[a] * field[idx[a]];
      s.dzz[c] += d2[a] * field[idx[a]];
    }
  }
  return s;
}

Eigen::VectorXd hermite_interpolant(const InterfaceGrid& grid,
                                    const std::function<Vec2(double)>& f,
                                    const std::function<Vec2(double)>& df) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hermite_size(grid)));
  for (std::size_t k = 0; k < grid.n_nodes(); ++k) {
    const Vec2 v = f(grid.z[k]);
    const Vec2 d = df(grid.z[k]);
    for (int c = 0; c < 2; ++c) {
      out[hermite_dof(grid, c, k, 0)] = v[c];
      out[hermite_dof(grid, c, k, 1)] = d[c];
    }
  }
  return out;
}

void apply_clamp(const InterfaceGrid& grid, Eigen::VectorXd& field) {
  for (std::size_t k = 0; k < grid.n_nodes(); ++k) {
    if (!grid.clamped[k]) continue;
    for (int c = 0; c < 2; ++c)
      for (int s = 0; s < 2; ++s) field[hermite_dof(grid, c, k, s)] = 0.0;
  }
}

}  // namespace fsi
