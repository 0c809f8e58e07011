#include <doctest.h>

#include <cmath>

#include <Eigen/LU>

#include "fsi/errors.hpp"
#include "fsi/shell.hpp"
#include "support.hpp"

using namespace fsi;
using namespace fsi::testing;

namespace {

InterfaceGrid grid_of(int n) { return unit_square(n)->grid(); }

StructureState random_state(const InterfaceGrid& g, double scale) {
  StructureState s = rest_structure(g);
  s.eta = random_clamped(g, scale);
  s.v = random_clamped(g, scale);
  return s;
}

}  // namespace

TEST_SUITE("shell") {
  TEST_CASE("bending energy of z^2 (1-z)^2 tends to 4/5") {
    double prev = 1.0;
    for (int n : {8, 16, 32, 64}) {
      const InterfaceGrid g = grid_of(n);
      const ShellOperator op(g, StructureParams{});
      const Eigen::VectorXd eta = hermite_interpolant(
          g, [](double z) { return Vec2(0, z * z * (1 - z) * (1 - z)); },
          [](double z) { return Vec2(0, 2 * z * (1 - z) * (1 - 2 * z)); });
      const double err = std::abs(op.energy_norm2(eta) - 0.8);
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 1e-4);
  }

  TEST_CASE("cubic fields are integrated exactly") {
    const InterfaceGrid g = grid_of(5);
    StructureParams p;
    p.bending_r = 3.0;
    const ShellOperator op(g, p);
    // f = z^2 (1-z): f'' = 2 - 6z, int (f'')^2 = 4
    const Eigen::VectorXd eta = hermite_interpolant(
        g, [](double z) { return Vec2(0, z * z * (1 - z)); }, [](double z) { return Vec2(0, 2 * z - 3 * z * z); });
    CHECK(op.energy_norm2(eta) == doctest::Approx(3.0 * 4.0).epsilon(1e-12));
    // int (z^2 (1-z))^2 = 1/105
    CHECK(op.mass_norm2(eta) == doctest::Approx(1.0 / 105.0).epsilon(1e-12));
  }

  TEST_CASE("zero field and symmetry") {
    const InterfaceGrid g = grid_of(6);
    const ShellOperator op(g, StructureParams{});
    CHECK(op.energy_norm2(Eigen::VectorXd::Zero(static_cast<long>(hermite_size(g)))) == 0.0);
    CHECK((op.mass() - op.mass().transpose()).norm() <= 1e-14 * op.mass().norm());
    CHECK((op.stiffness() - op.stiffness().transpose()).norm() <= 1e-14 * op.stiffness().norm());
  }

  TEST_CASE("coercivity constant") {
    const InterfaceGrid g = grid_of(6);
    StructureParams p;
    p.bending_z = 2.0;
    p.bending_r = 5.0;
    CHECK(ShellOperator(g, p).coercivity_constant() == doctest::Approx(2.0).epsilon(1e-10));
  }

  TEST_CASE("singular operators are refused") {
    const InterfaceGrid g = grid_of(4);
    StructureParams p;
    p.bending_r = 0.0;
    CHECK_THROWS_AS(ShellOperator(g, p), SingularOperator);
    CHECK_NOTHROW(ShellOperator(g, p, true));
    p = StructureParams{};
    p.thickness = 0.0;
    CHECK_THROWS_AS(ShellOperator(g, p), SingularOperator);
  }

  TEST_CASE("rest state stays at rest") {
    const InterfaceGrid g = grid_of(4);
    const ShellOperator op(g, StructureParams{});
    const StructureState s = structure_step(rest_structure(g), 0.1, op);
    CHECK(s.eta.norm() == 0.0);
    CHECK(s.v_star.norm() == 0.0);
    CHECK_THROWS_AS(structure_step(rest_structure(g), 0.0, op), SolverFailure);
  }

  TEST_CASE("free drift without bending") {
    const InterfaceGrid g = grid_of(6);
    StructureParams p;
    p.bending_z = p.bending_r = 0.0;
    const ShellOperator op(g, p, true);
    const StructureState s0 = random_state(g, 0.1);
    const double dt = 0.3;
    const StructureState s1 = structure_step(s0, dt, op);
    CHECK((s1.v_star - s0.v).norm() <= 1e-13);
    CHECK((s1.eta - (s0.eta + dt * s0.v)).norm() <= 1e-13);
    CHECK((s1.v - s0.v).norm() == 0.0);
  }

  TEST_CASE("step against a dense full-pivot solve") {
    const InterfaceGrid g = grid_of(7);
    StructureParams p;
    p.rho_s = 2.0;
    p.thickness = 0.05;
    p.bending_z = 0.7;
    p.bending_r = 1.3;
    const ShellOperator op(g, p);
    const StructureState s0 = random_state(g, 0.05);
    Eigen::VectorXd load = random_vector(static_cast<long>(hermite_size(g)));
    const double dt = 0.02;
    const StructureState s1 = structure_step(s0, dt, op, load);

    const auto& free = op.free_dofs();
    const auto nf = static_cast<long>(free.size());
    Eigen::MatrixXd a(nf, nf);
    Eigen::VectorXd b(nf);
    for (long i = 0; i < nf; ++i) {
      double acc = dt * load[free[i]];
      for (long j = 0; j < op.mass().cols(); ++j)
        acc += p.inertia() * op.mass()(free[i], j) * s0.v[j] - dt * op.stiffness()(free[i], j) * s0.eta[j];
      b[i] = acc;
      for (long j = 0; j < nf; ++j)
        a(i, j) = p.inertia() * op.mass()(free[i], free[j]) + dt * dt * op.stiffness()(free[i], free[j]);
    }
    const Eigen::VectorXd x = a.fullPivLu().solve(b);
    for (long i = 0; i < nf; ++i) CHECK(std::abs(s1.v_star[free[i]] - x[i]) <= 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff()));
  }

  TEST_CASE("energies") {
    const InterfaceGrid g = grid_of(5);
    const ShellOperator op(g, StructureParams{});
    StructureState s = random_state(g, 0.1);
    s.v_star = random_clamped(g, 0.1);
    const StructureEnergy e = structure_energy(s, Velocity::V, op);
    CHECK(e.kinetic == doctest::Approx(0.5 * 0.1 * s.v.dot(op.mass() * s.v)));
    CHECK(e.elastic == doctest::Approx(0.5 * s.eta.dot(op.stiffness() * s.eta)));
    CHECK(structure_energy(s, Velocity::VStar, op).kinetic ==
          doctest::Approx(0.5 * 0.1 * s.v_star.dot(op.mass() * s.v_star)));
    StructureState t = s;
    t.eta *= 3.0;
    t.v *= 3.0;
    const StructureEnergy e3 = structure_energy(t, Velocity::V, op);
    CHECK(e3.total() == doctest::Approx(9.0 * e.total()).epsilon(1e-12));
    CHECK(e.kinetic >= 0.0);
    CHECK(e.elastic >= 0.0);
  }

  TEST_CASE("energy identity holds and detects corruption") {
    const InterfaceGrid g = grid_of(8);
    const ShellOperator op(g, StructureParams{});
    for (double dt : {1e-1, 1e-3, 1e-6}) {
      const StructureState s0 = random_state(g, 0.1);
      const StructureState s1 = structure_step(s0, dt, op);
      CHECK(verify_structure_identity(s0, s1, dt, op) <= 1e-10);
      StructureState bad = s1;
      bad.eta[static_cast<long>(hermite_dof(g, 1, 3, 0))] += 1e-3;
      CHECK(verify_structure_identity(s0, bad, dt, op) > 1e-8);
    }
  }

  TEST_CASE("clamped entries stay zero") {
    const InterfaceGrid g = grid_of(6);
    const ShellOperator op(g, StructureParams{});
    StructureState s = random_state(g, 0.1);
    const Eigen::VectorXd load = random_vector(static_cast<long>(hermite_size(g)));
    for (int k = 0; k < 5; ++k) {
      s = structure_step(s, 0.01, op, load);
      s.v = s.v_star;
    }
    for (int c = 0; c < 2; ++c)
      for (std::size_t node : {std::size_t{0}, g.n_nodes() - 1})
        for (int d = 0; d < 2; ++d) {
          CHECK(s.eta[static_cast<long>(hermite_dof(g, c, node, d))] == 0.0);
          CHECK(s.v_star[static_cast<long>(hermite_dof(g, c, node, d))] == 0.0);
        }
  }

  TEST_CASE("numerical dissipation is bounded by the initial energy") {
    const InterfaceGrid g = grid_of(8);
    const ShellOperator op(g, StructureParams{});
    StructureState s = random_state(g, 0.1);
    const double rh = op.params().inertia();
    const double e0 = structure_energy(s, Velocity::V, op).total();
    double sum = 0.0;
    const double dt = 0.05;
    for (int k = 0; k < 200; ++k) {
      const StructureState next = structure_step(s, dt, op);
      sum += 0.5 * rh * op.mass_norm2(next.v_star - s.v) + 0.5 * op.energy_norm2(next.eta - s.eta);
      s = next;
      s.v = s.v_star;
    }
    const double e_n = structure_energy(s, Velocity::V, op).total();
    CHECK(sum <= e0 + 1e-12);
    CHECK(e_n + sum == doctest::Approx(e0).epsilon(1e-9));
  }
}
