#include <doctest.h>

#include <cmath>

#include "fsi/diagnostics.hpp"
#include "fsi/errors.hpp"
#include "support.hpp"

using namespace fsi;
using namespace fsi::testing;

namespace {

struct Setup {
  DiscretizationPtr sp = unit_square(4);
  ShellOperator shell{sp->grid(), StructureParams{}};
  FieldNorms norms{*sp, shell};
  long nu = static_cast<long>(sp->n_velocity_dofs());
  long ns = static_cast<long>(hermite_size(sp->grid()));

  Snapshot random_snapshot(double scale = 1.0) const {
    return {random_vector(nu, scale), random_clamped(sp->grid(), scale), random_clamped(sp->grid(), scale),
            random_clamped(sp->grid(), scale)};
  }
  Trajectory random_trajectory(std::size_t n, double dt) const {
    Trajectory t;
    t.dt = dt;
    for (std::size_t k = 0; k <= n; ++k) t.states.push_back(random_snapshot());
    return t;
  }
};

const Eigen::VectorXd& pick(const Snapshot& s, ShiftField f) {
  switch (f) {
    case ShiftField::U: return s.u;
    case ShiftField::V: return s.v;
    case ShiftField::VStar: return s.v_star;
    default: return s.eta;
  }
}

double norm2(const Setup& st, ShiftField f, const Eigen::VectorXd& x) {
  switch (f) {
    case ShiftField::U: return x.dot(st.norms.velocity * x);
    case ShiftField::V:
    case ShiftField::VStar: return x.dot(st.norms.interface_mass * x);
    default: return x.dot(st.norms.stiffness * x);
  }
}

// Piecewise constant (f^n on ((n-1) dt, n dt]) or piecewise linear for eta
// tilde, evaluated directly.
Eigen::VectorXd eval(const Trajectory& t, ShiftField f, double time) {
  const double x = time / t.dt;
  if (f == ShiftField::EtaTilde) {
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::floor(x)), t.states.size() - 2);
    const double s = x - static_cast<double>(n);
    return (1 - s) * t.states[n].eta + s * t.states[n + 1].eta;
  }
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(x)));
  return pick(t.states[std::min(n, t.states.size() - 1)], f);
}

// Pieces of length dt / m; exact for these approximants when h is a
// multiple of dt / m (midpoint for the step functions, Simpson for eta
// tilde).
double brute_force(const Setup& st, const Trajectory& t, ShiftField f, double h, int m) {
  const auto pieces = static_cast<long>(std::llround((static_cast<double>(t.states.size() - 1) * t.dt - h) * m / t.dt));
  const double len = t.dt / m;
  auto g = [&](double x) { return norm2(st, f, eval(t, f, x) - eval(t, f, x - h)); };
  double acc = 0.0;
  for (long k = 0; k < pieces; ++k) {
    const double a = h + static_cast<double>(k) * len;
    const double b = a + len;
    if (f == ShiftField::EtaTilde)
      acc += len / 6.0 * (g(a) + 4.0 * g(0.5 * (a + b)) + g(b));
    else
      acc += len * g(0.5 * (a + b));
  }
  return std::sqrt(acc);
}

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("constant trajectory has zero shift") {
    Setup st;
    Trajectory t;
    t.dt = 0.1;
    const Snapshot s = st.random_snapshot();
    for (int k = 0; k <= 10; ++k) t.states.push_back(s);
    for (auto f : {ShiftField::U, ShiftField::V, ShiftField::VStar, ShiftField::Eta, ShiftField::EtaTilde})
      for (double h : {0.05, 0.1, 0.35, 0.9}) CHECK(time_shift_norm(t, f, h, st.norms) == 0.0);
  }

  TEST_CASE("argument checks") {
    Setup st;
    const Trajectory t = st.random_trajectory(5, 0.1);
    CHECK(time_shift_norm(t, ShiftField::U, 0.0, st.norms) == 0.0);
    CHECK_THROWS_AS(time_shift_norm(t, ShiftField::U, -0.1, st.norms), std::invalid_argument);
    CHECK_THROWS_AS(time_shift_norm(t, ShiftField::U, 0.5, st.norms), ShiftTooLarge);
    CHECK_THROWS_AS(time_shift_norm(t, ShiftField::U, 0.7, st.norms), ShiftTooLarge);
    Trajectory one;
    one.dt = 0.1;
    one.states.push_back(st.random_snapshot());
    CHECK_THROWS_AS(time_shift_norm(one, ShiftField::U, 0.05, st.norms), ShiftTooLarge);
  }

  TEST_CASE("field names") {
    for (auto f : {ShiftField::U, ShiftField::V, ShiftField::VStar, ShiftField::Eta, ShiftField::EtaTilde})
      CHECK(shift_field_from_string(to_string(f)) == f);
    CHECK_THROWS(shift_field_from_string("w"));
  }

  TEST_CASE("integer shifts reduce to a sum of differences") {
    Setup st;
    const double dt = 0.05;
    const Trajectory t = st.random_trajectory(12, dt);
    for (auto f : {ShiftField::U, ShiftField::V, ShiftField::VStar, ShiftField::Eta}) {
      for (std::size_t k : {1u, 2u, 5u}) {
        double acc = 0.0;
        for (std::size_t n = k + 1; n < t.states.size(); ++n)
          acc += dt * norm2(st, f, pick(t.states[n], f) - pick(t.states[n - k], f));
        CHECK(time_shift_norm(t, f, static_cast<double>(k) * dt, st.norms) ==
              doctest::Approx(std::sqrt(acc)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("fractional shifts against brute-force quadrature") {
    Setup st;
    const double dt = 0.1;
    const Trajectory t = st.random_trajectory(9, dt);
    for (auto f : {ShiftField::U, ShiftField::V, ShiftField::VStar, ShiftField::Eta, ShiftField::EtaTilde})
      for (double frac : {0.25, 0.5, 1.75, 3.5}) {
        const double h = frac * dt;
        CHECK(time_shift_norm(t, f, h, st.norms) == doctest::Approx(brute_force(st, t, f, h, 4)).epsilon(1e-10));
      }
  }

  TEST_CASE("single jump: value grows like sqrt(h) below dt") {
    Setup st;
    Trajectory t;
    t.dt = 0.1;
    const Snapshot zero{Eigen::VectorXd::Zero(st.nu), Eigen::VectorXd::Zero(st.ns), Eigen::VectorXd::Zero(st.ns),
                        Eigen::VectorXd::Zero(st.ns)};
    const Snapshot a = st.random_snapshot();
    for (int k = 0; k <= 4; ++k) t.states.push_back(zero);
    for (int k = 0; k < 5; ++k) t.states.push_back(a);
    const double jump = std::sqrt(norm2(st, ShiftField::U, a.u));
    for (double h : {0.01, 0.02, 0.04, 0.08})
      CHECK(time_shift_norm(t, ShiftField::U, h, st.norms) == doctest::Approx(std::sqrt(h) * jump).epsilon(1e-12));
  }

  TEST_CASE("triangle inequality") {
    Setup st;
    const Trajectory a = st.random_trajectory(8, 0.1);
    const Trajectory b = st.random_trajectory(8, 0.1);
    Trajectory s = a;
    for (std::size_t k = 0; k < s.states.size(); ++k) {
      s.states[k].u += b.states[k].u;
      s.states[k].v += b.states[k].v;
      s.states[k].v_star += b.states[k].v_star;
      s.states[k].eta += b.states[k].eta;
    }
    for (auto f : {ShiftField::U, ShiftField::V, ShiftField::VStar, ShiftField::Eta, ShiftField::EtaTilde})
      for (double h : {0.03, 0.1, 0.25}) {
        const double lhs = time_shift_norm(s, f, h, st.norms);
        CHECK(lhs <= time_shift_norm(a, f, h, st.norms) + time_shift_norm(b, f, h, st.norms) + 1e-12);
      }
  }

  TEST_CASE("power-law fit") {
    const std::vector<double> h{0.01, 0.02, 0.04, 0.08, 0.16};
    std::vector<double> v;
    for (double x : h) v.push_back(3.0 * std::sqrt(x));
    const PowerFit f = sqrt_fit(h, v);
    CHECK(f.c == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(f.beta == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(sqrt_fit(h, std::vector<double>(5, 0.0)), DegenerateFit);
    CHECK_THROWS_AS(sqrt_fit({0.1, 0.2, 0.3}, {1, 2, 3}), std::invalid_argument);
    std::vector<double> w = v;
    w[2] = 0.0;
    CHECK_THROWS_AS(sqrt_fit(h, w), DegenerateFit);
  }

  TEST_CASE("shift report keeps values when the fit fails") {
    Setup st;
    Trajectory t;
    t.dt = 0.1;
    const Snapshot s = st.random_snapshot();
    for (int k = 0; k <= 10; ++k) t.states.push_back(s);
    const ShiftReport r = shift_report(t, ShiftField::U, {0.1, 0.2, 0.3, 0.4}, st.norms);
    CHECK_FALSE(r.fitted);
    CHECK(r.value.size() == 4);
  }

  TEST_CASE("interpolant view on a simulated trajectory") {
    SimConfig c;
    c.resolution = {6, 6};
    c.eta0_r = 0.02;
    c.dt = 0.01;
    c.t_end = 0.08;
    const RunResult r = run(c);
    REQUIRE(r.trajectory.states.size() == 9);
    const InterpolantView view(r.trajectory);
    CHECK(view.duration() == doctest::Approx(0.08));
    CHECK(view.n_steps() == 8);
    for (std::size_t n = 0; n <= 8; ++n)
      CHECK((view.eta_tilde(static_cast<double>(n) * c.dt) - r.trajectory.states[n].eta).norm() <= 1e-15);
    for (std::size_t n = 1; n <= 8; ++n) {
      const double t = (static_cast<double>(n) - 0.5) * c.dt;
      const Eigen::VectorXd& vs = r.trajectory.states[n].v_star;
      CHECK((view.eta_tilde_dt(t) - vs).norm() <= 1e-10 * std::max(1.0, vs.norm()));
      CHECK(&view.v_star(t) == &r.trajectory.states[n].v_star);
      const Eigen::VectorXd mid =
          0.5 * (r.trajectory.states[n - 1].eta + r.trajectory.states[n].eta);
      CHECK((view.eta_tilde(t) - mid).norm() <= 1e-15);
    }
    Trajectory one;
    one.dt = 0.1;
    one.states.resize(1);
    CHECK_THROWS_AS(InterpolantView{one}, std::invalid_argument);
  }

  TEST_CASE("refinement study") {
    SimConfig c;
    c.resolution = {4, 4};
    c.eta0_r = 0.02;
    c.dt = 0.02;
    c.t_end = 0.08;
    CHECK(refinement_study(c, {0.02}).rows.empty());
    CHECK_THROWS_AS(refinement_study(c, {0.01, 0.02}), ValidationError);
    CHECK_THROWS_AS(refinement_study(c, {0.02, -0.01}), ValidationError);

    const RefinementTable table = refinement_study(c, {0.02, 0.01});
    REQUIRE(table.rows.size() == 1);
    const RefinementRow& row = table.rows[0];

    // independent oracle from two full trajectories
    SimConfig a = c;
    SimConfig b = c;
    b.dt = 0.01;
    const RunResult ra = run(a);
    const RunResult rb = run(b);
    Simulation sim(c);
    const FieldNorms norms(*sim.space(), sim.shell());
    double du = 0.0;
    double de = 0.0;
    for (std::size_t n = 1; n < rb.trajectory.states.size(); ++n) {
      const std::size_t m = (n + 1) / 2;
      const Eigen::VectorXd e = rb.trajectory.states[n].u - ra.trajectory.states[m].u;
      du += 0.01 * e.dot(norms.velocity * e);
      const Eigen::VectorXd g = rb.trajectory.states[n].eta - ra.trajectory.states[m].eta;
      de = std::max(de, std::sqrt(g.dot(norms.interface_mass * g)));
    }
    CHECK(row.dt_coarse == 0.02);
    CHECK(row.dt_fine == 0.01);
    CHECK(row.diff_u == doctest::Approx(std::sqrt(du)).epsilon(1e-10));
    CHECK(row.diff_eta == doctest::Approx(de).epsilon(1e-10));
  }

  TEST_CASE("manufactured solution converges at first order in time") {
    MmsOptions m;
    m.resolution = {6, 6};
    const auto rows = mms_study(m, {0.1, 0.05, 0.025});
    REQUIRE(rows.size() == 3);
    for (std::size_t k = 1; k < rows.size(); ++k) {
      CHECK(rows[k].error_final < rows[k - 1].error_final);
      CHECK(rows[k - 1].error_final / rows[k].error_final == doctest::Approx(2.0).epsilon(0.2));
      CHECK(rows[k].order_final == doctest::Approx(1.0).epsilon(0.2));
    }
    const SimConfig c = mms_config(m);
    CHECK(c.mode == StructureMode::Fixed);
    CHECK(c.pressure.empty());
    CHECK(static_cast<bool>(c.body));
    CHECK(static_cast<bool>(c.u0_field));
  }
}
