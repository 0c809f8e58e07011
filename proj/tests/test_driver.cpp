#include <doctest.h>

#include <cmath>

#include "fsi/driver.hpp"
#include "fsi/errors.hpp"

using namespace fsi;

namespace {

SimConfig small(int n = 8) {
  SimConfig c;
  c.resolution = {n, n};
  c.dt = 0.01;
  c.t_end = 0.1;
  return c;
}

std::size_t stop_or_end(const RunResult& r, const SimConfig& c) {
  return r.trajectory.stop_reason == StopReason::Completed ? c.n_steps() + 1 : r.trajectory.stop_step;
}

}  // namespace

TEST_SUITE("driver") {
  TEST_CASE("rest initial data") {
    const RunResult r = run(small());
    CHECK(r.ledger.e0() == 0.0);
    CHECK(r.trajectory.stop_reason == StopReason::Completed);
    CHECK_FALSE(r.ledger.failed);
    REQUIRE(r.ledger.rows.size() == 11);
    for (const auto& row : r.ledger.rows) {
      CHECK(row.e_full == 0.0);
      CHECK(row.d == 0.0);
      CHECK(row.j_min == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(r.trajectory.states.size() == 11);
    CHECK(r.trajectory.states.back().u.norm() <= 1e-14);
  }

  TEST_CASE("initial energy of a sin^2 profile") {
    // 1/2 int (f'')^2 with f = a sin^2(pi z): pi^4 a^2
    SimConfig c = small(16);
    c.eta0_r = 0.02;
    c.t_end = 0.0;
    const RunResult r = run(c);
    CHECK(r.ledger.e0() == doctest::Approx(std::pow(M_PI, 4) * 4e-4).epsilon(1e-3));
    CHECK(r.trajectory.stop_reason == StopReason::Completed);
    CHECK(r.ledger.rows.size() == 1);
    CHECK(r.trajectory.states.size() == 1);
  }

  TEST_CASE("incompatible initial velocity") {
    SimConfig c = small();
    c.u0 = "linear:1,0,0,0";
    Simulation sim(c);
    try {
      sim.initialize();
      FAIL("expected IncompatibleInitialData");
    } catch (const IncompatibleInitialData& e) {
      CHECK(e.reason() == "divergence");
    }
  }

  TEST_CASE("energy decays without forcing") {
    SimConfig c = small();
    c.eta0_r = 0.02;
    c.fluid.rho_f = 10.0;
    c.t_end = 0.2;
    const RunResult r = run(c);
    CHECK(r.trajectory.stop_reason == StopReason::Completed);
    CHECK_FALSE(r.ledger.failed);
    for (std::size_t k = 1; k < r.ledger.rows.size(); ++k) {
      const auto& row = r.ledger.rows[k];
      CHECK(row.e_half <= r.ledger.rows[k - 1].e_full + 1e-10);
      CHECK(row.fluid_margin >= -1e-10);
      CHECK(row.d >= 0.0);
      CHECK(row.gcl_res <= 1e-12);
      CHECK(row.struct_res <= 1e-10);
    }
    CHECK(r.summary.e_final < r.summary.e0);
    const double bound = 2.0 * r.summary.e0 + 1e-9;
    CHECK(r.ledger.sums.fluid <= bound);
    CHECK(r.ledger.sums.structure <= bound);
    CHECK(r.ledger.sums.eta <= bound);
    CHECK(r.ledger.sums.vstar <= bound);
  }

  TEST_CASE("huge displacement stops at step zero") {
    SimConfig c = small();
    c.eta0_r = -1.5;
    const RunResult r = run(c);
    CHECK(r.trajectory.stop_reason == StopReason::DomainDegenerate);
    CHECK(r.trajectory.stop_step == 0);
    REQUIRE(r.ledger.rows.size() == 1);
    CHECK((r.ledger.rows[0].j_min <= c.j_floor || r.ledger.rows[0].inj_margin <= 0.0));
  }

  TEST_CASE("deterministic ledger") {
    SimConfig c = small();
    c.eta0_r = 0.01;
    const RunResult a = run(c);
    const RunResult b = run(c);
    REQUIRE(a.ledger.rows.size() == b.ledger.rows.size());
    for (std::size_t k = 0; k < a.ledger.rows.size(); ++k) {
      CHECK(a.ledger.rows[k].e_full == b.ledger.rows[k].e_full);
      CHECK(a.ledger.rows[k].d == b.ledger.rows[k].d);
      CHECK(a.ledger.rows[k].j_min == b.ledger.rows[k].j_min);
    }
    CHECK(a.trajectory.states.back().u == b.trajectory.states.back().u);
  }

  TEST_CASE("smaller guard never stops later") {
    SimConfig c = small();
    c.eta0_r = 0.02;
    c.t_end = 0.05;
    std::size_t prev = c.n_steps() + 1;
    for (double co : {0.8, 0.4, 0.2, 0.1, 0.05}) {
      c.c_omega = co;
      const std::size_t s = stop_or_end(run(c), c);
      CHECK(s <= prev);
      prev = s;
    }
    CHECK(prev == 0);
  }

  TEST_CASE("pressure forcing keeps the energy bounded") {
    SimConfig c = small();
    c.pressure[1] = PressureProfile::sine(0.05, 20.0, 0.0, 0.0);
    c.t_end = 0.3;
    const RunResult r = run(c);
    CHECK(r.trajectory.stop_reason == StopReason::Completed);
    CHECK(r.ledger.r_l2_norm2 > 0.0);
    CHECK(std::isfinite(r.summary.empirical_c));
    CHECK(r.summary.e_max <= r.summary.e0 + r.summary.empirical_c * r.ledger.r_l2_norm2 + 1e-12);
    for (const auto& row : r.ledger.rows) {
      CHECK(row.gcl_res <= 1e-12);
      CHECK(row.div_res <= 1e-9);
      CHECK(row.normal_res <= 1e-9);
    }
  }

  TEST_CASE("step observer and trajectory bookkeeping") {
    SimConfig c = small();
    c.eta0_r = 0.01;
    Simulation sim(c);
    std::vector<std::size_t> seen;
    sim.on_step = [&](const Simulation& s) { seen.push_back(s.current_step()); };
    REQUIRE(sim.initialize());
    while (sim.step()) {
    }
    REQUIRE(seen.size() == 11);
    for (std::size_t k = 0; k < seen.size(); ++k) CHECK(seen[k] == k);
    CHECK(sim.trajectory().states.size() == 11);
    CHECK_FALSE(sim.step());
  }

  TEST_CASE("configuration validation") {
    SimConfig c = small();
    c.dt = -0.1;
    CHECK_THROWS_AS(Simulation{c}, ValidationError);
  }
}
