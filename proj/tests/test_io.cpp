#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "fsi/config.hpp"
#include "fsi/errors.hpp"
#include "fsi/output.hpp"
#include "support.hpp"

using namespace fsi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fsi_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class F>
std::string render(F&& f) {
  std::ostringstream os;
  f(os);
  return os.str();
}

void expect_parse_error(const std::string& text, std::size_t line, const std::string& key) {
  try {
    parse_config_string(text);
    FAIL("expected ParseError for: " << text);
  } catch (const ParseError& e) {
    CHECK(e.line() == line);
    CHECK(e.key() == key);
  }
}

const char* kSmall = R"(# small
[domain]
nx = 4
ny = 4
[structure]
eta0_r = 0.01
[time]
dt = 0.01
t_end = 0.03
)";

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FSI_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("empty file gives the defaults") { CHECK(config_equal(parse_config_string(""), SimConfig{})); }

  TEST_CASE("negative time step") {
    try {
      parse_config_string("[time]\ndt = -0.1\n");
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(e.key() == "time.dt");
      CHECK(e.constraint() == "positivity");
    }
  }

  TEST_CASE("round trip") {
    SimConfig c;
    c.polygon = {Vec2(0, 0), Vec2(0.6, 0), Vec2(2, 0), Vec2(2, 1), Vec2(0, 1), Vec2(0, 0.4)};
    c.faces = {FaceTag::RigidSlip, FaceTag::NoSlip, FaceTag::DynamicPressure, FaceTag::Elastic,
               FaceTag::DynamicPressure, FaceTag::Symmetry};
    c.resolution = {7, 5};
    c.mode = StructureMode::Fixed;
    c.structure.rho_s = 1.0 / 3.0;
    c.structure.bending_z = 0.1;
    c.eta0_r = 0.012345678901234567;
    c.v0_z = -1e-7;
    c.fluid.mu = 0.035;
    c.fluid.alpha = 2.5;
    c.fluid.alpha_face[0] = 0.75;
    c.fluid.jacobian = JacobianVariant::Old;
    c.u0 = "linear:0,0,0,0";
    c.pressure[2] = PressureProfile::sine(0.1, 2 * M_PI, 0.0, 0.05);
    c.pressure[4] = PressureProfile::pulse(1.0, 0.003);
    c.dt = 1.0 / 7.0;
    c.t_end = 2.0;
    c.c_omega = 0.3;
    c.j_floor = 1e-4;
    c.dump_fields = true;
    c.dump_every = 5;
    const std::string text = emit_config(c);
    const SimConfig back = parse_config_string(text);
    CHECK(config_equal(back, c));
    CHECK(emit_config(back) == text);
    SimConfig other = c;
    other.dt *= 1.0 + 1e-15;
    CHECK_FALSE(config_equal(other, c));
  }

  TEST_CASE("strict parsing reports the line and key") {
    expect_parse_error("[fluid]\n\nfoo = 1\n", 3, "fluid.foo");
    expect_parse_error("[time]\ndt = 0.1\ndt = 0.2\n", 3, "time.dt");
    expect_parse_error("# x\n[weather]\n", 2, "weather");
    expect_parse_error("dt = 0.1\n", 1, "dt");
    expect_parse_error("[time]\ndt =\n", 2, "time.dt");
    expect_parse_error("[time]\n\n\ndt = fast\n", 4, "time.dt");
    expect_parse_error("[domain]\nnx = 3.5\n", 2, "domain.nx");
    try {
      parse_config_file("/nonexistent/fsi.cfg");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 0);
    }
  }

  TEST_CASE("semantic checks") {
    CHECK_THROWS_AS(parse_config_string("[domain]\nnx = 1\n"), ValidationError);
    CHECK_THROWS_AS(parse_config_string("[boundary]\npressure.0 = 1\n"), ValidationError);
    CHECK_THROWS_AS(parse_config_string("[fluid]\nu0 = swirl\n"), ValidationError);
    CHECK_THROWS_AS(parse_config_string("[output]\ndump_every = 0\n"), ValidationError);
    CHECK_NOTHROW(parse_config_string("[time]\nt_end = 0\n"));
  }

  TEST_CASE("bundled configurations parse") {
    for (const char* name : {"benchmark.cfg", "degenerate.cfg", "poiseuille.cfg"})
      CHECK_NOTHROW(parse_config_file(std::string(FSI_SOURCE_DIR) + "/configs/" + name));
  }

  TEST_CASE("full-precision doubles") {
    for (int k = 0; k < 200; ++k) {
      const double x = std::ldexp(testing::uniform(), static_cast<int>(testing::uniform(-60, 60)));
      CHECK(std::stod(format_double(x)) == x);
    }
  }

  TEST_CASE("ledger csv and summary") {
    const RunResult r = run(parse_config_string(kSmall));
    const std::string csv = render([&](std::ostream& o) { write_ledger_csv(o, r.ledger); });
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == kLedgerHeader);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      CHECK(std::count(line.begin(), line.end(), ',') == 11);
    }
    CHECK(rows == 4);

    const auto j = nlohmann::json::parse(render([&](std::ostream& o) { write_summary_json(o, r); }));
    CHECK(j["stop_reason"] == "Completed");
    CHECK(j["steps_recorded"] == 3);
    CHECK(j["failed"] == false);
    CHECK(j["E0"].get<double>() == r.summary.e0);
    CHECK(j["telescoped_sums"].contains("v_star"));
  }

  TEST_CASE("repeated runs produce byte-identical ledgers") {
    const SimConfig c = parse_config_string(kSmall);
    const std::string a = render([&](std::ostream& o) { write_ledger_csv(o, run(c).ledger); });
    const std::string b = render([&](std::ostream& o) { write_ledger_csv(o, run(c).ledger); });
    CHECK(a == b);
  }

  TEST_CASE("diagnostic tables") {
    RefinementTable t;
    t.rows.push_back({0.1, 0.05, 1.5, 0.25});
    CHECK(render([&](std::ostream& o) { write_refinement_csv(o, t); }) == "dt,diff_u,diff_eta\n0.10000000000000001,1.5,0.25\n");
    ShiftReport r;
    r.field = ShiftField::EtaTilde;
    r.h = {0.5};
    r.value = {2.0};
    CHECK(render([&](std::ostream& o) { write_shifts_csv(o, {r}); }) == "field,h,value\neta_tilde,0.5,2\n");
    CHECK(render([&](std::ostream& o) { write_shift_fits_csv(o, {r}); }) == "field,C,beta\n");
  }

  TEST_CASE("vtk field dump") {
    Simulation sim(parse_config_string(kSmall));
    REQUIRE(sim.initialize());
    sim.step();
    const std::string s = render([&](std::ostream& o) { write_vtk_fields(o, sim); });
    CHECK(s.find("POINT_DATA 25") != std::string::npos);
    CHECK(s.find("VECTORS B double") != std::string::npos);
    CHECK(s.find("CELL_DATA 16") != std::string::npos);
  }

  TEST_CASE("manifest checksums") {
    const fs::path dir = scratch("manifest");
    Manifest m(dir, "test", "[time]\n");
    m.emit("sub/abc.txt", [](std::ostream& o) { o << "abc"; });
    CHECK(sha256_file(dir / "sub/abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const auto j = nlohmann::json::parse(slurp(m.finish()));
    CHECK(j["command"] == "test");
    REQUIRE(j["outputs"].size() == 1);
    CHECK(j["outputs"][0]["path"] == "sub/abc.txt");
    CHECK(j["outputs"][0]["sha256"] == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK_THROWS(sha256_file(dir / "missing"));
  }
}

TEST_SUITE("cli") {
  TEST_CASE("exit codes") {
    const fs::path dir = scratch("cli");
    const fs::path cfg = dir / "small.cfg";
    std::ofstream(cfg) << kSmall;
    const fs::path bad = dir / "bad.cfg";
    std::ofstream(bad) << "[time]\ndt = -1\n";
    const fs::path unknown = dir / "unknown.cfg";
    std::ofstream(unknown) << "[time]\nstep = 1\n";
    const std::string configs = std::string(FSI_SOURCE_DIR) + "/configs/";

    CHECK(run_cli("validate-config --config " + cfg.string()) == 0);
    CHECK(run_cli("run --config " + cfg.string() + " --out " + (dir / "out").string() + " --dump-fields") == 0);
    for (const char* f : {"energy_ledger.csv", "run_summary.json", "manifest.json", "fields/step_000003.vtk"})
      CHECK(fs::exists(dir / "out" / f));
    CHECK(run_cli("run --config " + configs + "degenerate.cfg --out " + (dir / "deg").string()) == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "deg" / "run_summary.json"));
    CHECK(j["stop_reason"] == "DomainDegenerate");
    CHECK(j["stop_step"] == 0);

    CHECK(run_cli("run") == 1);
    CHECK(run_cli("frobnicate --config " + cfg.string()) == 1);
    CHECK(run_cli("shifts --config " + cfg.string() + " --h-list 0.01,x --out " + (dir / "s").string()) == 1);
    CHECK(run_cli("run --config " + bad.string()) == 2);
    CHECK(run_cli("validate-config --config " + unknown.string()) == 2);
    CHECK(run_cli("validate-config --config " + (dir / "nope.cfg").string()) == 2);
    CHECK(run_cli("refine --config " + cfg.string() + " --dt-list 0.01,0.02 --out " + (dir / "r").string()) == 2);
  }
}
