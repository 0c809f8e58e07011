// fsi: command-line front end.
//
//   fsi run             --config PATH [--out DIR] [--dump-fields]
//   fsi shifts          --config PATH [--out DIR] [--h-list a,b,c] [--fields u,v,...]
//   fsi refine          --config PATH [--out DIR] [--dt-list a,b,c]
//   fsi mms             --config PATH [--out DIR] [--dt-list a,b,c]
//   fsi validate-config --config PATH
//
// Exit codes: 0 success, 1 usage, 2 validation, 3 runtime failure,
// 4 run FAILED (a verification check was breached).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fsi/config.hpp"
#include "fsi/diagnostics.hpp"
#include "fsi/errors.hpp"
#include "fsi/output.hpp"

namespace {

constexpr int kUsage = 1;
constexpr int kValidation = 2;
constexpr int kRuntime = 3;
constexpr int kFailed = 4;

constexpr double kMinShiftExponent = 0.45;
constexpr double kMinMmsOrder = 0.8;

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError(what, "not a comma-separated list of numbers");
    }
  }
  return out;
}

struct Options {
  std::string config;
  std::string out = ".";
  bool dump_fields = false;
  std::string h_list;
  std::string dt_list;
  std::string fields = "u,v,v_star,eta,eta_tilde";
};

int cmd_run(const Options& o, fsi::SimConfig cfg) {
  if (o.dump_fields) cfg.dump_fields = true;
  fsi::Manifest manifest(o.out, "run", fsi::emit_config(cfg));
  fsi::Simulation sim(cfg);
  if (cfg.dump_fields) {
    sim.on_step = [&](const fsi::Simulation& s) {
      if (s.current_step() % cfg.dump_every != 0) return;
      char name[64];
      std::snprintf(name, sizeof name, "fields/step_%06zu.vtk", s.current_step());
      manifest.emit(name, [&](std::ostream& out) { fsi::write_vtk_fields(out, s); });
    };
  }
  if (sim.initialize())
    while (sim.step()) {
    }
  fsi::RunResult result;
  result.ledger = sim.ledger();
  result.trajectory = sim.trajectory();
  result.summary = sim.summary();
  manifest.emit("energy_ledger.csv", [&](std::ostream& out) { fsi::write_ledger_csv(out, result.ledger); });
  manifest.emit("run_summary.json", [&](std::ostream& out) { fsi::write_summary_json(out, result); });
  manifest.finish();

  const auto& t = result.trajectory;
  std::cerr << "stop_reason " << fsi::to_string(t.stop_reason) << " at step " << t.stop_step;
  if (!t.stop_message.empty()) std::cerr << " (" << t.stop_message << ")";
  std::cerr << "\n";
  if (t.stop_reason == fsi::StopReason::SolverFailure) return kRuntime;
  if (result.ledger.failed) {
    for (const auto& f : result.ledger.failures) std::cerr << "FAILED " << f << "\n";
    return kFailed;
  }
  return 0;
}

int cmd_shifts(const Options& o, const fsi::SimConfig& cfg) {
  fsi::Manifest manifest(o.out, "shifts", fsi::emit_config(cfg));
  const fsi::RunResult result = fsi::run(cfg);
  const auto& traj = result.trajectory;
  const double horizon = static_cast<double>(traj.states.size() - 1) * traj.dt;
  std::vector<double> hs;
  if (o.h_list.empty()) {
    for (int k : {1, 2, 4, 8, 16})
      if (k * cfg.dt < horizon) hs.push_back(k * cfg.dt);
  } else {
    hs = parse_list(o.h_list, "--h-list");
  }
  fsi::Simulation sim(cfg);
  const fsi::FieldNorms norms(*sim.space(), sim.shell());
  std::vector<fsi::ShiftReport> reports;
  std::stringstream ss(o.fields);
  std::string name;
  while (std::getline(ss, name, ','))
    reports.push_back(fsi::shift_report(traj, fsi::shift_field_from_string(name), hs, norms));
  manifest.emit("shifts.csv", [&](std::ostream& out) { fsi::write_shifts_csv(out, reports); });
  manifest.emit("shift_fits.csv", [&](std::ostream& out) { fsi::write_shift_fits_csv(out, reports); });
  manifest.finish();

  bool ok = !result.ledger.failed;
  for (const auto& r : reports) {
    if (!r.fitted) {
      std::cerr << fsi::to_string(r.field) << ": no fit (degenerate values)\n";
      continue;
    }
    std::cerr << fsi::to_string(r.field) << ": C = " << r.fit.c << ", beta = " << r.fit.beta << "\n";
    if (r.fit.beta < kMinShiftExponent) ok = false;
  }
  return ok ? 0 : kFailed;
}

int cmd_refine(const Options& o, const fsi::SimConfig& cfg) {
  std::vector<double> dts;
  if (o.dt_list.empty()) {
    for (int k = 0; k < 5; ++k) dts.push_back(cfg.dt / static_cast<double>(1 << k));
  } else {
    dts = parse_list(o.dt_list, "--dt-list");
  }
  fsi::Manifest manifest(o.out, "refine", fsi::emit_config(cfg));
  const fsi::RefinementTable table = fsi::refinement_study(cfg, dts);
  manifest.emit("refinement.csv", [&](std::ostream& out) { fsi::write_refinement_csv(out, table); });
  manifest.finish();
  for (const auto& r : table.rows)
    std::cerr << "dt " << r.dt_coarse << " -> " << r.dt_fine << ": diff_u " << r.diff_u << ", diff_eta "
              << r.diff_eta << "\n";
  if (!table.decreasing) {
    std::cerr << "FAILED diff_u column is not strictly decreasing\n";
    return kFailed;
  }
  return 0;
}

int cmd_mms(const Options& o, const fsi::SimConfig& cfg) {
  fsi::MmsOptions m;
  m.resolution = cfg.resolution;
  m.t_end = cfg.t_end;
  m.rho = cfg.fluid.rho_f;
  m.mu = cfg.fluid.mu;
  m.alpha = cfg.fluid.alpha;
  const std::vector<double> dts =
      o.dt_list.empty() ? std::vector<double>{0.1, 0.05, 0.025, 0.0125} : parse_list(o.dt_list, "--dt-list");
  fsi::Manifest manifest(o.out, "mms", fsi::emit_config(fsi::mms_config(m)));
  const auto rows = fsi::mms_study(m, dts);
  manifest.emit("mms.csv", [&](std::ostream& out) { fsi::write_mms_csv(out, rows); });
  manifest.finish();
  for (const auto& r : rows)
    std::cerr << "dt " << r.dt << ": error " << r.error_final << " (order " << r.order_final << ")\n";
  if (rows.size() >= 2 && rows.back().order_final < kMinMmsOrder) return kFailed;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moving-boundary fluid-structure interaction solver with energy verification"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "configuration file")->required();
    sub->add_option("--out", o.out, "output directory");
  };
  CLI::App* run = app.add_subcommand("run", "run the splitting scheme and write the energy ledger");
  add_common(run);
  run->add_flag("--dump-fields", o.dump_fields, "write VTK field dumps");
  CLI::App* shifts = app.add_subcommand("shifts", "time-shift norms on a fresh trajectory");
  add_common(shifts);
  shifts->add_option("--h-list", o.h_list, "comma-separated shifts");
  shifts->add_option("--fields", o.fields, "comma-separated fields (u,v,v_star,eta,eta_tilde)");
  CLI::App* refine = app.add_subcommand("refine", "time-step refinement (Cauchy) study");
  add_common(refine);
  refine->add_option("--dt-list", o.dt_list, "comma-separated, strictly decreasing time steps");
  CLI::App* mms = app.add_subcommand("mms", "manufactured-solution convergence in time");
  add_common(mms);
  mms->add_option("--dt-list", o.dt_list, "comma-separated time steps");
  CLI::App* check = app.add_subcommand("validate-config", "parse and validate a configuration file");
  check->add_option("--config", o.config, "configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    const fsi::SimConfig cfg = fsi::parse_config_file(o.config);
    if (check->parsed()) {
      std::cout << fsi::emit_config(cfg);
      return 0;
    }
    if (run->parsed()) return cmd_run(o, cfg);
    if (shifts->parsed()) return cmd_shifts(o, cfg);
    if (refine->parsed()) return cmd_refine(o, cfg);
    return cmd_mms(o, cfg);
  } catch (const fsi::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kValidation;
  } catch (const fsi::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const fsi::IncompatibleInitialData& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
}
