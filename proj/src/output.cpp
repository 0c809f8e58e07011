#include "fsi/output.hpp"

#include <cstdio>
#include <ctime>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "fsi/errors.hpp"

#ifndef FSI_VERSION
#define FSI_VERSION "unknown"
#endif

namespace fsi {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_ledger_csv(std::ostream& out, const EnergyLedger& ledger) {
  out << kLedgerHeader << '\n';
  for (const auto& r : ledger.rows) {
    out << r.step;
    for (double v : {r.t, r.e_half, r.e_full, r.d, r.gcl_res, r.struct_res, r.fluid_margin, r.j_min, r.inj_margin,
                     r.div_res, r.normal_res})
      out << ',' << format_double(v);
    out << '\n';
  }
}

void write_summary_json(std::ostream& out, const RunResult& result) {
  const auto& s = result.summary;
  const auto& l = result.ledger;
  const auto& t = result.trajectory;
  double d_unweighted = 0.0;
  for (const auto& r : l.rows) d_unweighted += r.d_unweighted;
  nlohmann::ordered_json j;
  j["stop_reason"] = std::string(to_string(t.stop_reason));
  j["stop_step"] = t.stop_step;
  j["stop_message"] = t.stop_message;
  j["steps_recorded"] = l.rows.empty() ? 0 : l.rows.size() - 1;
  j["failed"] = l.failed;
  j["failures"] = l.failures;
  j["E0"] = s.e0;
  j["E_final"] = s.e_final;
  j["E_max"] = s.e_max;
  j["empirical_C"] = s.empirical_c;
  j["max_step_C"] = s.max_step_c;
  j["coercivity_c"] = s.coercivity;
  j["telescoping_bound"] = s.telescoping_bound;
  j["telescoped_sums"] = {{"fluid", l.sums.fluid},
                          {"structure", l.sums.structure},
                          {"eta", l.sums.eta},
                          {"v_star", l.sums.vstar}};
  j["dissipation_sum"] = l.dissipation_sum;
  j["dissipation_unweighted_sum"] = d_unweighted;
  j["R_L2_norm2"] = l.r_l2_norm2;
  j["last_status"] = {{"j_min", t.last_status.j_min},
                      {"injectivity_margin", t.last_status.injectivity_margin},
                      {"admissible", t.last_status.admissible}};
  out << j.dump(2) << '\n';
}

void write_shifts_csv(std::ostream& out, const std::vector<ShiftReport>& reports) {
  out << "field,h,value\n";
  for (const auto& r : reports)
    for (std::size_t i = 0; i < r.h.size(); ++i)
      out << to_string(r.field) << ',' << format_double(r.h[i]) << ',' << format_double(r.value[i]) << '\n';
}

void write_shift_fits_csv(std::ostream& out, const std::vector<ShiftReport>& reports) {
  out << "field,C,beta\n";
  for (const auto& r : reports) {
    if (!r.fitted) continue;
    out << to_string(r.field) << ',' << format_double(r.fit.c) << ',' << format_double(r.fit.beta) << '\n';
  }
}

void write_refinement_csv(std::ostream& out, const RefinementTable& table) {
  out << "dt,diff_u,diff_eta\n";
  for (const auto& r : table.rows)
    out << format_double(r.dt_coarse) << ',' << format_double(r.diff_u) << ',' << format_double(r.diff_eta) << '\n';
}

void write_mms_csv(std::ostream& out, const std::vector<MmsRow>& rows) {
  out << "dt,error_final,error_l2,order_final,order_l2\n";
  for (const auto& r : rows)
    out << format_double(r.dt) << ',' << format_double(r.error_final) << ',' << format_double(r.error_l2) << ','
        << format_double(r.order_final) << ',' << format_double(r.order_l2) << '\n';
}

void write_vtk_fields(std::ostream& out, const Simulation& sim) {
  const Discretization& sp = *sim.space();
  const Mesh& mesh = sp.mesh();
  write_vtk_mesh(out, mesh);
  const auto& b = sim.map().displacement();
  const auto& u = sim.fluid_state().u;
  const auto& p = sim.fluid_state().p;
  const std::size_t nv = mesh.nodes.size();
  out << "POINT_DATA " << nv << "\nVECTORS B double\n";
  for (const auto& x : b) out << x.x() << ' ' << x.y() << " 0\n";
  out << "VECTORS u double\n";
  for (std::size_t v = 0; v < nv; ++v) out << u[2 * v] << ' ' << u[2 * v + 1] << " 0\n";
  out << "SCALARS p double 1\nLOOKUP_TABLE default\n";
  for (std::size_t v = 0; v < nv; ++v) out << (v < static_cast<std::size_t>(p.size()) ? p[v] : 0.0) << '\n';
  const auto& jac = sim.map().jacobian();
  const std::size_t nq = sp.qp_per_cell();
  out << "CELL_DATA " << mesh.cells.size() << "\nSCALARS J double 1\nLOOKUP_TABLE default\n";
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& quad = sp.cell_quadrature(c);
    double wj = 0.0;
    double w = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      wj += quad.weight[q] * jac[c * nq + q];
      w += quad.weight[q];
    }
    out << wj / w << '\n';
  }
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha256 unavailable");
  }
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

Manifest::Manifest(std::filesystem::path out_dir, std::string command, std::string config_text)
    : dir_(std::move(out_dir)),
      command_(std::move(command)),
      config_text_(std::move(config_text)),
      start_(std::chrono::system_clock::now()),
      clock_(std::chrono::steady_clock::now()) {
  std::filesystem::create_directories(dir_);
}

std::ofstream Manifest::open(const std::string& name) const {
  const auto path = dir_ / name;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  return f;
}

void Manifest::record(const std::string& name) { files_.emplace_back(name, sha256_file(dir_ / name)); }

std::filesystem::path Manifest::finish() const {
  const std::time_t t = std::chrono::system_clock::to_time_t(start_);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream when;
  when << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  nlohmann::ordered_json j;
  j["command"] = command_;
  j["version"] = FSI_VERSION;
  j["started_utc"] = when.str();
  j["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_).count();
  j["config"] = config_text_;
  j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& [name, sum] : files_) j["outputs"].push_back({{"path", name}, {"sha256", sum}});
  const auto path = dir_ / "manifest.json";
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  f << j.dump(2) << '\n';
  return path;
}

}  // namespace fsi
