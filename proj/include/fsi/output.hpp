#pragma once

// File emission: energy ledger, run summary, diagnostics tables, VTK field
// dumps and the checksummed run manifest.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fsi/diagnostics.hpp"
#include "fsi/driver.hpp"

namespace fsi {

inline constexpr const char* kLedgerHeader =
    "step,t,E_half,E_full,D,gcl_res,struct_res,fluid_margin,j_min,inj_margin,div_res,normal_res";

/// 17 significant digits.
std::string format_double(double v);

void write_ledger_csv(std::ostream& out, const EnergyLedger& ledger);
void write_summary_json(std::ostream& out, const RunResult& result);
void write_shifts_csv(std::ostream& out, const std::vector<ShiftReport>& reports);
void write_shift_fits_csv(std::ostream& out, const std::vector<ShiftReport>& reports);
void write_refinement_csv(std::ostream& out, const RefinementTable& table);
void write_mms_csv(std::ostream& out, const std::vector<MmsRow>& rows);

/// Mesh with nodal B, u (vertex values), p and cell-averaged J.
void write_vtk_fields(std::ostream& out, const Simulation& sim);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Collects emitted files and writes manifest.json with their checksums.
class Manifest {
 public:
  Manifest(std::filesystem::path out_dir, std::string command, std::string config_text);

  /// Opens `name` under the output directory, lets `write` fill it, and
  /// records it.
  template <class F>
  void emit(const std::string& name, F&& write) {
    {
      std::ofstream file = open(name);
      write(static_cast<std::ostream&>(file));
      if (!file) throw std::runtime_error("failed writing " + (dir_ / name).string());
    }
    record(name);
  }
  void record(const std::string& name);
  /// Writes manifest.json; returns its path.
  std::filesystem::path finish() const;

 private:
  std::ofstream open(const std::string& name) const;

  std::filesystem::path dir_;
  std::string command_;
  std::string config_text_;
  std::chrono::system_clock::time_point start_;
  std::chrono::steady_clock::time_point clock_;
  std::vector<std::pair<std::string, std::string>> files_;  // name, sha256
};

}  // namespace fsi
