#include "fsi/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "fsi/errors.hpp"

namespace fsi {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

struct Entry {
  int line;
  std::string key;    // section.key
  std::string value;
};

class Reader {
 public:
  explicit Reader(const Entry& e) : e_(e) {}

  double number() const { return number(e_.value); }
  double number(const std::string& text) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (trim(text.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    fail("not a number: '" + text + "'");
  }
  long integer() const {
    try {
      std::size_t used = 0;
      const long v = std::stol(e_.value, &used);
      if (trim(e_.value.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    fail("not an integer: '" + e_.value + "'");
  }
  bool boolean() const {
    if (e_.value == "true" || e_.value == "1" || e_.value == "yes") return true;
    if (e_.value == "false" || e_.value == "0" || e_.value == "no") return false;
    fail("expected true or false");
  }
  std::size_t face_suffix(const std::string& prefix) const {
    const std::string idx = e_.key.substr(prefix.size());
    if (idx.empty() || idx.find_first_not_of("0123456789") != std::string::npos) fail("bad face index");
    return static_cast<std::size_t>(std::stoul(idx));
  }
  [[noreturn]] void fail(const std::string& reason) const { throw ParseError(e_.line, e_.key, reason); }
  const std::string& value() const { return e_.value; }

 private:
  const Entry& e_;
};

const std::set<std::string> kSections{"domain", "structure", "fluid", "boundary", "time", "guards", "output"};

void apply(SimConfig& c, const Entry& e) {
  const Reader r(e);
  const std::string& k = e.key;
  auto num = [&](double& dst) { dst = r.number(); };

  if (k == "domain.vertices") {
    c.polygon.clear();
    for (const auto& item : split(r.value(), ';')) {
      std::istringstream is(item);
      std::string xs;
      std::string ys;
      std::string extra;
      if (!(is >> xs >> ys) || (is >> extra)) r.fail("vertex must be 'x y'");
      c.polygon.emplace_back(r.number(xs), r.number(ys));
    }
  } else if (k == "domain.faces") {
    c.faces.clear();
    for (const auto& item : split(r.value(), ',')) {
      try {
        c.faces.push_back(face_tag_from_string(item));
      } catch (const Error& err) {
        r.fail(err.what());
      }
    }
  } else if (k == "domain.nx") {
    c.resolution.nx = static_cast<int>(r.integer());
  } else if (k == "domain.ny") {
    c.resolution.ny = static_cast<int>(r.integer());
  } else if (k == "structure.mode") {
    if (r.value() == "coupled") c.mode = StructureMode::Coupled;
    else if (r.value() == "fixed") c.mode = StructureMode::Fixed;
    else r.fail("expected coupled or fixed");
  } else if (k == "structure.rho_s") {
    num(c.structure.rho_s);
  } else if (k == "structure.thickness") {
    num(c.structure.thickness);
  } else if (k == "structure.bending_z") {
    num(c.structure.bending_z);
  } else if (k == "structure.bending_r") {
    num(c.structure.bending_r);
  } else if (k == "structure.eta0_z") {
    num(c.eta0_z);
  } else if (k == "structure.eta0_r") {
    num(c.eta0_r);
  } else if (k == "structure.v0_z") {
    num(c.v0_z);
  } else if (k == "structure.v0_r") {
    num(c.v0_r);
  } else if (k == "fluid.rho_f") {
    num(c.fluid.rho_f);
  } else if (k == "fluid.mu") {
    num(c.fluid.mu);
  } else if (k == "fluid.alpha") {
    num(c.fluid.alpha);
  } else if (k == "fluid.alpha_walls") {
    num(c.fluid.alpha_walls);
  } else if (k.rfind("fluid.alpha.", 0) == 0) {
    c.fluid.alpha_face[r.face_suffix("fluid.alpha.")] = r.number();
  } else if (k == "fluid.jacobian") {
    if (r.value() == "new") c.fluid.jacobian = JacobianVariant::New;
    else if (r.value() == "old") c.fluid.jacobian = JacobianVariant::Old;
    else r.fail("expected new or old");
  } else if (k == "fluid.u0") {
    c.u0 = r.value();
  } else if (k.rfind("boundary.pressure.", 0) == 0) {
    try {
      c.pressure[r.face_suffix("boundary.pressure.")] = PressureProfile::parse(r.value());
    } catch (const std::invalid_argument& err) {
      r.fail(err.what());
    }
  } else if (k == "time.dt") {
    num(c.dt);
  } else if (k == "time.t_end") {
    num(c.t_end);
  } else if (k == "guards.c_omega") {
    num(c.c_omega);
  } else if (k == "guards.j_floor") {
    num(c.j_floor);
  } else if (k == "output.dump_fields") {
    c.dump_fields = r.boolean();
  } else if (k == "output.dump_every") {
    const long v = r.integer();
    if (v < 1) throw ValidationError("output.dump_every", "at least 1");
    c.dump_every = static_cast<std::size_t>(v);
  } else {
    r.fail("unknown key");
  }
}

}  // namespace

SimConfig parse_config(std::istream& in) {
  SimConfig c;
  std::string section;
  std::set<std::string> seen;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ParseError(line, text, "unterminated section header");
      section = trim(text.substr(1, text.size() - 2));
      if (!kSections.count(section)) throw ParseError(line, section, "unknown section");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError(line, text, "expected key = value");
    const std::string key = trim(text.substr(0, eq));
    if (key.empty()) throw ParseError(line, key, "empty key");
    if (section.empty()) throw ParseError(line, key, "key outside of any section");
    const Entry e{line, section + "." + key, trim(text.substr(eq + 1))};
    if (!seen.insert(e.key).second) throw ParseError(line, e.key, "duplicate key");
    if (e.value.empty()) throw ParseError(line, e.key, "empty value");
    apply(c, e);
  }
  validate(c);
  return c;
}

SimConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, path, "cannot open file");
  return parse_config(in);
}

SimConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string emit_config(const SimConfig& c) {
  std::ostringstream os;
  os << "[domain]\nvertices = ";
  for (std::size_t i = 0; i < c.polygon.size(); ++i)
    os << (i ? "; " : "") << fmt(c.polygon[i].x()) << ' ' << fmt(c.polygon[i].y());
  os << "\nfaces = ";
  for (std::size_t i = 0; i < c.faces.size(); ++i) os << (i ? ", " : "") << to_string(c.faces[i]);
  os << "\nnx = " << c.resolution.nx << "\nny = " << c.resolution.ny << "\n\n";

  os << "[structure]\nmode = " << (c.mode == StructureMode::Coupled ? "coupled" : "fixed") << '\n'
     << "rho_s = " << fmt(c.structure.rho_s) << '\n'
     << "thickness = " << fmt(c.structure.thickness) << '\n'
     << "bending_z = " << fmt(c.structure.bending_z) << '\n'
     << "bending_r = " << fmt(c.structure.bending_r) << '\n'
     << "eta0_z = " << fmt(c.eta0_z) << '\n'
     << "eta0_r = " << fmt(c.eta0_r) << '\n'
     << "v0_z = " << fmt(c.v0_z) << '\n'
     << "v0_r = " << fmt(c.v0_r) << "\n\n";

  os << "[fluid]\nrho_f = " << fmt(c.fluid.rho_f) << '\n'
     << "mu = " << fmt(c.fluid.mu) << '\n'
     << "alpha = " << fmt(c.fluid.alpha) << '\n'
     << "alpha_walls = " << fmt(c.fluid.alpha_walls) << '\n';
  for (const auto& [face, a] : c.fluid.alpha_face) os << "alpha." << face << " = " << fmt(a) << '\n';
  os << "jacobian = " << (c.fluid.jacobian == JacobianVariant::New ? "new" : "old") << '\n'
     << "u0 = " << c.u0 << "\n\n";

  os << "[boundary]\n";
  for (const auto& [face, p] : c.pressure) os << "pressure." << face << " = " << p.to_string() << '\n';
  os << '\n';

  os << "[time]\ndt = " << fmt(c.dt) << "\nt_end = " << fmt(c.t_end) << "\n\n";
  os << "[guards]\nc_omega = " << fmt(c.c_omega) << "\nj_floor = " << fmt(c.j_floor) << "\n\n";
  os << "[output]\ndump_fields = " << (c.dump_fields ? "true" : "false") << "\ndump_every = " << c.dump_every
     << '\n';
  return os.str();
}

bool config_equal(const SimConfig& a, const SimConfig& b) {
  const auto& sa = a.structure;
  const auto& sb = b.structure;
  const auto& fa = a.fluid;
  const auto& fb = b.fluid;
  return a.polygon == b.polygon && a.faces == b.faces && a.resolution.nx == b.resolution.nx &&
         a.resolution.ny == b.resolution.ny && sa.rho_s == sb.rho_s && sa.thickness == sb.thickness &&
         sa.bending_z == sb.bending_z && sa.bending_r == sb.bending_r && a.mode == b.mode &&
         a.eta0_z == b.eta0_z && a.eta0_r == b.eta0_r && a.v0_z == b.v0_z && a.v0_r == b.v0_r &&
         fa.rho_f == fb.rho_f && fa.mu == fb.mu && fa.alpha == fb.alpha && fa.alpha_walls == fb.alpha_walls &&
         fa.alpha_face == fb.alpha_face && fa.jacobian == fb.jacobian && a.u0 == b.u0 &&
         a.pressure == b.pressure && a.dt == b.dt && a.t_end == b.t_end && a.c_omega == b.c_omega &&
         a.j_floor == b.j_floor && a.dump_fields == b.dump_fields && a.dump_every == b.dump_every;
}

}  // namespace fsi
