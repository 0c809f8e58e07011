#pragma once

// Strict INI-style run configuration.
//
//   [domain]    vertices = x y; x y; ...   faces = III, I, elastic, I   nx, ny
//   [structure] mode (coupled|fixed), rho_s, thickness, bending_z, bending_r,
//               eta0_z, eta0_r, v0_z, v0_r
//   [fluid]     rho_f, mu, alpha, alpha_walls, alpha.<face>, jacobian (new|old), u0
//   [boundary]  pressure.<face> = profile
//   [time]      dt, t_end
//   [guards]    c_omega, j_floor
//   [output]    dump_fields (true|false), dump_every
//
// '#' starts a comment. Unknown sections and keys are errors.

#include <iosfwd>
#include <string>

#include "fsi/driver.hpp"

namespace fsi {

/// Throws ParseError for malformed input, ValidationError for values that
/// parse but violate a constraint.
SimConfig parse_config(std::istream& in);
SimConfig parse_config_file(const std::string& path);
SimConfig parse_config_string(const std::string& text);

/// Full-precision text that parse_config reads back to an equal config.
std::string emit_config(const SimConfig& config);

/// Equality of every field representable in a config file.
bool config_equal(const SimConfig& a, const SimConfig& b);

}  // namespace fsi
