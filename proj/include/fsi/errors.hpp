#pragma once

#include <stdexcept>
#include <string>

namespace fsi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidPolygon : public Error {
 public:
  using Error::Error;
};

class NonRectifiablePolygon : public Error {
 public:
  using Error::Error;
};

class MissingElasticFace : public Error {
 public:
  MissingElasticFace() : Error("mesh has no face tagged Elastic") {}
};

class ClampViolatedInput : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

class MeshMismatch : public Error {
 public:
  MeshMismatch() : Error("fields live on different meshes") {}
};

class DegenerateTangent : public Error {
 public:
  using Error::Error;
};

class ZeroDeformation : public Error {
 public:
  ZeroDeformation() : Error("symmetric gradient vanishes; Korn ratio undefined") {}
};

class SingularOperator : public Error {
 public:
  using Error::Error;
};

class InadmissibleDomain : public Error {
 public:
  using Error::Error;
};

class AssemblyShapeMismatch : public Error {
 public:
  using Error::Error;
};

class ShiftTooLarge : public Error {
 public:
  using Error::Error;
};

class DegenerateFit : public Error {
 public:
  explicit DegenerateFit(const std::string& what = "all shift values are zero; power-law fit undefined")
      : Error(what) {}
};

class RunIncomplete : public Error {
 public:
  using Error::Error;
};

/// Failed initial-data compatibility check. `reason` is a machine-readable
/// code such as "divergence", "normal_trace" or "wall_normal".
class IncompatibleInitialData : public Error {
 public:
  IncompatibleInitialData(std::string reason, const std::string& detail)
      : Error("incompatible initial data (" + reason + "): " + detail),
        reason_(std::move(reason)) {}
  const std::string& reason() const { return reason_; }

 private:
  std::string reason_;
};

class ParseError : public Error {
 public:
  ParseError(int line, std::string key, const std::string& reason)
      : Error("line " + std::to_string(line) + ", key '" + key + "': " + reason),
        line_(line),
        key_(std::move(key)) {}
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string key, std::string constraint)
      : Error("invalid value for '" + key + "': " + constraint),
        key_(std::move(key)),
        constraint_(std::move(constraint)) {}
  const std::string& key() const { return key_; }
  const std::string& constraint() const { return constraint_; }

 private:
  std::string key_;
  std::string constraint_;
};

}  // namespace fsi
