#pragma once

#include <stdexcept>
#include <string>

namespace levelk {

enum class ErrorKind {
  kInvalidArgument,
  kContractViolation,
  kNotFound,
  kInfeasibleManeuver,
  kConfiguration,
  kSchema,
  kIo,
};

/// Base of every exception thrown by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& m) : Error(ErrorKind::kInvalidArgument, m) {}
};

class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& m) : Error(ErrorKind::kContractViolation, m) {}
};

class NotFound : public Error {
 public:
  explicit NotFound(const std::string& m) : Error(ErrorKind::kNotFound, m) {}
};

class InfeasibleManeuver : public Error {
 public:
  explicit InfeasibleManeuver(const std::string& m) : Error(ErrorKind::kInfeasibleManeuver, m) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error(ErrorKind::kConfiguration, m) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& m) : Error(ErrorKind::kSchema, m) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error(ErrorKind::kIo, m) {}
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace levelk
