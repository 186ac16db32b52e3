#pragma once

#include <stdexcept>
#include <string>

namespace embkit {

// Base class for all toolkit errors. The CLI maps the error class name to
// stderr and a nonzero exit code.
class Error : public std::runtime_error {
public:
  Error(std::string cls, const std::string& msg)
      : std::runtime_error(msg), class_(std::move(cls)) {}
  const std::string& error_class() const { return class_; }

private:
  std::string class_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& m) : Error("validation", m) {}
};

struct LookupError : Error {
  explicit LookupError(const std::string& m) : Error("lookup", m) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error("parse", m) {}
};

struct ConflictError : Error {
  explicit ConflictError(const std::string& m) : Error("conflict", m) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& m) : Error("domain", m) {}
};

struct DegenerateError : Error {
  explicit DegenerateError(const std::string& m) : Error("degenerate", m) {}
};

struct SamplingError : Error {
  explicit SamplingError(const std::string& m) : Error("sampling", m) {}
};

struct IllConditionedError : Error {
  explicit IllConditionedError(const std::string& m)
      : Error("ill-conditioned", m) {}
};

struct IoError : Error {
  explicit IoError(const std::string& m) : Error("io", m) {}
};

} // namespace embkit
