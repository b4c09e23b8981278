#pragma once

#include <stdexcept>
#include <string>

namespace malab {

enum class ErrorKind {
  Configuration,
  Domain,
  Parameter,
  Precondition,
  SolverFailure,
  NotContained,
  Degenerate,
  InsufficientData,
  Resolution,
  Assembly,
  Dimension,
  Misuse,
  Io,
};

const char* to_string(ErrorKind kind);

/// Base for every error raised by the library. The kind selects the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/// A nonlinear or linear solve that stopped without meeting its tolerance.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, double residual, int iterations)
      : Error(ErrorKind::SolverFailure, what),
        residual_(residual),
        iterations_(iterations) {}

  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

/// Process exit code for the command-line tools: 2 configuration, 3 solver failure.
int exit_code_for(ErrorKind kind);

}  // namespace malab
