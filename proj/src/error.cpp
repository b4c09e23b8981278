#include "malab/error.hpp"

namespace malab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Configuration: return "configuration error";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Parameter: return "parameter error";
    case ErrorKind::Precondition: return "precondition error";
    case ErrorKind::SolverFailure: return "solver failure";
    case ErrorKind::NotContained: return "not compactly contained";
    case ErrorKind::Degenerate: return "degenerate input";
    case ErrorKind::InsufficientData: return "insufficient data";
    case ErrorKind::Resolution: return "under-resolved";
    case ErrorKind::Assembly: return "assembly error";
    case ErrorKind::Dimension: return "dimension error";
    case ErrorKind::Misuse: return "misuse";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

int exit_code_for(ErrorKind kind) {
  return kind == ErrorKind::SolverFailure ? 3 : 2;
}

}  // namespace malab
