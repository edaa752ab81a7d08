#pragma once

#include <stdexcept>
#include <string>

namespace netzero {

// Broad failure classes. The service maps these onto HTTP status codes and
// the CLI onto exit codes, so keep the set small.
enum class ErrorKind {
  invalid_argument,  // caller supplied something malformed
  schema,            // input file or payload does not match its schema
  not_found,         // unknown facility, month, job, ...
  precondition,      // a prerequisite (invoice, model, calendar) is missing
  infeasible,        // optimisation instance has no feasible plan
  convergence,       // iterative method did not reach its target
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace netzero
