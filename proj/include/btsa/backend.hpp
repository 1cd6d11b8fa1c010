#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "btsa/lp.hpp"

namespace btsa {

class BackendUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Anything that honours the solve() contract.
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual std::string name() const = 0;
  virtual SolveResult solve(const LpProblem& p, const SolveOptions& opts) const = 0;
};

/// "bundled" is always available. "external-adapter" runs the executable named
/// by the BTSA_EXTERNAL_SOLVER environment variable, which reads the problem
/// as JSON on stdin and writes a result JSON on stdout; it throws
/// BackendUnavailable when that variable is unset. Unknown names throw
/// std::invalid_argument.
std::unique_ptr<SolverBackend> solver_backend(const std::string& name);

/// JSON wire format used by the external adapter.
std::string lp_to_json(const LpProblem& p);
SolveResult result_from_json(const LpProblem& p, const std::string& text);

}  // namespace btsa
