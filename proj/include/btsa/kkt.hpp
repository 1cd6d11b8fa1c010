#pragma once

#include "btsa/lp.hpp"

namespace btsa {

/// Optimality certificate of a SolveResult, computed from the problem data
/// alone (no solver internals).
///
/// Residuals are scaled: primal by 1 + |rhs| (or 1 + |bound|), stationarity by
/// 1 + |c_j|. Complementarity of a pair is min(|dual|, slack), so it vanishes
/// when either side does. Sign violations measure duals pointing the wrong way
/// for their constraint sense or bound.
struct KktReport {
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double complementarity = 0.0;
  double dual_sign = 0.0;
  double tolerance = 1e-7;
  bool pass = false;

  double max_residual() const;
};

/// Throws std::invalid_argument on dimension mismatch or a non-optimal result.
KktReport check_kkt(const LpProblem& p, const SolveResult& r, double tol = 1e-7);

}  // namespace btsa
