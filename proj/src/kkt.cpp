#include "btsa/kkt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace btsa {

double KktReport::max_residual() const {
  return std::max({primal_residual, dual_residual, complementarity, dual_sign});
}

KktReport check_kkt(const LpProblem& p, const SolveResult& r, double tol) {
  const int n = p.n_cols(), m = p.n_rows();
  if (!r.optimal()) throw std::invalid_argument("check_kkt: result is not optimal");
  if (static_cast<int>(r.primal.size()) != n || static_cast<int>(r.bound_duals.size()) != n ||
      static_cast<int>(r.row_duals.size()) != m)
    throw std::invalid_argument("check_kkt: result dimensions do not match the problem");

  KktReport rep;
  rep.tolerance = tol;
  std::vector<double> stationarity(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) stationarity[j] = p.cost(j) - r.bound_duals[j];

  for (int i = 0; i < m; ++i) {
    auto cols = p.row_cols(i);
    auto vals = p.row_vals(i);
    double act = 0.0;
    for (std::size_t t = 0; t < cols.size(); ++t) {
      act += vals[t] * r.primal[cols[t]];
      stationarity[cols[t]] -= r.row_duals[i] * vals[t];
    }
    const double b = p.rhs(i);
    const double y = r.row_duals[i];
    const double scale = 1.0 + std::abs(b);
    double viol = 0.0, slack = 0.0, sign = 0.0;
    switch (p.sense(i)) {
      case Sense::le:
        viol = std::max(0.0, act - b);
        slack = std::max(0.0, b - act);
        sign = std::max(0.0, y);
        break;
      case Sense::ge:
        viol = std::max(0.0, b - act);
        slack = std::max(0.0, act - b);
        sign = std::max(0.0, -y);
        break;
      case Sense::eq:
        viol = std::abs(act - b);
        break;
    }
    rep.primal_residual = std::max(rep.primal_residual, viol / scale);
    rep.dual_sign = std::max(rep.dual_sign, sign);
    if (p.sense(i) != Sense::eq) rep.complementarity = std::max(rep.complementarity, std::min(std::abs(y), slack));
  }

  for (int j = 0; j < n; ++j) {
    const double x = r.primal[j], lo = p.lower(j), up = p.upper(j), z = r.bound_duals[j];
    double viol = 0.0;
    if (std::isfinite(lo)) viol = std::max(viol, (lo - x) / (1.0 + std::abs(lo)));
    if (std::isfinite(up)) viol = std::max(viol, (x - up) / (1.0 + std::abs(up)));
    rep.primal_residual = std::max(rep.primal_residual, viol);
    rep.dual_residual = std::max(rep.dual_residual, std::abs(stationarity[j]) / (1.0 + std::abs(p.cost(j))));
    // z > 0 must be carried by the lower bound, z < 0 by the upper bound
    if (z > 0.0) {
      if (!std::isfinite(lo))
        rep.dual_sign = std::max(rep.dual_sign, z);
      else
        rep.complementarity = std::max(rep.complementarity, std::min(z, std::max(0.0, x - lo)));
    } else if (z < 0.0) {
      if (!std::isfinite(up))
        rep.dual_sign = std::max(rep.dual_sign, -z);
      else
        rep.complementarity = std::max(rep.complementarity, std::min(-z, std::max(0.0, up - x)));
    }
  }
  rep.pass = rep.max_residual() < tol;
  return rep;
}

}  // namespace btsa
