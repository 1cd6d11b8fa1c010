// Bounded-variable primal revised simplex.
//
// Every row i gets a logical variable r_i = a_i'x, so the constraint system is
// [A | -I] (x, r) = 0 with bounds on both structurals and logicals. A crash
// basis uses logicals and column singletons; rows it cannot satisfy get an
// artificial variable that phase 1 drives to zero. The basis inverse is a
// sparse LU plus an eta file, refactorized every `refactor_period` updates.

#include <algorithm>
#include <cmath>
#include <sstream>

#include "btsa/lp.hpp"
#include "lu_factor.hpp"

namespace btsa {

namespace {

using detail::SparseVec;

enum class VarState : char { basic, at_lower, at_upper, free_zero };

struct BlockLp {
  int m = 0, n = 0;
  std::vector<double> cost, lo, up;
  std::vector<SparseVec> cols;
  std::vector<double> rlo, rup;
};

struct BlockSolution {
  SolveStatus status = SolveStatus::optimal;
  std::vector<double> x, d, y;
  std::vector<VarState> col_state, row_state;
  long iterations = 0;
};

class BoundedSimplex {
 public:
  BoundedSimplex(const BlockLp& lp, const SolveOptions& opts) : lp_(lp), opts_(opts) {}

  BlockSolution run();

 private:
  int n_total() const { return static_cast<int>(lb_.size()); }
  bool is_artificial(int j) const { return j >= lp_.n + lp_.m; }
  bool is_fixed(int j) const { return lb_[j] == ub_[j]; }

  void setup();
  bool refactor();
  void recompute_basic_values();
  void compute_duals();
  double reduced_cost(int j) const;
  int price() const;
  SolveStatus iterate(bool phase1);
  bool drive_out_artificials();
  double infeasibility() const;

  const BlockLp& lp_;
  const SolveOptions& opts_;
  int m_ = 0;
  std::vector<double> lb_, ub_, cost_, x_;
  std::vector<SparseVec> cols_;
  std::vector<VarState> state_;
  std::vector<int> head_;
  std::vector<double> y_, alpha_, work_;
  detail::LuFactor lu_;
  long iterations_ = 0;
  int degenerate_run_ = 0;
  double art_tol_ = 0.0;
};

void BoundedSimplex::setup() {
  const int n = lp_.n;
  m_ = lp_.m;
  lb_ = lp_.lo;
  ub_ = lp_.up;
  cols_ = lp_.cols;
  for (int i = 0; i < m_; ++i) {
    lb_.push_back(lp_.rlo[i]);
    ub_.push_back(lp_.rup[i]);
    cols_.push_back({{i, -1.0}});
  }
  const int nv = n + m_;
  x_.assign(static_cast<std::size_t>(nv), 0.0);
  state_.assign(static_cast<std::size_t>(nv), VarState::at_lower);
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(lb_[j])) {
      x_[j] = lb_[j];
      state_[j] = VarState::at_lower;
    } else if (std::isfinite(ub_[j])) {
      x_[j] = ub_[j];
      state_[j] = VarState::at_upper;
    } else {
      x_[j] = 0.0;
      state_[j] = VarState::free_zero;
    }
  }

  std::vector<double> activity(static_cast<std::size_t>(m_), 0.0);
  for (int j = 0; j < n; ++j)
    if (x_[j] != 0.0)
      for (auto [i, v] : cols_[j]) activity[i] += v * x_[j];

  head_.assign(static_cast<std::size_t>(m_), -1);
  for (int i = 0; i < m_; ++i) {
    const int logical = n + i;
    const double r = activity[i];
    const double tol = opts_.feas_tol * (1.0 + std::abs(r));
    if (r >= lb_[logical] - tol && r <= ub_[logical] + tol) {
      head_[i] = logical;
      state_[logical] = VarState::basic;
      x_[logical] = r;
      continue;
    }
    const double target = r < lb_[logical] ? lb_[logical] : ub_[logical];
    x_[logical] = target;
    state_[logical] = target == lb_[logical] ? VarState::at_lower : VarState::at_upper;
    // column singleton that can absorb the residual
    int pick = -1;
    double pick_val = 0.0;
    for (int j = 0; j < n && pick < 0; ++j) {
      if (cols_[j].size() != 1 || cols_[j][0].first != i || state_[j] == VarState::basic) continue;
      const double v = x_[j] + (target - r) / cols_[j][0].second;
      const double t = opts_.feas_tol * (1.0 + std::abs(v));
      if (v >= lb_[j] - t && v <= ub_[j] + t) {
        pick = j;
        pick_val = std::clamp(v, lb_[j], ub_[j]);
      }
    }
    if (pick >= 0) {
      head_[i] = pick;
      state_[pick] = VarState::basic;
      x_[pick] = pick_val;
      continue;
    }
    const double gap = target - r;
    lb_.push_back(0.0);
    ub_.push_back(kInf);
    cols_.push_back({{i, gap >= 0.0 ? 1.0 : -1.0}});
    x_.push_back(std::abs(gap));
    state_.push_back(VarState::basic);
    head_[i] = n_total() - 1;
  }
  cost_.assign(static_cast<std::size_t>(n_total()), 0.0);
}

bool BoundedSimplex::refactor() {
  std::vector<SparseVec> bcols(static_cast<std::size_t>(m_));
  for (int p = 0; p < m_; ++p) bcols[p] = cols_[head_[p]];
  if (lu_.factorize(m_, bcols)) return true;
  // Replace the unpivoted positions by logicals of the unpivoted rows.
  const auto fail = lu_.failure();
  for (std::size_t t = 0; t < fail.positions.size() && t < fail.rows.size(); ++t) {
    const int p = fail.positions[t];
    const int out = head_[p];
    const int logical = lp_.n + fail.rows[t];
    if (state_[logical] == VarState::basic) continue;
    if (std::isfinite(lb_[out])) {
      state_[out] = VarState::at_lower;
      x_[out] = lb_[out];
    } else if (std::isfinite(ub_[out])) {
      state_[out] = VarState::at_upper;
      x_[out] = ub_[out];
    } else {
      state_[out] = VarState::free_zero;
      x_[out] = 0.0;
    }
    head_[p] = logical;
    state_[logical] = VarState::basic;
  }
  for (int p = 0; p < m_; ++p) bcols[p] = cols_[head_[p]];
  return lu_.factorize(m_, bcols);
}

void BoundedSimplex::recompute_basic_values() {
  work_.assign(static_cast<std::size_t>(m_), 0.0);
  for (int j = 0; j < n_total(); ++j) {
    if (state_[j] == VarState::basic || x_[j] == 0.0) continue;
    for (auto [i, v] : cols_[j]) work_[i] -= v * x_[j];
  }
  lu_.ftran(work_);
  for (int p = 0; p < m_; ++p) x_[head_[p]] = work_[p];
}

void BoundedSimplex::compute_duals() {
  y_.assign(static_cast<std::size_t>(m_), 0.0);
  for (int p = 0; p < m_; ++p) y_[p] = cost_[head_[p]];
  lu_.btran(y_);
}

double BoundedSimplex::reduced_cost(int j) const {
  double d = cost_[j];
  for (auto [i, v] : cols_[j]) d -= y_[i] * v;
  return d;
}

int BoundedSimplex::price() const {
  const bool bland = opts_.pricing == PricingRule::lowest_index || degenerate_run_ > 50;
  int best = -1;
  double best_score = 0.0;
  for (int j = 0; j < n_total(); ++j) {
    const VarState s = state_[j];
    if (s == VarState::basic || is_fixed(j)) continue;
    const double d = reduced_cost(j);
    double score = 0.0;
    if (s == VarState::at_lower && d < -opts_.opt_tol)
      score = -d;
    else if (s == VarState::at_upper && d > opts_.opt_tol)
      score = d;
    else if (s == VarState::free_zero && std::abs(d) > opts_.opt_tol)
      score = std::abs(d);
    if (score == 0.0) continue;
    if (bland) return j;
    if (score > best_score) {
      best_score = score;
      best = j;
    }
  }
  return best;
}

double BoundedSimplex::infeasibility() const {
  double s = 0.0;
  for (int j = lp_.n + m_; j < n_total(); ++j) s += x_[j];
  return s;
}

SolveStatus BoundedSimplex::iterate(bool phase1) {
  bool verified = false;
  for (;;) {
    if (iterations_ >= opts_.max_iterations) return SolveStatus::iteration_limit;
    if (lu_.n_etas() >= opts_.refactor_period) {
      refactor();
      recompute_basic_values();
    }
    compute_duals();
    const int q = price();
    if (q < 0) {
      if (verified || lu_.n_etas() == 0) return SolveStatus::optimal;
      refactor();
      recompute_basic_values();
      verified = true;
      continue;
    }
    verified = false;
    const double d = reduced_cost(q);
    const double dir = (state_[q] == VarState::at_upper || (state_[q] == VarState::free_zero && d > 0.0)) ? -1.0 : 1.0;

    alpha_.assign(static_cast<std::size_t>(m_), 0.0);
    for (auto [i, v] : cols_[q]) alpha_[i] = v;
    lu_.ftran(alpha_);

    // Harris two-pass ratio test.
    const bool bland = opts_.pricing == PricingRule::lowest_index || degenerate_run_ > 50;
    const double delta = opts_.feas_tol;
    double theta_max = kInf;
    for (int p = 0; p < m_; ++p) {
      const double a = alpha_[p];
      if (std::abs(a) <= opts_.pivot_tol) continue;
      const int v = head_[p];
      const double rate = -dir * a;
      double lim = kInf;
      if (rate < 0.0 && std::isfinite(lb_[v]))
        lim = (x_[v] - lb_[v] + delta) / -rate;
      else if (rate > 0.0 && std::isfinite(ub_[v]))
        lim = (ub_[v] + delta - x_[v]) / rate;
      theta_max = std::min(theta_max, lim);
    }
    int leave = -1;
    double leave_ratio = kInf;
    double leave_abs = 0.0;
    for (int p = 0; p < m_; ++p) {
      const double a = alpha_[p];
      if (std::abs(a) <= opts_.pivot_tol) continue;
      const int v = head_[p];
      const double rate = -dir * a;
      double ratio;
      if (rate < 0.0 && std::isfinite(lb_[v]))
        ratio = (x_[v] - lb_[v]) / -rate;
      else if (rate > 0.0 && std::isfinite(ub_[v]))
        ratio = (ub_[v] - x_[v]) / rate;
      else
        continue;
      ratio = std::max(ratio, 0.0);
      if (ratio > theta_max) continue;
      bool better;
      if (leave < 0)
        better = true;
      else if (bland)
        better = ratio < leave_ratio - 1e-12 || (ratio <= leave_ratio + 1e-12 && v < head_[leave]);
      else
        better = std::abs(a) > leave_abs || (std::abs(a) == leave_abs && v < head_[leave]);
      if (better) {
        leave = p;
        leave_ratio = ratio;
        leave_abs = std::abs(a);
      }
    }
    const double range = ub_[q] - lb_[q];
    const bool flip = std::isfinite(range) && (leave < 0 || range <= leave_ratio);
    if (leave < 0 && !flip) return phase1 ? SolveStatus::infeasible : SolveStatus::unbounded;

    const double theta = flip ? range : leave_ratio;
    ++iterations_;
    degenerate_run_ = theta <= opts_.feas_tol ? degenerate_run_ + 1 : 0;
    if (theta != 0.0)
      for (int p = 0; p < m_; ++p)
        if (alpha_[p] != 0.0) x_[head_[p]] -= dir * theta * alpha_[p];

    if (flip) {
      if (state_[q] == VarState::at_lower) {
        state_[q] = VarState::at_upper;
        x_[q] = ub_[q];
      } else {
        state_[q] = VarState::at_lower;
        x_[q] = lb_[q];
      }
      continue;
    }
    x_[q] += dir * theta;
    const int out = head_[leave];
    const double rate = -dir * alpha_[leave];
    if (rate < 0.0) {
      state_[out] = VarState::at_lower;
      x_[out] = lb_[out];
    } else {
      state_[out] = VarState::at_upper;
      x_[out] = ub_[out];
    }
    if (phase1 && is_artificial(out)) ub_[out] = 0.0;
    head_[leave] = q;
    state_[q] = VarState::basic;
    lu_.push_eta(leave, alpha_, 1e-14);
    if (phase1 && infeasibility() <= art_tol_) {
      // all artificials at zero: phase 1 is done
      return SolveStatus::optimal;
    }
  }
}

bool BoundedSimplex::drive_out_artificials() {
  const int first_art = lp_.n + m_;
  for (int j = first_art; j < n_total(); ++j) {
    lb_[j] = 0.0;
    ub_[j] = 0.0;
  }
  for (int p = 0; p < m_; ++p) {
    if (!is_artificial(head_[p])) continue;
    std::vector<double> rho(static_cast<std::size_t>(m_), 0.0);
    rho[p] = 1.0;
    lu_.btran(rho);
    int pick = -1;
    double best = 1e-7;
    for (int j = 0; j < first_art; ++j) {
      if (state_[j] == VarState::basic) continue;
      double a = 0.0;
      for (auto [i, v] : cols_[j]) a += rho[i] * v;
      if (std::abs(a) > best) {
        best = std::abs(a);
        pick = j;
      }
    }
    if (pick < 0) continue;
    alpha_.assign(static_cast<std::size_t>(m_), 0.0);
    for (auto [i, v] : cols_[pick]) alpha_[i] = v;
    lu_.ftran(alpha_);
    const int out = head_[p];
    state_[out] = VarState::at_lower;
    x_[out] = 0.0;
    head_[p] = pick;
    state_[pick] = VarState::basic;
    lu_.push_eta(p, alpha_, 1e-14);
    if (lu_.n_etas() >= opts_.refactor_period) refactor();
  }
  refactor();
  recompute_basic_values();
  return true;
}

BlockSolution BoundedSimplex::run() {
  setup();
  BlockSolution sol;
  refactor();
  recompute_basic_values();
  const int first_art = lp_.n + m_;
  if (n_total() > first_art) {
    double bmax = 0.0;
    for (int i = 0; i < m_; ++i) {
      if (std::isfinite(lp_.rlo[i])) bmax = std::max(bmax, std::abs(lp_.rlo[i]));
      if (std::isfinite(lp_.rup[i])) bmax = std::max(bmax, std::abs(lp_.rup[i]));
    }
    art_tol_ = opts_.feas_tol * (1.0 + bmax);
    for (int j = first_art; j < n_total(); ++j) cost_[j] = 1.0;
    const SolveStatus s = iterate(true);
    if (s == SolveStatus::iteration_limit) {
      sol.status = s;
      sol.iterations = iterations_;
      return sol;
    }
    if (infeasibility() > art_tol_) {
      sol.status = SolveStatus::infeasible;
      sol.iterations = iterations_;
      return sol;
    }
    drive_out_artificials();
  }
  std::fill(cost_.begin(), cost_.end(), 0.0);
  for (int j = 0; j < lp_.n; ++j) cost_[j] = lp_.cost[j];
  degenerate_run_ = 0;
  sol.status = iterate(false);
  sol.iterations = iterations_;
  if (sol.status != SolveStatus::optimal) return sol;

  if (lu_.n_etas() > 0) {
    refactor();
    recompute_basic_values();
  }
  compute_duals();
  sol.x.assign(x_.begin(), x_.begin() + lp_.n);
  sol.y = y_;
  sol.d.resize(static_cast<std::size_t>(lp_.n));
  sol.col_state.resize(static_cast<std::size_t>(lp_.n));
  for (int j = 0; j < lp_.n; ++j) {
    sol.col_state[j] = state_[j];
    sol.d[j] = state_[j] == VarState::basic ? 0.0 : reduced_cost(j);
  }
  sol.row_state.resize(static_cast<std::size_t>(m_));
  for (int i = 0; i < m_; ++i) sol.row_state[i] = state_[lp_.n + i];
  return sol;
}

BasisStatus to_basis_status(VarState s) {
  switch (s) {
    case VarState::basic: return BasisStatus::basic;
    case VarState::at_upper: return BasisStatus::at_upper;
    default: return BasisStatus::at_lower;
  }
}

BlockLp extract_block(const LpProblem& p, const std::vector<int>& rows, const std::vector<int>& cols,
                      std::vector<int>& local_of_col) {
  BlockLp b;
  b.m = static_cast<int>(rows.size());
  b.n = static_cast<int>(cols.size());
  for (int t = 0; t < b.n; ++t) {
    const int j = cols[t];
    local_of_col[j] = t;
    b.cost.push_back(p.cost(j));
    b.lo.push_back(p.lower(j));
    b.up.push_back(p.upper(j));
  }
  b.cols.resize(static_cast<std::size_t>(b.n));
  for (int r = 0; r < b.m; ++r) {
    const int i = rows[r];
    auto rc = p.row_cols(i);
    auto rv = p.row_vals(i);
    for (std::size_t t = 0; t < rc.size(); ++t) b.cols[local_of_col[rc[t]]].emplace_back(r, rv[t]);
    switch (p.sense(i)) {
      case Sense::le:
        b.rlo.push_back(-kInf);
        b.rup.push_back(p.rhs(i));
        break;
      case Sense::ge:
        b.rlo.push_back(p.rhs(i));
        b.rup.push_back(kInf);
        break;
      case Sense::eq:
        b.rlo.push_back(p.rhs(i));
        b.rup.push_back(p.rhs(i));
        break;
    }
  }
  return b;
}

void solve_block(const LpProblem& p, const std::vector<int>& rows, const std::vector<int>& cols,
                 const SolveOptions& opts, SolveResult& out, SolveStatus& status, long& iterations) {
  std::vector<int> local(static_cast<std::size_t>(p.n_cols()), -1);
  const BlockLp lp = extract_block(p, rows, cols, local);
  BoundedSimplex simplex(lp, opts);
  BlockSolution sol = simplex.run();
  status = sol.status;
  iterations = sol.iterations;
  if (sol.status != SolveStatus::optimal) return;
  for (int t = 0; t < lp.n; ++t) {
    out.primal[cols[t]] = sol.x[t];
    out.bound_duals[cols[t]] = sol.d[t];
    out.col_status[cols[t]] = to_basis_status(sol.col_state[t]);
  }
  for (int r = 0; r < lp.m; ++r) {
    out.row_duals[rows[r]] = sol.y[r];
    out.row_status[rows[r]] = to_basis_status(sol.row_state[r]);
  }
}

// Columns without rows sit at whichever bound minimizes their cost.
SolveStatus solve_free_column(const LpProblem& p, int j, SolveResult& out) {
  const double c = p.cost(j), lo = p.lower(j), up = p.upper(j);
  double v;
  BasisStatus st;
  if (c > 0.0 || (c == 0.0 && std::isfinite(lo))) {
    if (!std::isfinite(lo)) return SolveStatus::unbounded;
    v = lo;
    st = BasisStatus::at_lower;
  } else if (c < 0.0 || std::isfinite(up)) {
    if (!std::isfinite(up)) return SolveStatus::unbounded;
    v = up;
    st = BasisStatus::at_upper;
  } else {
    v = 0.0;
    st = BasisStatus::at_lower;
  }
  out.primal[j] = v;
  out.bound_duals[j] = c;
  out.col_status[j] = st;
  return SolveStatus::optimal;
}

SolveStatus merge_status(SolveStatus a, SolveStatus b) {
  auto rank = [](SolveStatus s) {
    switch (s) {
      case SolveStatus::optimal: return 0;
      case SolveStatus::iteration_limit: return 1;
      case SolveStatus::unbounded: return 2;
      case SolveStatus::infeasible: return 3;
      case SolveStatus::invalid_input: return 4;
    }
    return 4;
  };
  return rank(a) >= rank(b) ? a : b;
}

SolveResult solve_impl(const LpProblem& p, const SolveOptions& opts, bool parallel) {
  SolveResult out;
  auto problems = p.check();
  if (!problems.empty()) {
    out.status = SolveStatus::invalid_input;
    std::ostringstream os;
    for (std::size_t t = 0; t < problems.size() && t < 5; ++t) os << (t ? "; " : "") << problems[t];
    out.message = os.str();
    return out;
  }
  const int n = p.n_cols(), m = p.n_rows();
  out.primal.assign(static_cast<std::size_t>(n), 0.0);
  out.bound_duals.assign(static_cast<std::size_t>(n), 0.0);
  out.col_status.assign(static_cast<std::size_t>(n), BasisStatus::at_lower);
  out.row_duals.assign(static_cast<std::size_t>(m), 0.0);
  out.row_status.assign(static_cast<std::size_t>(m), BasisStatus::basic);

  BlockStructure bs;
  if (opts.decompose) {
    bs = find_blocks(p);
  } else {
    BlockStructure all = find_blocks(p);
    bs.free_cols = all.free_cols;
    if (m > 0) {
      bs.rows.emplace_back();
      bs.cols.emplace_back();
      for (int i = 0; i < m; ++i) bs.rows[0].push_back(i);
      for (auto& c : all.cols) bs.cols[0].insert(bs.cols[0].end(), c.begin(), c.end());
      std::sort(bs.cols[0].begin(), bs.cols[0].end());
    }
  }
  const int nb = static_cast<int>(bs.rows.size());
  std::vector<SolveStatus> status(static_cast<std::size_t>(nb), SolveStatus::optimal);
  std::vector<long> iters(static_cast<std::size_t>(nb), 0);
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (int b = 0; b < nb; ++b) solve_block(p, bs.rows[b], bs.cols[b], opts, out, status[b], iters[b]);
  } else {
    for (int b = 0; b < nb; ++b) solve_block(p, bs.rows[b], bs.cols[b], opts, out, status[b], iters[b]);
  }
  SolveStatus st = SolveStatus::optimal;
  for (int b = 0; b < nb; ++b) {
    st = merge_status(st, status[b]);
    out.iterations += iters[b];
  }
  for (int j : bs.free_cols) st = merge_status(st, solve_free_column(p, j, out));
  out.n_blocks = nb;
  out.status = st;
  if (st != SolveStatus::optimal) {
    out.message = std::string("solver stopped: ") + to_string(st);
    return out;
  }
  double obj = 0.0;
  for (int j = 0; j < n; ++j) obj += p.cost(j) * out.primal[j];
  out.objective = obj;
  return out;
}

}  // namespace

SolveResult solve(const LpProblem& p, const SolveOptions& opts) { return solve_impl(p, opts, opts.parallel); }

SolveResult solve_serial(const LpProblem& p, SolveOptions opts) { return solve_impl(p, opts, false); }

}  // namespace btsa
