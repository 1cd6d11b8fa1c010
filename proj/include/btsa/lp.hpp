#pragma once

#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace btsa {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { le, eq, ge };

/// Bounded-variable LP, minimize c'x subject to sparse rows and column bounds.
/// Rows are stored compressed; column and row labels must be unique.
class LpProblem {
 public:
  int add_column(std::string label, double cost, double lower, double upper);
  int add_row(std::string label, Sense sense, double rhs, std::span<const std::pair<int, double>> entries);
  int add_row(std::string label, Sense sense, double rhs, std::initializer_list<std::pair<int, double>> entries) {
    return add_row(std::move(label), sense, rhs, std::span<const std::pair<int, double>>(entries.begin(), entries.size()));
  }

  int n_cols() const { return static_cast<int>(cost_.size()); }
  int n_rows() const { return static_cast<int>(rhs_.size()); }
  int n_nonzeros() const { return static_cast<int>(row_col_.size()); }

  double cost(int j) const { return cost_[j]; }
  double lower(int j) const { return lower_[j]; }
  double upper(int j) const { return upper_[j]; }
  const std::string& col_label(int j) const { return col_label_[j]; }

  Sense sense(int i) const { return sense_[i]; }
  double rhs(int i) const { return rhs_[i]; }
  const std::string& row_label(int i) const { return row_label_[i]; }
  std::span<const int> row_cols(int i) const {
    return {row_col_.data() + row_start_[i], static_cast<std::size_t>(row_start_[i + 1] - row_start_[i])};
  }
  std::span<const double> row_vals(int i) const {
    return {row_val_.data() + row_start_[i], static_cast<std::size_t>(row_start_[i + 1] - row_start_[i])};
  }

  void set_cost(int j, double c) { cost_[j] = c; }
  void set_bounds(int j, double lo, double up) {
    lower_[j] = lo;
    upper_[j] = up;
  }
  void set_rhs(int i, double b) { rhs_[i] = b; }
  void scale_row(int i, double factor);

  /// Structural problems (non-finite data, empty rows, crossed bounds,
  /// duplicate labels). Empty when the problem is well formed.
  std::vector<std::string> check() const;

  /// Plain-text MPS-like dump for debugging.
  std::string to_text() const;

 private:
  std::vector<double> cost_, lower_, upper_;
  std::vector<std::string> col_label_;
  std::vector<Sense> sense_;
  std::vector<double> rhs_;
  std::vector<std::string> row_label_;
  std::vector<int> row_start_{0};
  std::vector<int> row_col_;
  std::vector<double> row_val_;
};

enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit, invalid_input };
enum class BasisStatus { basic, at_lower, at_upper };

const char* to_string(SolveStatus s);
const char* to_string(BasisStatus s);

enum class PricingRule {
  dantzig,      ///< most negative reduced cost, lowest index on ties; falls back to Bland on stalling
  lowest_index  ///< Bland's rule throughout
};

struct SolveOptions {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  double pivot_tol = 1e-9;
  int max_iterations = 1000000;
  int refactor_period = 100;
  PricingRule pricing = PricingRule::dantzig;
  /// Split the problem into connected row/column blocks and solve each on its own.
  bool decompose = true;
  /// Solve independent blocks with OpenMP.
  bool parallel = true;
};

struct SolveResult {
  SolveStatus status = SolveStatus::invalid_input;
  double objective = 0.0;
  std::vector<double> primal;       // per column
  std::vector<double> row_duals;    // per row, d(objective)/d(rhs)
  std::vector<double> bound_duals;  // per column, reduced cost c_j - y'A_j
  std::vector<BasisStatus> col_status;
  std::vector<BasisStatus> row_status;
  long iterations = 0;
  int n_blocks = 0;
  std::string message;

  bool optimal() const { return status == SolveStatus::optimal; }
};

/// Bundled bounded-variable revised simplex. Deterministic: identical input
/// yields identical output, independent of the number of threads.
SolveResult solve(const LpProblem& p, const SolveOptions& opts = {});

/// Solves each connected block in sequence; reference for the OpenMP path.
SolveResult solve_serial(const LpProblem& p, SolveOptions opts = {});

/// Connected components of the row/column incidence graph. Each block lists
/// its rows and columns in increasing order; columns that appear in no row are
/// returned separately.
struct BlockStructure {
  std::vector<std::vector<int>> rows;
  std::vector<std::vector<int>> cols;
  std::vector<int> free_cols;
};
BlockStructure find_blocks(const LpProblem& p);

}  // namespace btsa
