#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "btsa/lp.hpp"

namespace btsa {

int LpProblem::add_column(std::string label, double cost, double lower, double upper) {
  cost_.push_back(cost);
  lower_.push_back(lower);
  upper_.push_back(upper);
  col_label_.push_back(std::move(label));
  return n_cols() - 1;
}

int LpProblem::add_row(std::string label, Sense sense, double rhs,
                       std::span<const std::pair<int, double>> entries) {
  for (auto [j, v] : entries) {
    row_col_.push_back(j);
    row_val_.push_back(v);
  }
  row_start_.push_back(static_cast<int>(row_col_.size()));
  sense_.push_back(sense);
  rhs_.push_back(rhs);
  row_label_.push_back(std::move(label));
  return n_rows() - 1;
}

void LpProblem::scale_row(int i, double factor) {
  for (int t = row_start_[i]; t < row_start_[i + 1]; ++t) row_val_[t] *= factor;
  rhs_[i] *= factor;
  if (factor < 0.0 && sense_[i] != Sense::eq) sense_[i] = sense_[i] == Sense::le ? Sense::ge : Sense::le;
}

std::vector<std::string> LpProblem::check() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> labels;
  for (int j = 0; j < n_cols(); ++j) {
    if (std::isnan(cost_[j]) || std::isinf(cost_[j])) out.push_back("non-finite cost in column " + col_label_[j]);
    if (std::isnan(lower_[j]) || std::isnan(upper_[j]) || lower_[j] == kInf || upper_[j] == -kInf)
      out.push_back("invalid bound in column " + col_label_[j]);
    else if (lower_[j] > upper_[j])
      out.push_back("lower > upper in column " + col_label_[j]);
    if (!labels.insert(col_label_[j]).second) out.push_back("duplicate column label " + col_label_[j]);
  }
  labels.clear();
  for (int i = 0; i < n_rows(); ++i) {
    if (row_start_[i + 1] == row_start_[i]) out.push_back("empty row " + row_label_[i]);
    if (!std::isfinite(rhs_[i])) out.push_back("non-finite rhs in row " + row_label_[i]);
    for (int t = row_start_[i]; t < row_start_[i + 1]; ++t) {
      if (row_col_[t] < 0 || row_col_[t] >= n_cols()) out.push_back("column index out of range in row " + row_label_[i]);
      if (!std::isfinite(row_val_[t])) out.push_back("non-finite coefficient in row " + row_label_[i]);
    }
    if (!labels.insert(row_label_[i]).second) out.push_back("duplicate row label " + row_label_[i]);
  }
  return out;
}

std::string LpProblem::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "NAME btsa\nROWS\n";
  for (int i = 0; i < n_rows(); ++i) {
    const char* s = sense_[i] == Sense::le ? "L" : sense_[i] == Sense::ge ? "G" : "E";
    os << " " << s << " " << row_label_[i] << " " << rhs_[i] << "\n";
  }
  std::vector<std::vector<std::pair<int, double>>> cols(static_cast<std::size_t>(n_cols()));
  for (int i = 0; i < n_rows(); ++i)
    for (int t = row_start_[i]; t < row_start_[i + 1]; ++t) cols[row_col_[t]].emplace_back(i, row_val_[t]);
  os << "COLUMNS\n";
  for (int j = 0; j < n_cols(); ++j) {
    os << " " << col_label_[j] << " OBJ " << cost_[j] << "\n";
    for (auto [i, v] : cols[j]) os << " " << col_label_[j] << " " << row_label_[i] << " " << v << "\n";
  }
  os << "BOUNDS\n";
  for (int j = 0; j < n_cols(); ++j) os << " " << col_label_[j] << " " << lower_[j] << " " << upper_[j] << "\n";
  os << "ENDATA\n";
  return os.str();
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::iteration_limit: return "iteration_limit";
    case SolveStatus::invalid_input: return "invalid_input";
  }
  return "?";
}

const char* to_string(BasisStatus s) {
  switch (s) {
    case BasisStatus::basic: return "basic";
    case BasisStatus::at_lower: return "at_lower";
    case BasisStatus::at_upper: return "at_upper";
  }
  return "?";
}

BlockStructure find_blocks(const LpProblem& p) {
  const int m = p.n_rows(), n = p.n_cols();
  // union-find over rows; a column joins every row it appears in
  std::vector<int> parent(static_cast<std::size_t>(m));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<int> first_row(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < m; ++i)
    for (int j : p.row_cols(i)) {
      if (first_row[j] < 0) {
        first_row[j] = i;
      } else {
        int a = find(first_row[j]), b = find(i);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  BlockStructure bs;
  std::vector<int> block_of_root(static_cast<std::size_t>(m), -1);
  std::vector<int> block_of_row(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    int r = find(i);
    if (block_of_root[r] < 0) {
      block_of_root[r] = static_cast<int>(bs.rows.size());
      bs.rows.emplace_back();
      bs.cols.emplace_back();
    }
    block_of_row[i] = block_of_root[r];
    bs.rows[block_of_row[i]].push_back(i);
  }
  for (int j = 0; j < n; ++j) {
    if (first_row[j] < 0)
      bs.free_cols.push_back(j);
    else
      bs.cols[block_of_row[first_row[j]]].push_back(j);
  }
  return bs;
}

}  // namespace btsa
