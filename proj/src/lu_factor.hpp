#pragma once

#include <utility>
#include <vector>

namespace btsa::detail {

using SparseVec = std::vector<std::pair<int, double>>;

/// Sparse LU of a square basis matrix with Markowitz pivot selection and a
/// threshold test, plus a product-form eta file for basis updates.
///
/// Rows are constraint rows; columns are basis positions. ftran maps a
/// row-indexed right-hand side to a position-indexed solution, btran maps a
/// position-indexed vector to row-indexed multipliers.
class LuFactor {
 public:
  struct Failure {
    std::vector<int> positions;  // basis positions left without a pivot
    std::vector<int> rows;       // rows left without a pivot
  };

  /// Factorizes the m x m matrix whose column j is cols[j]. Returns false and
  /// fills failure() when the matrix is numerically singular.
  bool factorize(int m, const std::vector<SparseVec>& cols);

  const Failure& failure() const { return failure_; }

  void ftran(std::vector<double>& x) const;  // in: by row, out: by position
  void btran(std::vector<double>& y) const;  // in: by position, out: by row

  /// Records the basis change where `alpha` (= B^-1 a_q, by position) enters at `pos`.
  void push_eta(int pos, const std::vector<double>& alpha, double drop_tol);
  int n_etas() const { return static_cast<int>(etas_.size()); }
  long fill() const { return fill_; }

 private:
  struct Eta {
    int pos;
    double pivot;
    SparseVec entries;  // excludes pos
  };

  int m_ = 0;
  std::vector<int> piv_row_, piv_pos_;
  std::vector<double> diag_;
  std::vector<SparseVec> lcol_;  // multipliers per step (row, l)
  std::vector<SparseVec> urow_;  // off-diagonal U entries per step (position, value)
  std::vector<Eta> etas_;
  Failure failure_;
  long fill_ = 0;
  mutable std::vector<double> work_;
};

}  // namespace btsa::detail
