#include "lu_factor.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace btsa::detail {

namespace {
constexpr double kThreshold = 0.01;
constexpr double kSingularTol = 1e-11;
constexpr int kSearchDepth = 4;
}  // namespace

bool LuFactor::factorize(int m, const std::vector<SparseVec>& cols) {
  m_ = m;
  piv_row_.clear();
  piv_pos_.clear();
  diag_.clear();
  lcol_.clear();
  urow_.clear();
  etas_.clear();
  failure_ = {};
  fill_ = 0;
  work_.assign(static_cast<std::size_t>(m), 0.0);

  // Active submatrix: values row-wise, patterns column-wise.
  std::vector<SparseVec> rows(static_cast<std::size_t>(m));
  std::vector<std::vector<int>> colpat(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    for (auto [r, v] : cols[j]) {
      if (v == 0.0) continue;
      rows[r].emplace_back(j, v);
      colpat[j].push_back(r);
    }
  }
  std::vector<int> rcount(static_cast<std::size_t>(m)), ccount(static_cast<std::size_t>(m));
  std::vector<char> row_alive(static_cast<std::size_t>(m), 1), col_alive(static_cast<std::size_t>(m), 1);
  std::set<std::pair<int, int>> by_col, by_row;
  for (int i = 0; i < m; ++i) {
    rcount[i] = static_cast<int>(rows[i].size());
    ccount[i] = static_cast<int>(colpat[i].size());
    by_row.emplace(rcount[i], i);
    by_col.emplace(ccount[i], i);
  }
  auto set_rcount = [&](int r, int c) {
    by_row.erase({rcount[r], r});
    rcount[r] = c;
    by_row.emplace(c, r);
  };
  auto set_ccount = [&](int j, int c) {
    by_col.erase({ccount[j], j});
    ccount[j] = c;
    by_col.emplace(c, j);
  };
  auto find_in_row = [&](int r, int j) -> int {
    const auto& row = rows[r];
    for (std::size_t t = 0; t < row.size(); ++t)
      if (row[t].first == j) return static_cast<int>(t);
    return -1;
  };
  auto col_max = [&](int j) {
    double mx = 0.0;
    for (int r : colpat[j]) {
      if (!row_alive[r]) continue;
      int t = find_in_row(r, j);
      if (t >= 0) mx = std::max(mx, std::abs(rows[r][t].second));
    }
    return mx;
  };

  std::vector<int> mark(static_cast<std::size_t>(m), -1);
  for (int step = 0; step < m; ++step) {
    // Markowitz search over the sparsest columns and rows.
    long best_cost = -1;
    double best_abs = 0.0;
    int best_r = -1, best_j = -1;
    auto consider = [&](int r, int j, double v, double cmax) {
      double a = std::abs(v);
      if (a < kSingularTol || a < kThreshold * cmax) return;
      long cost = static_cast<long>(rcount[r] - 1) * static_cast<long>(ccount[j] - 1);
      if (best_r < 0 || cost < best_cost || (cost == best_cost && a > best_abs)) {
        best_cost = cost;
        best_abs = a;
        best_r = r;
        best_j = j;
      }
    };
    int seen = 0;
    for (auto it = by_col.begin(); it != by_col.end() && seen < kSearchDepth; ++it) {
      int j = it->second;
      if (ccount[j] == 0) continue;
      ++seen;
      double cmax = col_max(j);
      for (int r : colpat[j]) {
        if (!row_alive[r]) continue;
        int t = find_in_row(r, j);
        if (t >= 0) consider(r, j, rows[r][t].second, cmax);
      }
      if (best_cost == 0) break;
    }
    if (best_cost != 0) {
      seen = 0;
      for (auto it = by_row.begin(); it != by_row.end() && seen < kSearchDepth; ++it) {
        int r = it->second;
        if (rcount[r] == 0) continue;
        ++seen;
        for (auto [j, v] : rows[r]) consider(r, j, v, col_max(j));
        if (best_cost == 0) break;
      }
    }
    if (best_r < 0) {
      // Singular: a full scan of what remains before giving up.
      for (auto [cnt, j] : by_col) {
        if (cnt == 0) continue;
        double cmax = col_max(j);
        for (int r : colpat[j]) {
          if (!row_alive[r]) continue;
          int t = find_in_row(r, j);
          if (t >= 0) consider(r, j, rows[r][t].second, cmax);
        }
      }
    }
    if (best_r < 0) {
      for (int j = 0; j < m; ++j)
        if (col_alive[j]) failure_.positions.push_back(j);
      for (int r = 0; r < m; ++r)
        if (row_alive[r]) failure_.rows.push_back(r);
      return false;
    }

    const int p = best_r, q = best_j;
    SparseVec prow;
    double pivot = 0.0;
    for (auto [j, v] : rows[p]) {
      if (j == q)
        pivot = v;
      else
        prow.emplace_back(j, v);
    }
    row_alive[p] = 0;
    col_alive[q] = 0;
    by_row.erase({rcount[p], p});
    by_col.erase({ccount[q], q});
    for (auto [j, v] : prow) set_ccount(j, ccount[j] - 1);

    SparseVec lentries;
    for (int r : colpat[q]) {
      if (!row_alive[r]) continue;
      int t = find_in_row(r, q);
      if (t < 0) continue;
      auto& row = rows[r];
      const double l = row[t].second / pivot;
      row[t] = row.back();
      row.pop_back();
      lentries.emplace_back(r, l);
      for (std::size_t s = 0; s < row.size(); ++s) mark[row[s].first] = static_cast<int>(s);
      for (auto [j, v] : prow) {
        if (mark[j] >= 0) {
          row[mark[j]].second -= l * v;
        } else {
          row.emplace_back(j, -l * v);
          colpat[j].push_back(r);
          set_ccount(j, ccount[j] + 1);
          ++fill_;
        }
      }
      for (auto& e : row) mark[e.first] = -1;
      set_rcount(r, static_cast<int>(row.size()));
    }
    piv_row_.push_back(p);
    piv_pos_.push_back(q);
    diag_.push_back(pivot);
    lcol_.push_back(std::move(lentries));
    urow_.push_back(std::move(prow));
    rows[p].clear();
  }
  return true;
}

void LuFactor::ftran(std::vector<double>& x) const {
  auto& w = work_;
  w = x;
  for (int k = 0; k < m_; ++k) {
    const double wp = w[piv_row_[k]];
    if (wp == 0.0) continue;
    for (auto [r, l] : lcol_[k]) w[r] -= l * wp;
  }
  for (int k = m_ - 1; k >= 0; --k) {
    double s = w[piv_row_[k]];
    for (auto [j, v] : urow_[k]) s -= v * x[j];
    x[piv_pos_[k]] = s / diag_[k];
  }
  // Back substitution reads only positions pivoted later, which are already
  // overwritten with solution values.
  for (const auto& e : etas_) {
    double xp = x[e.pos];
    if (xp == 0.0) continue;
    xp /= e.pivot;
    for (auto [i, a] : e.entries) x[i] -= a * xp;
    x[e.pos] = xp;
  }
}

void LuFactor::btran(std::vector<double>& y) const {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = y[it->pos];
    for (auto [i, a] : it->entries) s -= a * y[i];
    y[it->pos] = s / it->pivot;
  }
  auto& c = work_;
  c = y;
  for (int k = 0; k < m_; ++k) {
    const double z = c[piv_pos_[k]] / diag_[k];
    y[piv_row_[k]] = z;
    if (z == 0.0) continue;
    for (auto [j, v] : urow_[k]) c[j] -= v * z;
  }
  for (int k = m_ - 1; k >= 0; --k) {
    double s = y[piv_row_[k]];
    for (auto [r, l] : lcol_[k]) s -= l * y[r];
    y[piv_row_[k]] = s;
  }
}

void LuFactor::push_eta(int pos, const std::vector<double>& alpha, double drop_tol) {
  Eta e{pos, alpha[pos], {}};
  for (int i = 0; i < m_; ++i)
    if (i != pos && std::abs(alpha[i]) > drop_tol) e.entries.emplace_back(i, alpha[i]);
  etas_.push_back(std::move(e));
}

}  // namespace btsa::detail
