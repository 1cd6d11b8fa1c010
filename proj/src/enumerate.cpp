#include "btsa/enumerate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "btsa/psom.hpp"

namespace btsa {

namespace {

constexpr int kMaxStirling = 20;

const std::vector<std::vector<std::uint64_t>>& stirling_table() {
  static const auto table = [] {
    std::vector<std::vector<std::uint64_t>> s(kMaxStirling + 1, std::vector<std::uint64_t>(kMaxStirling + 1, 0));
    s[0][0] = 1;
    for (int n = 1; n <= kMaxStirling; ++n)
      for (int k = 1; k <= n; ++k) s[n][k] = static_cast<std::uint64_t>(k) * s[n - 1][k] + s[n - 1][k - 1];
    return s;
  }();
  return table;
}

}  // namespace

std::uint64_t stirling(int n, int k) {
  if (n < 0 || n > kMaxStirling || k < 0 || k > n)
    throw std::out_of_range("stirling(" + std::to_string(n) + ", " + std::to_string(k) + ") needs 0 <= k <= n <= 20");
  return stirling_table()[n][k];
}

std::uint64_t bell(int n) {
  if (n < 0 || n > kMaxStirling) throw std::out_of_range("bell(" + std::to_string(n) + ") needs 0 <= n <= 20");
  std::uint64_t b = 0;
  for (int k = 0; k <= n; ++k) b += stirling(n, k);
  return b;
}

std::vector<std::vector<int>> SetPartition::blocks() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n_blocks));
  for (int i = 0; i < static_cast<int>(rgs.size()); ++i) out[rgs[i]].push_back(i);
  return out;
}

SetPartition canonical_partition(std::span<const int> labels) {
  SetPartition p;
  std::vector<std::pair<int, int>> seen;
  for (int l : labels) {
    auto it = std::find_if(seen.begin(), seen.end(), [l](const auto& e) { return e.first == l; });
    if (it == seen.end()) {
      seen.emplace_back(l, p.n_blocks++);
      p.rgs.push_back(p.n_blocks - 1);
    } else {
      p.rgs.push_back(it->second);
    }
  }
  return p;
}

EnumerationGuard::EnumerationGuard(int n, std::uint64_t count)
    : std::length_error("refusing to enumerate partitions of " + std::to_string(n) + " items (" +
                        std::to_string(count) + " partitions); limit is n <= " +
                        std::to_string(kMaxEnumerationSize)),
      count_(count) {}

namespace {

void check_guard(int n) {
  if (n < 0) throw std::out_of_range("partition size must be >= 0");
  if (n > kMaxEnumerationSize) throw EnumerationGuard(n, n <= kMaxStirling ? bell(n) : 0);
}

void rgs_dfs(SetPartition& p, int i, int n, int k, const std::function<void(const SetPartition&)>& visit) {
  if (i == n) {
    if (k == 0 || p.n_blocks == k) visit(p);
    return;
  }
  // not enough positions left to open the missing blocks
  if (k > 0 && p.n_blocks + (n - i) < k) return;
  for (int j = 0; j <= p.n_blocks; ++j) {
    if (k > 0 && j == p.n_blocks && p.n_blocks == k) break;
    p.rgs[i] = j;
    const bool opened = j == p.n_blocks;
    if (opened) ++p.n_blocks;
    rgs_dfs(p, i + 1, n, k, visit);
    if (opened) --p.n_blocks;
  }
}

}  // namespace

void for_each_partition(int n, int k, const std::function<void(const SetPartition&)>& visit) {
  check_guard(n);
  if (k < 0 || k > n) return;
  SetPartition p;
  p.rgs.assign(static_cast<std::size_t>(n), 0);
  if (n == 0) {
    if (k == 0) visit(p);
    return;
  }
  p.n_blocks = 1;
  rgs_dfs(p, 1, n, k, visit);
}

std::vector<SetPartition> enumerate_partitions(int n, int k) {
  std::vector<SetPartition> out;
  for_each_partition(n, k, [&](const SetPartition& p) { out.push_back(p); });
  return out;
}

bool is_refinement(const SetPartition& p, const SetPartition& q) {
  if (p.rgs.size() != q.rgs.size()) throw std::invalid_argument("is_refinement: partitions of different sizes");
  std::vector<int> image(static_cast<std::size_t>(p.n_blocks), -1);
  for (std::size_t i = 0; i < p.rgs.size(); ++i) {
    int& img = image[p.rgs[i]];
    if (img < 0)
      img = q.rgs[i];
    else if (img != q.rgs[i])
      return false;
  }
  return true;
}

double merit_order_cost(const SystemSpec& spec, double demand, std::span<const double> available) {
  const int G = static_cast<int>(spec.generators.size());
  double cost = 0.0, rest = demand;
  std::vector<double> lo(G), room(G);
  for (int g = 0; g < G; ++g) {
    const auto& gen = spec.generators[g];
    lo[g] = gen.kind == GenKind::wind ? std::min(gen.p_min, available[g]) : gen.p_min;
    room[g] = available[g] - lo[g];
    cost += gen.variable_cost * lo[g];
    rest -= lo[g];
  }
  if (rest < -1e-9) return std::numeric_limits<double>::infinity();
  std::vector<int> order(G);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return spec.generators[a].variable_cost < spec.generators[b].variable_cost; });
  for (int g : order) {
    if (rest <= 0.0) break;
    if (spec.generators[g].variable_cost >= spec.nsp_cost) break;
    const double take = std::min(rest, room[g]);
    cost += spec.generators[g].variable_cost * take;
    rest -= take;
  }
  if (rest > 0.0) cost += spec.nsp_cost * rest;
  return cost;
}

namespace {

// Allocation-free merit-order evaluation with the unit order fixed up front.
struct MeritOrder {
  std::vector<int> order;
  std::vector<double> cost, p_min;
  std::vector<char> wind;
  double nsp = 0.0;

  explicit MeritOrder(const SystemSpec& spec) : nsp(spec.nsp_cost) {
    const int G = static_cast<int>(spec.generators.size());
    order.resize(G);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return spec.generators[a].variable_cost < spec.generators[b].variable_cost; });
    for (const auto& g : spec.generators) {
      cost.push_back(g.variable_cost);
      p_min.push_back(g.p_min);
      wind.push_back(g.kind == GenKind::wind);
    }
  }

  double operator()(double demand, const double* available) const {
    double total = 0.0, rest = demand;
    for (std::size_t g = 0; g < cost.size(); ++g) {
      const double lo = wind[g] ? std::min(p_min[g], available[g]) : p_min[g];
      total += cost[g] * lo;
      rest -= lo;
    }
    if (rest < -1e-9) return std::numeric_limits<double>::infinity();
    for (int g : order) {
      if (rest <= 0.0 || cost[g] >= nsp) break;
      const double lo = wind[g] ? std::min(p_min[g], available[g]) : p_min[g];
      const double take = std::min(rest, available[g] - lo);
      total += cost[g] * take;
      rest -= take;
    }
    if (rest > 0.0) total += nsp * rest;
    return total;
  }
};

struct Data {
  const ValidatedCase& c;
  MeritOrder merit;
  int n = 0, G = 0;
  std::vector<double> demand;  // total per hour
  std::vector<double> avail;   // [hour * G + g]
  std::vector<int> basis;      // basis partition label per hour
  double full = 0.0;
};

struct Partial {
  std::vector<CensusRow> rows;
  int n_cross_checks = 0;
  double max_cross_check_error = 0.0;
};

std::uint64_t fnv1a(std::span<const int> v) {
  std::uint64_t h = 14695981039346656037ULL;
  for (int x : v) {
    h ^= static_cast<std::uint64_t>(x) + 1;
    h *= 1099511628211ULL;
  }
  return h;
}

class Walker {
 public:
  Walker(const Data& d, const CensusOptions& o) : d_(d), o_(o) {
    rgs_.assign(d.n, 0);
    sum_d_.assign(d.n, 0.0);
    sum_a_.assign(static_cast<std::size_t>(d.n) * d.G, 0.0);
    size_.assign(d.n, 0);
    first_.assign(d.n, 0);
    mean_a_.assign(d.G, 0.0);
    out_.rows.resize(d.n);
    for (int k = 1; k <= d.n; ++k) out_.rows[k - 1].k = k;
  }

  // Walks every completion of the given prefix.
  Partial run(std::span<const int> prefix) {
    for (int i = 0; i < static_cast<int>(prefix.size()); ++i) assign(i, prefix[i]);
    dfs(static_cast<int>(prefix.size()));
    return std::move(out_);
  }

 private:
  void assign(int i, int b) {
    rgs_[i] = b;
    if (b == m_) {
      first_[m_] = i;
      ++m_;
    }
    ++size_[b];
  }
  void unassign(int b) {
    if (--size_[b] == 0) --m_;
  }

  void dfs(int i) {
    if (i == d_.n) {
      leaf();
      return;
    }
    const int top = m_;
    for (int b = 0; b <= top; ++b) {
      assign(i, b);
      dfs(i + 1);
      unassign(b);
    }
  }

  // Block sums are rebuilt at each leaf in hour order, so the parallel and
  // serial walks produce bit-identical costs.
  void leaf() {
    std::fill(sum_d_.begin(), sum_d_.begin() + m_, 0.0);
    std::fill(sum_a_.begin(), sum_a_.begin() + static_cast<std::ptrdiff_t>(m_) * d_.G, 0.0);
    for (int i = 0; i < d_.n; ++i) {
      sum_d_[rgs_[i]] += d_.demand[i];
      for (int g = 0; g < d_.G; ++g) sum_a_[rgs_[i] * d_.G + g] += d_.avail[i * d_.G + g];
    }
    double cost = 0.0;
    for (int b = 0; b < m_; ++b) {
      const double w = size_[b];
      for (int g = 0; g < d_.G; ++g) mean_a_[g] = sum_a_[b * d_.G + g] / w;
      cost += w * d_.merit(sum_d_[b] / w, mean_a_.data());
    }
    auto& row = out_.rows[m_ - 1];
    ++row.n_partitions;
    const double scale = std::max(std::abs(d_.full), 1.0);
    if (std::abs(cost - d_.full) <= o_.tol * scale) {
      ++row.n_zero_error;
      bool refines = true;
      for (int i = 0; i < d_.n && refines; ++i) refines = d_.basis[i] == d_.basis[first_[rgs_[i]]];
      row.n_zero_error_refining += refines;
      if (static_cast<int>(row.exemplars.size()) < o_.max_exemplars) row.exemplars.push_back({rgs_, m_});
    }
    if (o_.sample_every > 0 && fnv1a(rgs_) % static_cast<std::uint64_t>(o_.sample_every) == 0) cross_check(cost);
  }

  void cross_check(double closed_form) {
    const auto clusters = cluster_by_label(d_.c, rgs_);
    const auto agg = build_aggregated(d_.c, clusters_to_periods(clusters), ModelVariant::ed);
    SolveOptions so;
    so.parallel = false;
    const auto r = solve(agg.lp, so);
    const double err = r.optimal() ? std::abs(r.objective - closed_form) / std::max(std::abs(closed_form), 1.0)
                                   : std::numeric_limits<double>::infinity();
    ++out_.n_cross_checks;
    out_.max_cross_check_error = std::max(out_.max_cross_check_error, err);
  }

  const Data& d_;
  const CensusOptions& o_;
  std::vector<int> rgs_;
  int m_ = 0;
  std::vector<double> sum_d_, sum_a_, mean_a_;
  std::vector<int> size_, first_;
  Partial out_;
};

Data prepare(const ValidatedCase& c, const CensusOptions& o, CensusResult& res) {
  const int n = c.horizon();
  check_guard(n);
  Data d{c, MeritOrder(c.spec()), 0, 0, {}, {}, {}, 0.0};
  d.n = n;
  d.G = c.n_generators();
  for (int k = 0; k < n; ++k) {
    double t = 0.0;
    for (int b = 0; b < c.n_buses(); ++b) t += c.demand(b, k);
    d.demand.push_back(t);
    for (int g = 0; g < d.G; ++g) d.avail.push_back(c.available(g, k));
  }
  for (int k = 0; k < n; ++k)
    d.full += d.merit(d.demand[k], d.avail.data() + static_cast<std::ptrdiff_t>(k) * d.G);

  const auto full = build_full(c, ModelVariant::ed);
  const auto r = solve(full.lp);
  if (!r.optimal()) throw std::runtime_error(std::string("census full solve: ") + to_string(r.status));
  const auto sig = hour_signatures(r, full.index, o.mode, o.q, false);
  const auto clusters = cluster_hours(c, sig);
  std::vector<int> label(n);
  for (std::size_t i = 0; i < clusters.size(); ++i)
    for (int k : clusters[i].members) label[k] = static_cast<int>(i);
  res.basis_partition = canonical_partition(label);
  d.basis = res.basis_partition.rgs;
  res.n = n;
  res.obj_full = d.full;
  res.obj_full_simplex = r.objective;
  return d;
}

void finish(const Data& d, const CensusOptions& o, std::vector<Partial>& parts, CensusResult& res) {
  res.rows.resize(d.n);
  for (int k = 1; k <= d.n; ++k) res.rows[k - 1].k = k;
  for (auto& p : parts) {
    for (int k = 0; k < d.n; ++k) {
      auto& dst = res.rows[k];
      const auto& src = p.rows[k];
      dst.n_partitions += src.n_partitions;
      dst.n_zero_error += src.n_zero_error;
      dst.n_zero_error_refining += src.n_zero_error_refining;
      for (const auto& e : src.exemplars)
        if (static_cast<int>(dst.exemplars.size()) < o.max_exemplars) dst.exemplars.push_back(e);
    }
    res.n_cross_checks += p.n_cross_checks;
    res.max_cross_check_error = std::max(res.max_cross_check_error, p.max_cross_check_error);
  }
  for (const auto& row : res.rows) {
    res.n_partitions += row.n_partitions;
    res.n_zero_error += row.n_zero_error;
    res.n_zero_error_not_refining += row.n_zero_error - row.n_zero_error_refining;
    if (res.min_zero_error_k == 0 && row.n_zero_error > 0) {
      res.min_zero_error_k = row.k;
      res.unique_at_min = row.n_zero_error == 1;
      res.basis_is_unique_minimum =
          res.unique_at_min && row.exemplars.size() == 1 && row.exemplars[0] == res.basis_partition;
    }
  }
  // the basis partition is zero-error iff it shows up among the zero-error
  // partitions of its size; evaluate it directly instead of relying on exemplars
  const auto blocks = res.basis_partition.blocks();
  double cost = 0.0;
  std::vector<double> mean(d.G);
  for (const auto& b : blocks) {
    double sd = 0.0;
    std::fill(mean.begin(), mean.end(), 0.0);
    for (int i : b) {
      sd += d.demand[i];
      for (int g = 0; g < d.G; ++g) mean[g] += d.avail[i * d.G + g];
    }
    const double w = static_cast<double>(b.size());
    for (double& x : mean) x /= w;
    cost += w * d.merit(sd / w, mean.data());
  }
  res.basis_zero_error = std::abs(cost - d.full) <= o.tol * std::max(std::abs(d.full), 1.0);
}

std::vector<std::vector<int>> prefixes(int n, int depth) {
  std::vector<std::vector<int>> out;
  depth = std::clamp(depth, 1, n);
  for_each_partition(depth, 0, [&](const SetPartition& p) { out.push_back(p.rgs); });
  return out;
}

}  // namespace

CensusResult zero_error_census(const ValidatedCase& c, const CensusOptions& opts) {
  CensusResult res;
  const Data d = prepare(c, opts, res);
  if (d.n == 0) return res;
  const auto pre = prefixes(d.n, opts.prefix_depth);
  std::vector<Partial> parts(pre.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < static_cast<int>(pre.size()); ++i) parts[i] = Walker(d, opts).run(pre[i]);
  finish(d, opts, parts, res);
  return res;
}

CensusResult zero_error_census_serial(const ValidatedCase& c, const CensusOptions& opts) {
  CensusResult res;
  const Data d = prepare(c, opts, res);
  if (d.n == 0) return res;
  std::vector<Partial> parts;
  const int first[] = {0};
  parts.push_back(Walker(d, opts).run(first));
  finish(d, opts, parts, res);
  return res;
}

}  // namespace btsa
