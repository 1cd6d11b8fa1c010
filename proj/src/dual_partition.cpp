#include "btsa/dual_partition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <unordered_map>

namespace btsa {

McDecomposition decompose_mc(double mc, double vc_nsp, double vc_t, double vc_w, double tol, int bound) {
  if (!(vc_nsp > vc_t && vc_t > vc_w && vc_w >= 0.0))
    throw std::invalid_argument("decompose_mc needs vc_nsp > vc_t > vc_w >= 0");
  std::optional<McDecomposition> best[2];  // [0] sign-coupled, [1] any
  auto better = [](const McDecomposition& x, const McDecomposition& y) {
    const int sx = std::abs(x.a) + std::abs(x.b) + std::abs(x.c);
    const int sy = std::abs(y.a) + std::abs(y.b) + std::abs(y.c);
    if (sx != sy) return sx < sy;
    if (std::abs(x.a) != std::abs(y.a)) return std::abs(x.a) < std::abs(y.a);
    return std::abs(x.b) < std::abs(y.b);
  };
  for (int a = 0; a <= 1; ++a)
    for (int b = -bound; b <= bound; ++b) {
      const double rest = mc - a * vc_nsp - b * vc_t;
      const long c = vc_w > 0.0 ? std::lround(rest / vc_w) : 0;
      if (std::abs(c) > 1000000) continue;
      McDecomposition d{a, b, static_cast<int>(c), rest - static_cast<double>(c) * vc_w, true};
      if (std::abs(d.residual) > tol) continue;
      d.sign_coupled = static_cast<long>(b) * c <= 0;
      for (int k = d.sign_coupled ? 0 : 1; k < 2; ++k)
        if (!best[k] || better(d, *best[k])) best[k] = d;
    }
  if (best[0]) return *best[0];
  if (best[1]) return *best[1];
  throw NoDecomposition("marginal cost " + std::to_string(mc) + " has no integer decomposition with |b| <= " +
                        std::to_string(bound));
}

int ramp_length(double mc, double vc_t) {
  if (!(vc_t > 0.0)) throw std::invalid_argument("ramp_length needs vc_t > 0");
  return std::max(1L, std::lround(mc / vc_t));
}

std::optional<LengthRule> parse_length_rule(const std::string& s) {
  if (s == "decomposition_b") return LengthRule::decomposition_b;
  if (s == "nearest_multiple") return LengthRule::nearest_multiple;
  return std::nullopt;
}
std::string length_rule_name(LengthRule r) {
  return r == LengthRule::decomposition_b ? "decomposition_b" : "nearest_multiple";
}
std::optional<PartitionRule> parse_partition_rule(const std::string& s) {
  if (s == "algorithm1") return PartitionRule::algorithm1;
  if (s == "ramp_duals") return PartitionRule::ramp_duals;
  return std::nullopt;
}
std::string partition_rule_name(PartitionRule r) { return r == PartitionRule::algorithm1 ? "algorithm1" : "ramp_duals"; }

namespace {

struct Costs {
  double nsp, thermal, wind;
  std::vector<double> separable;  // every generator's variable cost
};

Costs reference_costs(const ValidatedCase& c) {
  const auto& spec = c.spec();
  std::optional<double> t, w;
  Costs k{spec.nsp_cost, 0.0, 0.0, {}};
  for (const auto& g : spec.generators) {
    k.separable.push_back(g.variable_cost);
    if (g.kind == GenKind::wind && !w) w = g.variable_cost;
    if (g.kind == GenKind::thermal && g.has_ramp() && !t) t = g.variable_cost;
  }
  for (const auto& g : spec.generators)
    if (g.kind == GenKind::thermal && !t) t = g.variable_cost;
  if (!t) throw std::invalid_argument("partition needs a thermal unit");
  k.thermal = *t;
  k.wind = w.value_or(0.0);
  return k;
}

class Scanner {
 public:
  Scanner(const SolveResult& r, const IndexMap& im, const ValidatedCase& c, const PartitionOptions& o)
      : r_(r), im_(im), c_(c), o_(o), costs_(reference_costs(c)), K_(im.n_slots()) {
    wind_ = c.wind_units();
    for (int g = 0; g < c.n_generators(); ++g)
      if (c.spec().generators[g].kind == GenKind::thermal && c.spec().generators[g].has_ramp()) ramping_.push_back(g);
  }

  PartitionResult run() {
    PartitionResult out;
    out.hour_flags.assign(K_, 0u);
    out.mc.resize(K_);
    for (int t = 0; t < K_; ++t)
      for (int n = 0; n < im_.n_nodes; ++n) out.mc[t].push_back(r_.row_duals[im_.balance_row(t, n)]);
    std::vector<bool> marked(K_, false);
    if (o_.rule == PartitionRule::ramp_duals)
      link_by_ramp_duals(marked);
    else
      algorithm1(out, marked);
    // maximal runs of marked hours become chunks, unmarked hours stand alone
    for (int t = 0; t < K_;) {
      int end = t;
      if (marked[t])
        while (end + 1 < K_ && marked[end + 1]) ++end;
      Chunk ch{t, end - t + 1, 0u};
      for (int k = t; k <= end; ++k) ch.flags |= out.hour_flags[k];
      out.chunks.push_back(ch);
      t = end + 1;
    }
    return out;
  }

 private:
  bool near(double x, double y) const { return std::abs(x - y) <= o_.q; }
  bool active(double dual) const { return std::abs(dual) > o_.q; }
  double mc(int t, int n) const { return r_.row_duals[im_.balance_row(t, n)]; }

  bool separable_value(double v) const {
    return std::any_of(costs_.separable.begin(), costs_.separable.end(), [&](double s) { return near(v, s); });
  }
  bool separable(int t) const {
    for (int n = 0; n < im_.n_nodes; ++n)
      if (!separable_value(mc(t, n))) return false;
    return true;
  }
  bool wind_active(int t) const {
    for (int g : wind_)
      if (active(r_.bound_duals[im_.gen_col(t, g)])) return true;
    return false;
  }
  // ramp rows linking hour t-1 and hour t
  bool rampup_active(int t) const {
    if (t <= 0 || t >= K_) return false;
    for (int g : ramping_) {
      const int row = im_.rampup_row(t, g);
      if (row >= 0 && active(r_.row_duals[row])) return true;
    }
    return false;
  }
  bool rampdown_active(int t) const {
    if (t <= 0 || t >= K_) return false;
    for (int g : ramping_) {
      const int row = im_.rampdown_row(t, g);
      if (row >= 0 && active(r_.row_duals[row])) return true;
    }
    return false;
  }

  void link_by_ramp_duals(std::vector<bool>& marked) const {
    for (int t = 1; t < K_; ++t)
      if (rampup_active(t) || rampdown_active(t)) marked[t - 1] = marked[t] = true;
  }

  static void mark(std::vector<bool>& m, int a, int b) {
    for (int k = a; k <= b; ++k) m[k] = true;
  }

  // fallback for hours the rules cannot explain: nearest separable hours on both sides
  void extend_conservatively(PartitionResult& out, std::vector<bool>& marked, int t, unsigned flag) const {
    int a = t - 1, b = t + 1;
    while (a >= 0 && !separable(a)) --a;
    while (b < K_ && !separable(b)) ++b;
    if (a < 0 || b >= K_) flag |= kBoundaryTruncated;
    a = std::max(a, 0);
    b = std::min(b, K_ - 1);
    mark(marked, a, b);
    out.hour_flags[t] |= flag;
  }

  void algorithm1(PartitionResult& out, std::vector<bool>& marked) const {
    int t = 0;
    while (t < K_) {
      if (separable(t)) {
        ++t;
        continue;
      }
      // first node whose MC is outside the separable set drives the branch
      int node = 0;
      while (node + 1 < im_.n_nodes && separable_value(mc(t, node))) ++node;
      const double m = mc(t, node);
      if (m < -o_.q) {
        int end = t + 1;
        while (end < K_ && !near(mc(end, node), costs_.nsp)) ++end;
        if (end >= K_) {
          end = K_ - 1;
          out.hour_flags[t] |= kBoundaryTruncated;
        }
        mark(marked, t, end);
        t = o_.skip_marked ? end + 1 : t + 1;
        continue;
      }
      if (near(m, costs_.nsp)) {
        int end = t + 1;
        while (end < K_ && !separable(end)) ++end;
        if (end >= K_) {
          end = K_ - 1;
          out.hour_flags[t] |= kBoundaryTruncated;
        }
        mark(marked, t, end);
        ++t;
        continue;
      }
      int l = 0;
      try {
        const auto d = decompose_mc(m, costs_.nsp, costs_.thermal, costs_.wind, o_.decomposition_tol,
                                    o_.decomposition_bound);
        const int nearest = ramp_length(m, costs_.thermal);
        if (std::abs(d.b) != nearest) ++out.length_rule_disagreements;
        l = o_.length_rule == LengthRule::decomposition_b ? std::max(1, std::abs(d.b)) : nearest;
      } catch (const NoDecomposition&) {
        extend_conservatively(out, marked, t, kUndecomposable);
        ++t;
        continue;
      }
      const bool up = rampup_active(t);
      const bool down = rampdown_active(t + 1);
      if (!up && !down) {
        extend_conservatively(out, marked, t, kNoActiveRamp);
        ++t;
        continue;
      }
      int next = t + 1;
      if (up) {
        int start = t - l + 1;
        while (start >= 0 && !wind_active(start)) --start;
        if (start < 0) {
          start = 0;
          out.hour_flags[t] |= kBoundaryTruncated;
        }
        mark(marked, std::min(start, t), t);
      }
      if (down && (!up || o_.both_directions)) {
        int end = t + l - 1;
        while (end < K_ && !wind_active(end)) ++end;
        if (end >= K_) {
          end = K_ - 1;
          out.hour_flags[t] |= kBoundaryTruncated;
        }
        end = std::max(end, t);
        mark(marked, t, end);
        if (o_.skip_marked) next = end + 1;
      }
      t = next;
    }
  }

  const SolveResult& r_;
  const IndexMap& im_;
  const ValidatedCase& c_;
  const PartitionOptions& o_;
  Costs costs_;
  int K_;
  std::vector<int> wind_, ramping_;
};

double slot_cost(const LpProblem& lp, const SolveResult& r, const IndexMap& im, int s) {
  double z = 0.0;
  for (int j : im.slot_cols(s)) z += lp.cost(j) * r.primal[j];
  return z;
}

}  // namespace

PartitionResult partition_horizon(const SolveResult& r, const IndexMap& im, const ValidatedCase& c,
                                  const PartitionOptions& opts) {
  if (!r.optimal()) throw std::invalid_argument("partition_horizon needs an optimal result");
  if (im.n_periods() != 1 || im.n_slots() != c.horizon())
    throw std::invalid_argument("partition_horizon needs a full hourly model");
  return Scanner(r, im, c, opts).run();
}

std::vector<double> chunk_costs(const LpProblem& lp, const SolveResult& r, const IndexMap& im,
                                const std::vector<Chunk>& chunks) {
  std::vector<double> out;
  out.reserve(chunks.size());
  for (const auto& ch : chunks) {
    double z = 0.0;
    for (int s = ch.start; s < ch.start + ch.length; ++s) z += slot_cost(lp, r, im, s);
    out.push_back(z);
  }
  return out;
}

IndependenceReport check_chunks(const ValidatedCase& c, ModelVariant v, const std::vector<Chunk>& chunks,
                                const LpProblem& full_lp, const SolveResult& full, const IndexMap& im,
                                const BuildOptions& bopts, const SolveOptions& sopts, double tol) {
  RepresentativePeriods periods;
  periods.reserve(chunks.size());
  for (const auto& ch : chunks) periods.push_back(period_from_hours(c, ch.start, ch.length, 1.0));
  const auto alone = build_aggregated(c, periods, v, bopts);
  const auto ra = solve(alone.lp, sopts);
  if (!ra.optimal()) throw std::runtime_error(std::string("chunk model: ") + to_string(ra.status) + " " + ra.message);
  const auto full_costs = chunk_costs(full_lp, full, im, chunks);
  IndependenceReport rep;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    ChunkCheck ck;
    ck.cost_full = full_costs[i];
    for (int pos = 0; pos < chunks[i].length; ++pos)
      ck.cost_alone += slot_cost(alone.lp, ra, alone.index, alone.index.slot(static_cast<int>(i), pos));
    ck.pass = ck.cost_full - ck.cost_alone <= tol * std::max(1.0, std::abs(ck.cost_full));
    if (!ck.pass) ++rep.n_failed;
    rep.chunks.push_back(ck);
  }
  return rep;
}

std::vector<ChunkBasis> group_chunks(const ValidatedCase& c, const std::vector<Chunk>& chunks, const SolveResult& r,
                                     const IndexMap& im, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("quantization step must be positive");
  std::unordered_map<std::string, int> index;
  std::vector<ChunkBasis> bases;
  auto quant = [q](double x) {
    const long long v = std::llround(x / q);
    return std::to_string(v == 0 ? 0 : v);
  };
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const auto& ch = chunks[i];
    std::string sig = "len=" + std::to_string(ch.length);
    for (int pos = 0; pos < ch.length; ++pos) {
      const int s = ch.start + pos;
      const std::string at = "|" + std::to_string(pos + 1) + ":";
      for (int row : im.slot_rows(s)) {
        bool outside = false;
        if (pos == 0)
          for (int g = 0; g < im.n_gens; ++g)
            if (row == im.rampup_row(s, g) || row == im.rampdown_row(s, g)) outside = true;
        if (outside) continue;
        sig += at + im.row_key(row) + "=" + quant(r.row_duals[row]);
      }
      for (int col : im.slot_cols(s)) sig += at + im.col_key(col) + "=" + quant(r.bound_duals[col]);
    }
    auto [it, fresh] = index.try_emplace(sig, static_cast<int>(bases.size()));
    if (fresh) {
      ChunkBasis b;
      b.signature = sig;
      b.length = ch.length;
      bases.push_back(std::move(b));
    }
    bases[it->second].members.push_back(static_cast<int>(i));
  }
  for (auto& b : bases) {
    auto& cen = b.centroid;
    cen.length = b.length;
    cen.weight = b.weight();
    cen.demand.assign(b.length, std::vector<double>(c.n_buses(), 0.0));
    cen.cf.assign(b.length, std::vector<double>(c.n_generators(), 0.0));
    for (int m : b.members)
      for (int pos = 0; pos < b.length; ++pos) {
        const int k = chunks[m].start + pos;
        for (int bus = 0; bus < c.n_buses(); ++bus) cen.demand[pos][bus] += c.demand(bus, k);
        for (int g = 0; g < c.n_generators(); ++g) cen.cf[pos][g] += c.cf(g, k);
      }
    for (auto& row : cen.demand)
      for (double& x : row) x /= b.weight();
    for (auto& row : cen.cf)
      for (double& x : row) x /= b.weight();
  }
  return bases;
}

RepresentativePeriods to_representative_periods(const std::vector<ChunkBasis>& bases, int horizon) {
  RepresentativePeriods out;
  double covered = 0.0;
  for (const auto& b : bases) {
    if (b.centroid.length != b.length || b.members.empty())
      throw std::invalid_argument("basis with inconsistent centroid");
    covered += b.length * b.weight();
    out.push_back(b.centroid);
  }
  if (std::abs(covered - horizon) > 1e-9 * std::max(1, horizon))
    throw std::invalid_argument("bases cover " + std::to_string(covered) + " hours, horizon is " +
                                std::to_string(horizon));
  return out;
}

std::vector<LengthSummaryRow> summarize_lengths(const std::vector<Chunk>& chunks, const std::vector<ChunkBasis>& bases,
                                                const std::vector<double>& costs) {
  std::map<int, LengthSummaryRow> rows;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    auto& row = rows[chunks[i].length];
    row.length = chunks[i].length;
    ++row.n_subsets;
    row.obj_fun_avg += costs.at(i);
  }
  for (const auto& b : bases) ++rows[b.length].n_bases;
  std::vector<LengthSummaryRow> out;
  for (auto& [len, row] : rows) {
    if (row.n_subsets > 0) row.obj_fun_avg /= row.n_subsets;
    out.push_back(row);
  }
  return out;
}

}  // namespace btsa
