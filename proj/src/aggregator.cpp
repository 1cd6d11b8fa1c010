#include "btsa/aggregator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace btsa {

std::optional<Method> parse_method(const std::string& s) {
  if (s == "hourly_basis") return Method::hourly_basis;
  if (s == "dual_partition") return Method::dual_partition;
  if (s == "identity") return Method::identity;
  if (s == "naive_kmeans_stub") return Method::naive_kmeans_stub;
  return std::nullopt;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::hourly_basis: return "hourly_basis";
    case Method::dual_partition: return "dual_partition";
    case Method::identity: return "identity";
    case Method::naive_kmeans_stub: return "naive_kmeans_stub";
  }
  return "?";
}

SizeStats size_stats(const LpProblem& full, const LpProblem& agg) {
  SizeStats s;
  s.n_vars_full = full.n_cols();
  s.n_vars_agg = agg.n_cols();
  s.n_rows_full = full.n_rows();
  s.n_rows_agg = agg.n_rows();
  auto pct = [](long f, long a) { return f > 0 ? 100.0 * (1.0 - static_cast<double>(a) / static_cast<double>(f)) : 0.0; };
  s.size_reduction_pct = pct(s.n_vars_full, s.n_vars_agg);
  s.row_reduction_pct = pct(s.n_rows_full, s.n_rows_agg);
  return s;
}

std::vector<int> naive_kmeans(const ValidatedCase& c, int k, int iterations) {
  const int K = c.horizon();
  k = std::clamp(k, 1, K);
  std::vector<std::array<double, 2>> x(K);
  for (int t = 0; t < K; ++t) {
    double d = 0.0, w = 0.0;
    for (int b = 0; b < c.n_buses(); ++b) d += c.demand(b, t);
    for (int g : c.wind_units()) w += c.available(g, t);
    x[t] = {d, w};
  }
  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return x[a][0] < x[b][0]; });
  std::vector<std::array<double, 2>> centre(k);
  for (int j = 0; j < k; ++j) centre[j] = x[order[(2 * j + 1) * K / (2 * k)]];
  std::vector<int> label(K, 0);
  for (int it = 0; it < iterations; ++it) {
    bool moved = false;
    for (int t = 0; t < K; ++t) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        const double dx = x[t][0] - centre[j][0], dy = x[t][1] - centre[j][1];
        if (dx * dx + dy * dy < bd) bd = dx * dx + dy * dy, best = j;
      }
      moved |= label[t] != best;
      label[t] = best;
    }
    std::vector<std::array<double, 2>> sum(k, {0.0, 0.0});
    std::vector<int> n(k, 0);
    for (int t = 0; t < K; ++t) {
      sum[label[t]][0] += x[t][0];
      sum[label[t]][1] += x[t][1];
      ++n[label[t]];
    }
    for (int j = 0; j < k; ++j)
      if (n[j] > 0) centre[j] = {sum[j][0] / n[j], sum[j][1] / n[j]};
    if (!moved && it > 0) break;
  }
  return label;
}

namespace {

int count_linked_hours(const SolveResult& r, const IndexMap& im, const ValidatedCase& c, double q) {
  std::vector<double> plain{c.spec().nsp_cost};
  for (const auto& g : c.spec().generators) plain.push_back(g.variable_cost);
  int n = 0;
  for (int s = 0; s < im.n_slots(); ++s) {
    bool linked = false;
    for (int node = 0; node < im.n_nodes; ++node) {
      const double mc = r.row_duals[im.balance_row(s, node)];
      if (std::none_of(plain.begin(), plain.end(), [&](double v) { return std::abs(mc - v) <= q; })) linked = true;
    }
    n += linked;
  }
  return n;
}

}  // namespace

AggregationReport run_pipeline(const ValidatedCase& c, ModelVariant v, Method m, const PipelineOptions& opts) {
  if (m == Method::hourly_basis && has_ramping(v) && !opts.force)
    throw std::invalid_argument("hourly_basis ignores ramping links of " + variant_name(v) +
                                "; use dual_partition, or force it to reproduce Case A");
  AggregationReport rep;
  rep.variant = v;
  rep.method = m;
  rep.horizon = c.horizon();
  const int K = c.horizon();

  BuiltModel full;
  try {
    full = build_full(c, v, opts.build);
  } catch (const std::exception& e) {
    throw PipelineError("build_full", e.what());
  }
  const auto r = solve(full.lp, opts.solve);
  if (!r.optimal()) throw PipelineError("full_solve", std::string(to_string(r.status)) + " " + r.message);
  rep.obj_full = r.objective;
  rep.iterations_full = r.iterations;
  rep.kkt_full = check_kkt(full.lp, r, opts.kkt_tol);
  rep.n_hours_mc_linked = count_linked_hours(r, full.index, c, opts.partition.q);

  RepresentativePeriods periods;
  rep.hour_basis.assign(K, 0);
  switch (m) {
    case Method::identity: {
      periods.push_back(period_from_hours(c, 0, K, 1.0));
      rep.n_bases = 1;
      rep.zero_error_expected = true;
      break;
    }
    case Method::hourly_basis:
    case Method::naive_kmeans_stub: {
      std::vector<HourCluster> clusters;
      if (m == Method::hourly_basis) {
        const auto sig = hour_signatures(r, full.index, opts.signature_mode, opts.partition.q, opts.solve.parallel);
        const auto other = hour_signatures(
            r, full.index,
            opts.signature_mode == SignatureMode::duals ? SignatureMode::active_set : SignatureMode::duals,
            opts.partition.q, opts.solve.parallel);
        rep.signature_modes_agree = same_grouping(sig, other);
        if (!*rep.signature_modes_agree)
          rep.warnings.push_back("duals and active_set signatures group the hours differently");
        clusters = cluster_hours(c, sig);
        rep.zero_error_expected = !has_ramping(v);
        if (has_ramping(v)) rep.warnings.push_back("hourly_basis forced on a ramping variant: ramp links are ignored");
      } else {
        const auto label = naive_kmeans(c, opts.kmeans_k, opts.kmeans_iterations);
        clusters = cluster_by_label(c, label);
      }
      for (std::size_t i = 0; i < clusters.size(); ++i)
        for (int k : clusters[i].members) rep.hour_basis[k] = static_cast<int>(i);
      periods = clusters_to_periods(clusters);
      rep.n_bases = static_cast<int>(clusters.size());
      rep.clusters = std::move(clusters);
      break;
    }
    case Method::dual_partition: {
      PartitionResult part;
      IndependenceReport check;
      std::vector<ChunkBasis> bases;
      try {
        part = partition_horizon(r, full.index, c, opts.partition);
        check = check_chunks(c, v, part.chunks, full.lp, r, full.index, opts.build, opts.solve, opts.exact_tol);
        bases = group_chunks(c, part.chunks, r, full.index, opts.partition.q);
        periods = to_representative_periods(bases, K);
      } catch (const std::exception& e) {
        throw PipelineError("dual_partition", e.what());
      }
      rep.chunks = part.chunks;
      rep.n_chunks = static_cast<int>(part.chunks.size());
      rep.length_rule_disagreements = part.length_rule_disagreements;
      for (std::size_t i = 0; i < part.chunks.size(); ++i) {
        const auto& ch = part.chunks[i];
        if (ch.flags) ++rep.n_flagged_chunks;
        if (!check.chunks[i].pass)
          rep.failed_chunks.push_back({ch.start + 1, ch.length, check.chunks[i].cost_full, check.chunks[i].cost_alone});
      }
      rep.n_failed_chunks = check.n_failed;
      if (check.n_failed > 0)
        rep.warnings.push_back(std::to_string(check.n_failed) + " chunk(s) fail the independence check");
      for (std::size_t b = 0; b < bases.size(); ++b)
        for (int ci : bases[b].members)
          for (int k = part.chunks[ci].start; k < part.chunks[ci].start + part.chunks[ci].length; ++k)
            rep.hour_basis[k] = static_cast<int>(b);
      rep.length_table = summarize_lengths(part.chunks, bases, chunk_costs(full.lp, r, full.index, part.chunks));
      rep.n_bases = static_cast<int>(bases.size());
      rep.zero_error_expected = check.pass();
      rep.bases = std::move(bases);
      break;
    }
  }

  for (const auto& p : periods) {
    rep.represented_hours += p.length;
    rep.max_chunk_length = std::max(rep.max_chunk_length, p.length);
  }
  rep.hour_reduction_factor = rep.represented_hours > 0 ? static_cast<double>(K) / rep.represented_hours : 0.0;

  BuiltModel agg;
  try {
    agg = build_aggregated(c, periods, v, opts.build);
  } catch (const std::exception& e) {
    throw PipelineError("build_aggregated", e.what());
  }
  const auto ra = solve(agg.lp, opts.solve);
  if (!ra.optimal()) throw PipelineError("aggregated_solve", std::string(to_string(ra.status)) + " " + ra.message);
  rep.obj_agg = ra.objective;
  rep.iterations_agg = ra.iterations;
  rep.kkt_agg = check_kkt(agg.lp, ra, opts.kkt_tol);
  rep.size = size_stats(full.lp, agg.lp);
  rep.rel_error = std::abs(rep.obj_agg - rep.obj_full) / std::max(std::abs(rep.obj_full), 1.0);
  rep.exact = rep.rel_error < opts.exact_tol;
  if (!rep.kkt_full.pass || !rep.kkt_agg.pass) rep.warnings.push_back("KKT check above tolerance");
  return rep;
}

}  // namespace btsa
