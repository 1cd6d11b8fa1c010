#include <stdexcept>
#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "btsa/basis_id.hpp"
#include "btsa/fixtures.hpp"
#include "btsa/psom.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace btsa;

namespace {

ValidatedCase vc(const SynthCase& sc) { return validate_or_throw(sc.spec, sc.series); }

struct Solved {
  BuiltModel m;
  SolveResult r;
};

Solved solve_full(const ValidatedCase& c, ModelVariant v) {
  Solved s{build_full(c, v), {}};
  s.r = solve(s.m.lp);
  REQUIRE(s.r.optimal());
  return s;
}

double aggregated_objective(const ValidatedCase& c, const std::vector<HourCluster>& cl, ModelVariant v) {
  const auto r = solve(build_aggregated(c, clusters_to_periods(cl), v).lp);
  REQUIRE(r.optimal());
  return r.objective;
}

std::set<std::string> keys(const std::vector<BasisSignature>& sigs) {
  std::set<std::string> out;
  for (const auto& s : sigs) out.insert(s.key());
  return out;
}

}  // namespace

TEST_SUITE("basis_id") {
  TEST_CASE("marginal unit shows up in the balance dual") {
    const auto c = vc(regime_case("WTN"));
    const auto s = solve_full(c, ModelVariant::ed);
    const auto& im = s.m.index;
    const double mc[] = {3.0, 24.0, 5000.0};
    for (int k = 0; k < 3; ++k) CHECK(s.r.row_duals[im.balance_row(k, 0)] == doctest::Approx(mc[k]));
    // thermal marginal: wind is capped, its reduced cost is 3 - 24
    CHECK(s.r.bound_duals[im.gen_col(1, 0)] == doctest::Approx(-21.0));
    CHECK(s.r.bound_duals[im.gen_col(1, 1)] == doctest::Approx(0.0));
    // wind marginal below availability: zero reduced cost
    CHECK(s.r.bound_duals[im.gen_col(0, 0)] == doctest::Approx(0.0));
    const auto sig = hour_signature(s.r, im, 1, SignatureMode::duals);
    CHECK(sig.key().find("balance[bus=B1]=24000000") != std::string::npos);
  }

  TEST_CASE("identical hours give identical signatures") {
    auto sc = regime_case("WTW");
    sc.series.demand["B1"][2] = sc.series.demand["B1"][0];
    sc.series.capacity_factor["W1"][2] = sc.series.capacity_factor["W1"][0];
    const auto c = vc(sc);
    const auto s = solve_full(c, ModelVariant::ed);
    for (auto mode : {SignatureMode::duals, SignatureMode::active_set})
      CHECK(hour_signature(s.r, s.m.index, 0, mode) == hour_signature(s.r, s.m.index, 2, mode));
  }

  TEST_CASE("all hours in one regime form one cluster") {
    const auto c = vc(regime_case("WWWWWWWWWWWW"));
    const auto s = solve_full(c, ModelVariant::ed);
    const auto cl = cluster_hours(c, hour_signatures(s.r, s.m.index, SignatureMode::duals));
    REQUIRE(cl.size() == 1u);
    CHECK(cl[0].weight() == 12.0);
    CHECK(aggregated_objective(c, cl, ModelVariant::ed) == doctest::Approx(s.r.objective).epsilon(1e-12));
  }

  TEST_CASE("three regimes form three clusters with zero error") {
    const auto sc = regime_case();
    const auto c = vc(sc);
    const auto s = solve_full(c, ModelVariant::ed);
    const auto sigs = hour_signatures(s.r, s.m.index, SignatureMode::duals);
    const auto cl = cluster_hours(c, sigs);
    REQUIRE(cl.size() == 3u);
    CHECK(cl[0].members == std::vector<int>{0, 1, 3, 4, 6, 7, 9, 10, 11});
    CHECK(cl[1].members == std::vector<int>{2, 8});
    CHECK(cl[2].members == std::vector<int>{5});
    const double full = oracle::ed_cost(sc.spec, sc.series);
    CHECK(oracle::rel(s.r.objective, full) < 1e-12);
    std::vector<int> label(12);
    for (int i = 0; i < 3; ++i)
      for (int h : cl[i].members) label[h] = i;
    CHECK(oracle::rel(oracle::clustered_ed_cost(sc.spec, sc.series, label), full) < 1e-12);
    CHECK(oracle::rel(aggregated_objective(c, cl, ModelVariant::ed), full) < 1e-12);
    CHECK(same_grouping(sigs, hour_signatures(s.r, s.m.index, SignatureMode::active_set)));
  }

  TEST_CASE("refining a basis cluster keeps zero error") {
    std::mt19937_64 rng(13);
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const auto sc = synth_case(seed, 200, SynthProfile::single_node);
      const auto c = vc(sc);
      const auto s = solve_full(c, ModelVariant::ed);
      const auto cl = cluster_hours(c, hour_signatures(s.r, s.m.index, SignatureMode::duals));
      std::vector<int> label(200);
      for (std::size_t i = 0; i < cl.size(); ++i)
        for (int h : cl[i].members) label[h] = static_cast<int>(i);
      const double full = oracle::ed_cost(sc.spec, sc.series);
      CHECK(oracle::rel(oracle::clustered_ed_cost(sc.spec, sc.series, label), full) < 1e-9);
      for (int trial = 0; trial < 10; ++trial) {
        auto refined = label;
        int next = static_cast<int>(cl.size());
        for (std::size_t i = 0; i < cl.size(); ++i)
          for (int h : cl[i].members)
            if (rng() % 3 == 0) refined[h] = next + static_cast<int>(i);
        refined = oracle::canonical(refined);
        CHECK(oracle::rel(oracle::clustered_ed_cost(sc.spec, sc.series, refined), full) < 1e-9);
        CHECK(oracle::rel(aggregated_objective(c, cluster_by_label(c, refined), ModelVariant::ed), full) < 1e-9);
      }
      // merging two bases does lose accuracy
      if (cl.size() >= 2) {
        auto merged = label;
        for (int& l : merged)
          if (l == 1) l = 0;
        CHECK(oracle::rel(oracle::clustered_ed_cost(sc.spec, sc.series, oracle::canonical(merged)), full) > 1e-9);
      }
    }
  }

  TEST_CASE("network: price-separated hours differ from uniform-price hours") {
    const auto c = vc(synth_case(7, 24 * 14, SynthProfile::three_bus));
    const auto s = solve_full(c, ModelVariant::ed_network);
    const auto& im = s.m.index;
    const auto sigs = hour_signatures(s.r, im, SignatureMode::duals);
    // brute force: distinct MC vectors across buses
    std::set<std::string> combos;
    int separated = -1, uniform = -1;
    for (int k = 0; k < c.horizon(); ++k) {
      std::string key;
      bool same = true;
      const double mc0 = s.r.row_duals[im.balance_row(k, 0)];
      for (int b = 0; b < c.n_buses(); ++b) {
        const double mc = s.r.row_duals[im.balance_row(k, b)];
        key += std::to_string(std::llround(mc * 1e6)) + ",";
        same = same && std::abs(mc - mc0) < 1e-7;
      }
      combos.insert(key);
      if (!same) {
        // prices can only separate across a line at its limit
        bool at_limit = false;
        for (int l = 0; l < im.n_lines; ++l)
          for (int d = 0; d < 2; ++d)
            at_limit = at_limit || s.r.primal[im.flow_col(k, l, d)] >= c.spec().lines[l].flow_limit - 1e-7;
        CHECK(at_limit);
        if (separated < 0) separated = k;
      } else if (uniform < 0) {
        uniform = k;
      }
    }
    REQUIRE(separated >= 0);
    REQUIRE(uniform >= 0);
    CHECK_FALSE(sigs[separated] == sigs[uniform]);
    CHECK(cluster_hours(c, sigs).size() == combos.size());
    CHECK(combos.size() >= 2u);
  }

  TEST_CASE("permuting hours permutes members only") {
    const auto sc = synth_case(3, 96, SynthProfile::three_bus);
    std::vector<int> perm(96);
    for (int i = 0; i < 96; ++i) perm[i] = i;
    std::mt19937_64 rng(1);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto shuffled = sc;
    for (auto& [bus, d] : shuffled.series.demand)
      for (int i = 0; i < 96; ++i) d[i] = sc.series.demand.at(bus)[perm[i]];
    for (auto& [u, cf] : shuffled.series.capacity_factor)
      for (int i = 0; i < 96; ++i) cf[i] = sc.series.capacity_factor.at(u)[perm[i]];
    for (auto v : {ModelVariant::ed, ModelVariant::ed_network}) {
      const auto a = vc(sc), b = vc(shuffled);
      const auto sa = solve_full(a, v), sb = solve_full(b, v);
      const auto ga = hour_signatures(sa.r, sa.m.index, SignatureMode::duals);
      const auto gb = hour_signatures(sb.r, sb.m.index, SignatureMode::duals);
      CHECK(keys(ga) == keys(gb));
      for (int i = 0; i < 96; ++i) CHECK(ga[perm[i]] == gb[i]);
      const auto oa = aggregated_objective(a, cluster_hours(a, ga), v);
      const auto ob = aggregated_objective(b, cluster_hours(b, gb), v);
      CHECK(oracle::rel(oa, ob) < 1e-12);
    }
  }

  TEST_CASE("parallel and serial signatures agree") {
    const auto c = vc(synth_case(9, 500, SynthProfile::three_bus));
    const auto s = solve_full(c, ModelVariant::ed_network);
    for (auto mode : {SignatureMode::duals, SignatureMode::active_set}) {
      const auto a = hour_signatures(s.r, s.m.index, mode, 1e-6, true);
      const auto b = hour_signatures(s.r, s.m.index, mode, 1e-6, false);
      CHECK(a == b);
    }
  }

  TEST_CASE("argument errors") {
    const auto c = vc(table_case(false));
    const auto s = solve_full(c, ModelVariant::ed);
    CHECK_THROWS_AS(hour_signature(s.r, s.m.index, 4, SignatureMode::duals), std::out_of_range);
    CHECK_THROWS_AS(hour_signature(s.r, s.m.index, -1, SignatureMode::duals), std::out_of_range);
    CHECK_THROWS_AS(hour_signature(s.r, s.m.index, 0, SignatureMode::duals, 0.0), std::invalid_argument);
    SolveResult bad;
    CHECK_THROWS_AS(hour_signature(bad, s.m.index, 0, SignatureMode::duals), std::invalid_argument);
  }

  TEST_CASE("cluster_by_label centroids and ordering") {
    const auto c = vc(table_case(false));
    const std::vector<int> label{1, 0, 1, 0};
    const auto cl = cluster_by_label(c, label);
    REQUIRE(cl.size() == 2u);
    CHECK(cl[0].members == std::vector<int>{0, 2});
    CHECK(cl[0].demand[0] == doctest::Approx((170.2 + 281.7) / 2));
    CHECK(cl[1].cf[0] == doctest::Approx((5.0 + 20.0) / 1000.0));
    const auto p = clusters_to_periods(cl);
    CHECK(p.size() == 2u);
    CHECK(p[1].weight == 2.0);
  }
}
