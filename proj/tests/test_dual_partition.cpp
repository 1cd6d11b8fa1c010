#include <stdexcept>
#include <cmath>
#include <cstdlib>
#include <tuple>

#include "btsa/dual_partition.hpp"
#include "btsa/fixtures.hpp"
#include "btsa/kkt.hpp"
#include "btsa/psom.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace btsa;

namespace {

ValidatedCase vc(const SynthCase& sc) { return validate_or_throw(sc.spec, sc.series); }

struct Full {
  BuiltModel m;
  SolveResult r;
};

Full solve_full(const ValidatedCase& c, ModelVariant v = ModelVariant::ed_ramping) {
  Full f{build_full(c, v), {}};
  f.r = solve(f.m.lp);
  REQUIRE(f.r.optimal());
  return f;
}

// exhaustive search over the same preference order, written out directly
std::tuple<int, int, int> brute_decompose(double mc, double n, double t, double w) {
  std::tuple<int, int, int> best{-1, 0, 0};
  long best_key = -1;
  for (int coupled = 1; coupled >= 0 && best_key < 0; --coupled)
    for (int a = 0; a <= 1; ++a)
      for (int b = -60; b <= 60; ++b)
        for (int c = -400; c <= 400; ++c) {
          if (coupled && static_cast<long>(b) * c > 0) continue;
          if (std::abs(a * n + b * t + c * w - mc) > 1e-6) continue;
          const long key = (static_cast<long>(a + std::abs(b) + std::abs(c)) * 10 + a) * 1000 + std::abs(b);
          if (best_key < 0 || key < best_key) best_key = key, best = {a, b, c};
        }
  return best;
}

void check_cover(const std::vector<Chunk>& chunks, int horizon) {
  int next = 0;
  for (const auto& ch : chunks) {
    CHECK(ch.start == next);
    CHECK(ch.length >= 1);
    next = ch.start + ch.length;
  }
  CHECK(next == horizon);
}

}  // namespace

TEST_SUITE("dual_partition") {
  TEST_CASE("marginal cost decomposition reproduces the published table") {
    const struct {
      double mc;
      int a, b, c;
    } rows[] = {{3, 0, 0, 1},   {24, 0, 1, 0},   {45, 0, 2, -1},  {66, 0, 3, -2},
                {87, 0, 4, -3}, {108, 0, 5, -4}, {129, 0, 6, -5}, {5000, 1, 0, 0}};
    for (const auto& row : rows) {
      const auto d = decompose_mc(row.mc, 5000, 24, 3);
      CHECK_MESSAGE(d.a == row.a, row.mc);
      CHECK_MESSAGE(d.b == row.b, row.mc);
      CHECK_MESSAGE(d.c == row.c, row.mc);
      CHECK(d.residual <= 1e-6);
      CHECK(d.sign_coupled);
      CHECK((brute_decompose(row.mc, 5000, 24, 3) == std::tuple{row.a, row.b, row.c}));
    }
  }

  TEST_CASE("decomposition agrees with exhaustive search on reachable values") {
    for (int a = 0; a <= 1; ++a)
      for (int b = 0; b <= 12; ++b)
        for (int c = -b; c <= 1; ++c) {
          const double mc = a * 5000.0 + b * 24.0 + c * 3.0;
          if (mc < 0) continue;
          const auto d = decompose_mc(mc, 5000, 24, 3);
          const auto [ea, eb, ec] = brute_decompose(mc, 5000, 24, 3);
          CHECK_MESSAGE((std::tuple{d.a, d.b, d.c} == std::tuple{ea, eb, ec}), "mc ", mc);
          CHECK(std::abs(d.a * 5000.0 + d.b * 24.0 + d.c * 3.0 - mc) <= 1e-6);
        }
  }

  TEST_CASE("decomposition errors") {
    CHECK_THROWS_AS(decompose_mc(1.5, 5000, 24, 3), NoDecomposition);
    CHECK_THROWS_AS(decompose_mc(24, 24, 24, 3), std::invalid_argument);
    CHECK_THROWS_AS(decompose_mc(24, 5000, 2, 3), std::invalid_argument);
  }

  TEST_CASE("ramp length from the nearest multiple") {
    CHECK(ramp_length(66, 24) == 3);
    CHECK(ramp_length(24, 24) == 1);
    CHECK(ramp_length(129, 24) == 5);
    CHECK(ramp_length(3, 24) == 1);
    // the two length rules disagree here: b = 6 for 129
    CHECK(decompose_mc(129, 5000, 24, 3).b == 6);
  }

  TEST_CASE("four-hour ramping case splits into {1} and {2..4}") {
    const auto c = vc(table_case(true));
    const auto f = solve_full(c);
    const auto p = partition_horizon(f.r, f.m.index, c);
    REQUIRE(p.chunks.size() == 2u);
    CHECK(p.chunks[0].start == 0);
    CHECK(p.chunks[0].length == 1);
    CHECK(p.chunks[1].start == 1);
    CHECK(p.chunks[1].length == 3);
    const auto chk = check_chunks(c, ModelVariant::ed_ramping, p.chunks, f.m.lp, f.r, f.m.index);
    CHECK(chk.pass());
    // oracle: the two chunks solved on their own
    const oracle::RampCase first{{170.2}, {40.0}, 100, 100, 24, 3};
    const oracle::RampCase rest{{176.0, 281.7, 391.0}, {5.0, 15.7, 20.0}, 100, 100, 24, 3};
    CHECK(oracle::rel(oracle::ramp_cost(first) + oracle::ramp_cost(rest), f.r.objective) < 1e-12);
    CHECK(chk.chunks[0].cost_alone == doctest::Approx(oracle::ramp_cost(first)));
    CHECK(chk.chunks[1].cost_alone == doctest::Approx(oracle::ramp_cost(rest)));
    const auto bases = group_chunks(c, p.chunks, f.r, f.m.index);
    CHECK(bases.size() == 2u);
    const auto periods = to_representative_periods(bases, 4);
    int hours = 0;
    for (const auto& per : periods) hours += per.length;
    CHECK(hours == 4);
    const auto agg = solve(build_aggregated(c, periods, ModelVariant::ed_ramping).lp);
    CHECK(oracle::rel(agg.objective, f.r.objective) < 1e-12);
  }

  TEST_CASE("ramp-dual rule splits the four-hour case further, still exactly") {
    // the ramp row between hours 2 and 3 is tight but carries a zero dual, so
    // hour 2 separates: {1}, {2}, {3, 4}
    const auto c = vc(table_case(true));
    const auto f = solve_full(c);
    PartitionOptions o;
    o.rule = PartitionRule::ramp_duals;
    const auto p = partition_horizon(f.r, f.m.index, c, o);
    REQUIRE(p.chunks.size() == 3u);
    CHECK(p.chunks[2].start == 2);
    CHECK(p.chunks[2].length == 2);
    CHECK(check_chunks(c, ModelVariant::ed_ramping, p.chunks, f.m.lp, f.r, f.m.index).pass());
    const oracle::RampCase a{{170.2}, {40.0}, 100, 100, 24, 3}, b{{176.0}, {5.0}, 100, 100, 24, 3},
        rest{{281.7, 391.0}, {15.7, 20.0}, 100, 100, 24, 3};
    CHECK(oracle::rel(oracle::ramp_cost(a) + oracle::ramp_cost(b) + oracle::ramp_cost(rest), f.r.objective) < 1e-12);
  }

  TEST_CASE("no binding ramps: every chunk is one hour") {
    auto sc = synth_case(4, 120, SynthProfile::single_node_rampstress);
    sc.spec.generators[1].ramp_up = 5000.0;
    sc.spec.generators[1].ramp_down = 5000.0;
    const auto c = vc(sc);
    const auto f = solve_full(c);
    for (auto rule : {PartitionRule::algorithm1, PartitionRule::ramp_duals}) {
      PartitionOptions o;
      o.rule = rule;
      const auto p = partition_horizon(f.r, f.m.index, c, o);
      CHECK(p.chunks.size() == 120u);
      for (const auto& ch : p.chunks) CHECK(ch.length == 1);
    }
  }

  TEST_CASE("stressed horizons: cover, lengths and decomposition round trip") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto c = vc(synth_case(seed, 336, SynthProfile::single_node_rampstress));
      const auto f = solve_full(c);
      CHECK(check_kkt(f.m.lp, f.r).pass);
      for (bool both : {false, true})
        for (bool skip : {false, true})
          for (auto rule : {PartitionRule::algorithm1, PartitionRule::ramp_duals})
            for (auto lr : {LengthRule::decomposition_b, LengthRule::nearest_multiple}) {
              PartitionOptions o;
              o.both_directions = both;
              o.skip_marked = skip;
              o.rule = rule;
              o.length_rule = lr;
              const auto p = partition_horizon(f.r, f.m.index, c, o);
              check_cover(p.chunks, 336);
              int longest = 0;
              for (const auto& ch : p.chunks) longest = std::max(longest, ch.length);
              CHECK(longest > 1);
            }
      const auto p = partition_horizon(f.r, f.m.index, c);
      // with a in {0, 1} a negative MC that needs a = -1 has no decomposition;
      // every other hour must round-trip
      int n_undecomposable = 0;
      for (int k = 0; k < 336; ++k) {
        const double mc = p.mc[k][0];
        CHECK(mc == doctest::Approx(f.r.row_duals[f.m.index.balance_row(k, 0)]));
        try {
          const auto d = decompose_mc(mc, 5000, 24, 3);
          CHECK(d.residual <= 1e-6);
          CHECK(std::abs(d.a * 5000.0 + d.b * 24.0 + d.c * 3.0 - mc) <= 1e-6);
        } catch (const NoDecomposition&) {
          ++n_undecomposable;
          CHECK(mc < -5000.0 + 24.0 * 100);
        }
      }
      CHECK(n_undecomposable < 336 / 20);
    }
  }

  TEST_CASE("ramp-dual chunks are always independent") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto c = vc(synth_case(seed, 336, SynthProfile::single_node_rampstress));
      const auto f = solve_full(c);
      PartitionOptions o;
      o.rule = PartitionRule::ramp_duals;
      const auto p = partition_horizon(f.r, f.m.index, c, o);
      const auto chk = check_chunks(c, ModelVariant::ed_ramping, p.chunks, f.m.lp, f.r, f.m.index);
      CHECK(chk.n_failed == 0);
      double sum = 0.0;
      for (const auto& cc : chk.chunks) sum += cc.cost_alone;
      CHECK(oracle::rel(sum, f.r.objective) < 1e-9);
      const auto costs = chunk_costs(f.m.lp, f.r, f.m.index, p.chunks);
      double shares = 0.0;
      for (double x : costs) shares += x;
      CHECK(oracle::rel(shares, f.r.objective) < 1e-12);
    }
  }

  TEST_CASE("chunk bases: coverage, grouping and length table") {
    const auto c = vc(synth_case(2, 336, SynthProfile::single_node_rampstress));
    const auto f = solve_full(c);
    PartitionOptions o;
    o.rule = PartitionRule::ramp_duals;
    const auto p = partition_horizon(f.r, f.m.index, c, o);
    const auto bases = group_chunks(c, p.chunks, f.r, f.m.index);
    double covered = 0.0;
    std::size_t members = 0;
    for (const auto& b : bases) {
      covered += b.length * b.weight();
      members += b.members.size();
      for (int m : b.members) CHECK(p.chunks[m].length == b.length);
      CHECK(b.centroid.length == b.length);
    }
    CHECK(covered == 336.0);
    CHECK(members == p.chunks.size());
    CHECK_NOTHROW(to_representative_periods(bases, 336));
    CHECK_THROWS_AS(to_representative_periods(bases, 335), std::invalid_argument);
    const auto table = summarize_lengths(p.chunks, bases, chunk_costs(f.m.lp, f.r, f.m.index, p.chunks));
    int subsets = 0, n_bases = 0;
    for (const auto& row : table) subsets += row.n_subsets, n_bases += row.n_bases;
    CHECK(subsets == static_cast<int>(p.chunks.size()));
    CHECK(n_bases == static_cast<int>(bases.size()));
    const auto agg = solve(build_aggregated(c, to_representative_periods(bases, 336), ModelVariant::ed_ramping).lp);
    CHECK(oracle::rel(agg.objective, f.r.objective) < 1e-8);

    // a single chunk is one basis of weight one
    const std::vector<Chunk> whole{{0, 336, 0}};
    const auto one = group_chunks(c, whole, f.r, f.m.index);
    REQUIRE(one.size() == 1u);
    CHECK(one[0].weight() == 1.0);
  }

  TEST_CASE("literal scan reports its failures instead of hiding them") {
    const auto c = vc(synth_case(1, 336, SynthProfile::single_node_rampstress));
    const auto f = solve_full(c);
    const auto p = partition_horizon(f.r, f.m.index, c);
    const auto chk = check_chunks(c, ModelVariant::ed_ramping, p.chunks, f.m.lp, f.r, f.m.index);
    int failed = 0;
    for (const auto& cc : chk.chunks) {
      if (!cc.pass) {
        ++failed;
        CHECK(cc.cost_alone < cc.cost_full);
      }
    }
    CHECK(failed == chk.n_failed);
  }

  TEST_CASE("partition requires a full model") {
    const auto c = vc(table_case(true));
    const auto agg = build_aggregated(c, {period_from_hours(c, 0, 2), period_from_hours(c, 2, 2)},
                                      ModelVariant::ed_ramping);
    const auto r = solve(agg.lp);
    CHECK_THROWS_AS(partition_horizon(r, agg.index, c), std::invalid_argument);
  }

  TEST_CASE("rule names round-trip") {
    for (auto r : {LengthRule::decomposition_b, LengthRule::nearest_multiple})
      CHECK(parse_length_rule(length_rule_name(r)) == r);
    for (auto r : {PartitionRule::algorithm1, PartitionRule::ramp_duals})
      CHECK(parse_partition_rule(partition_rule_name(r)) == r);
    CHECK_FALSE(parse_partition_rule("greedy").has_value());
  }
}
