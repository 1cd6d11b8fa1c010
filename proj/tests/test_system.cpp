#include <stdexcept>
#include <cmath>
#include <limits>

#include "btsa/fixtures.hpp"
#include "btsa/system.hpp"
#include "doctest.h"

using namespace btsa;

namespace {

bool has_violation(const ValidationResult& r, const std::string& what, const std::string& where = "") {
  for (const auto& v : r.violations)
    if (v.what.find(what) != std::string::npos && (where.empty() || v.where == where)) return true;
  return false;
}

SynthCase three_bus_small() { return synth_case(11, 24, SynthProfile::three_bus); }

}  // namespace

TEST_SUITE("system") {
  TEST_CASE("three-bus synthetic case validates with aligned dense arrays") {
    const auto sc = three_bus_small();
    const auto r = validate_system(sc.spec, sc.series);
    REQUIRE(r.ok());
    const auto& c = *r.validated;
    CHECK(c.n_buses() == 3);
    CHECK(c.horizon() == 24);
    for (int g = 0; g < c.n_generators(); ++g) CHECK(c.spec().buses[c.generator_bus(g)] == sc.spec.generators[g].bus);
    const int w = c.wind_units().front();
    for (int k = 0; k < 24; ++k) {
      CHECK(c.available(w, k) == doctest::Approx(sc.series.capacity_factor.at("W1")[k] * 500.0));
      CHECK(c.cf(c.thermal_units().front(), k) == 1.0);
    }
    CHECK(c.has_ramping());
  }

  TEST_CASE("nsp cost must exceed every variable cost") {
    auto sc = table_case(false);
    sc.spec.nsp_cost = 0.0;
    const auto r = validate_system(sc.spec, sc.series);
    CHECK_FALSE(r.ok());
    CHECK(has_violation(r, "nsp_cost must exceed all variable costs"));
  }

  TEST_CASE("missing hour is located by bus and 1-based hour") {
    auto sc = three_bus_small();
    sc.series.demand["B2"][6] = std::numeric_limits<double>::quiet_NaN();
    const auto r = validate_system(sc.spec, sc.series);
    CHECK_FALSE(r.ok());
    CHECK(has_violation(r, "missing demand value", "(B2, 7)"));
  }

  TEST_CASE("structural violations are all reported together") {
    auto sc = three_bus_small();
    sc.spec.lines.push_back(sc.spec.lines.front());
    sc.spec.generators[0].bus = "nowhere";
    sc.spec.generators[0].ramp_up = 10.0;
    sc.series.capacity_factor["W1"][3] = 1.5;
    sc.series.demand["B9"] = std::vector<double>(24, 1.0);
    const auto r = validate_system(sc.spec, sc.series);
    CHECK_FALSE(r.ok());
    CHECK(has_violation(r, "duplicate line identifier"));
    CHECK(has_violation(r, "undeclared bus"));
    CHECK(has_violation(r, "ramp limits are only allowed on thermal units"));
    CHECK(has_violation(r, "capacity factor out of range", "(W1, 4)"));
    CHECK(has_violation(r, "demand series for undeclared bus", "B9"));
    CHECK_THROWS_AS(validate_or_throw(sc.spec, sc.series), std::invalid_argument);
  }

  TEST_CASE("validate_system is total over corrupted inputs") {
    const double bad[] = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity(), -1.0,
                          0.0, 1e308};
    const auto base = three_bus_small();
    int n_cases = 0;
    for (double x : bad) {
      for (int field = 0; field < 9; ++field) {
        auto sc = base;
        switch (field) {
          case 0: sc.spec.nsp_cost = x; break;
          case 1: sc.spec.generators[1].p_max = x; break;
          case 2: sc.spec.generators[1].p_min = x; break;
          case 3: sc.spec.generators[1].variable_cost = x; break;
          case 4: sc.spec.generators[1].ramp_down = x; break;
          case 5: sc.spec.lines[0].flow_limit = x; break;
          case 6: sc.series.demand["B3"][0] = x; break;
          case 7: sc.series.capacity_factor["W1"][23] = x; break;
          case 8: sc.series.horizon = static_cast<int>(std::isfinite(x) ? x : 0) % 50; break;
        }
        ValidationResult r;
        CHECK_NOTHROW(r = validate_system(sc.spec, sc.series));
        CHECK((r.ok() || !r.violations.empty()));
        CHECK((r.ok() == r.violations.empty()));
        ++n_cases;
      }
    }
    CHECK(n_cases == 45);
    SystemSpec empty;
    TimeSeriesSet none;
    const auto r = validate_system(empty, none);
    CHECK_FALSE(r.ok());
    CHECK(has_violation(r, "system has no buses"));
    CHECK(has_violation(r, "horizon must be at least one hour"));
  }

  TEST_CASE("synth_case is deterministic and always valid") {
    for (auto p : {SynthProfile::single_node, SynthProfile::single_node_rampstress, SynthProfile::three_bus,
                   SynthProfile::three_bus_rampstress}) {
      for (std::uint64_t seed : {1u, 2u, 3u, 17u}) {
        for (int horizon : {1, 4, 12, 500}) {
          const auto a = synth_case(seed, horizon, p);
          const auto b = synth_case(seed, horizon, p);
          CHECK(a.series.demand == b.series.demand);
          CHECK(a.series.capacity_factor == b.series.capacity_factor);
          const auto r = validate_system(a.spec, a.series);
          CHECK_MESSAGE(r.ok(), profile_name(p), " seed ", seed, " horizon ", horizon);
        }
      }
    }
    CHECK(synth_case(1, 12, "single_node").series.demand != synth_case(2, 12, "single_node").series.demand);
  }

  TEST_CASE("synthetic shapes") {
    const auto year = synth_case(1, 8736, SynthProfile::three_bus);
    for (const auto& [bus, d] : year.series.demand) CHECK(d.size() == 8736u);
    CHECK(year.series.capacity_factor.at("W1").size() == 8736u);
    CHECK(synth_case(3, 12, SynthProfile::single_node).series.demand.at("N1").size() == 12u);
  }

  TEST_CASE("stressed profiles contain demand steps above the ramp limit") {
    CHECK(ramp_stress_pairs(synth_case(2, 4, SynthProfile::single_node_rampstress).spec,
                            synth_case(2, 4, SynthProfile::single_node_rampstress).series) >= 1);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto sc = synth_case(seed, 2016, SynthProfile::single_node_rampstress);
      CHECK(ramp_stress_pairs(sc.spec, sc.series) >= 84);
      const auto net = synth_case(seed, 48, SynthProfile::three_bus_rampstress);
      CHECK(ramp_stress_pairs(net.spec, net.series) >= 2);
    }
    const auto t = table_case(true);
    CHECK(ramp_stress_pairs(t.spec, t.series) == 2);
  }

  TEST_CASE("bad synth arguments") {
    CHECK_THROWS_AS(synth_case(1, 0, SynthProfile::single_node), std::invalid_argument);
    CHECK_THROWS_AS(synth_case(1, 10, "five_bus"), std::invalid_argument);
    CHECK_FALSE(parse_profile("five_bus").has_value());
    for (auto p : {SynthProfile::single_node, SynthProfile::three_bus_rampstress})
      CHECK(parse_profile(profile_name(p)) == p);
  }

  TEST_CASE("fixtures") {
    const auto t = validate_or_throw(table_case(false).spec, table_case(false).series);
    CHECK(t.horizon() == 4);
    CHECK_FALSE(t.has_ramping());
    CHECK(t.available(0, 2) == doctest::Approx(15.7));
    CHECK(validate_or_throw(table_case(true).spec, table_case(true).series).has_ramping());
    const auto r = regime_case();
    CHECK(r.series.horizon == 12);
    CHECK(validate_system(r.spec, r.series).ok());
    CHECK_THROWS_AS(regime_case("WX"), std::invalid_argument);
  }
}
