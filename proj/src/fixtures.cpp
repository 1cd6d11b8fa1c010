#include "btsa/fixtures.hpp"

#include <stdexcept>

namespace btsa {

namespace {

SystemSpec single_node_spec(bool ramping) {
  SystemSpec s;
  s.buses = {"B1"};
  s.nsp_cost = 5000.0;
  Generator w{"W1", GenKind::wind, "B1", 0.0, 500.0, 3.0, {}, {}};
  Generator t{"T1", GenKind::thermal, "B1", 0.0, 1000.0, 24.0, {}, {}};
  if (ramping) {
    t.ramp_up = 100.0;
    t.ramp_down = 100.0;
  }
  s.generators = {w, t};
  return s;
}

}  // namespace

SynthCase table_case(bool ramping) {
  SynthCase c;
  c.spec = single_node_spec(ramping);
  c.series.horizon = 4;
  c.series.demand["B1"] = {170.2, 176.0, 281.7, 391.0};
  c.series.capacity_factor["W1"] = {40.0 / 500.0, 5.0 / 500.0, 15.7 / 500.0, 20.0 / 500.0};
  return c;
}

SynthCase regime_case(const std::string& pattern) {
  SynthCase c;
  c.spec = single_node_spec(false);
  c.series.horizon = static_cast<int>(pattern.size());
  auto& d = c.series.demand["B1"];
  auto& cf = c.series.capacity_factor["W1"];
  int nw = 0, nt = 0, nn = 0;
  for (char ch : pattern) {
    switch (ch) {
      case 'W':  // demand well below wind availability
        cf.push_back(0.60 + 0.03 * nw);
        d.push_back(100.0 + 10.0 * nw);
        ++nw;
        break;
      case 'T':  // wind exhausted, thermal partly loaded
        cf.push_back(0.10 + 0.05 * nt);
        d.push_back(400.0 + 60.0 * nt);
        ++nt;
        break;
      case 'N':  // both units at capacity
        cf.push_back(0.20 + 0.02 * nn);
        d.push_back(1400.0 + 50.0 * nn);
        ++nn;
        break;
      default:
        throw std::invalid_argument(std::string("regime pattern: unknown regime '") + ch + "'");
    }
  }
  return c;
}

}  // namespace btsa
