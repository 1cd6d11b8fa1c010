#include "btsa/system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace btsa {

struct CaseAccess {
  static ValidatedCase make(const SystemSpec& spec, const TimeSeriesSet& series) {
    ValidatedCase c;
    c.spec_ = spec;
    c.series_ = series;
    const int K = series.horizon;
    for (const auto& g : spec.generators) c.gen_bus_.push_back(c.bus_index(g.bus));
    for (const auto& l : spec.lines) {
      c.line_from_.push_back(c.bus_index(l.from_bus));
      c.line_to_.push_back(c.bus_index(l.to_bus));
    }
    for (const auto& b : spec.buses) {
      auto it = series.demand.find(b);
      c.demand_.push_back(it->second);
    }
    for (const auto& g : spec.generators) {
      if (g.kind == GenKind::wind)
        c.cf_.push_back(series.capacity_factor.at(g.id));
      else
        c.cf_.emplace_back(static_cast<std::size_t>(K), 1.0);
    }
    return c;
  }
};

int ValidatedCase::bus_index(const std::string& bus) const {
  auto it = std::find(spec_.buses.begin(), spec_.buses.end(), bus);
  if (it == spec_.buses.end()) return -1;
  return static_cast<int>(it - spec_.buses.begin());
}

bool ValidatedCase::has_ramping() const {
  return std::any_of(spec_.generators.begin(), spec_.generators.end(),
                     [](const Generator& g) { return g.has_ramp(); });
}

std::vector<int> ValidatedCase::wind_units() const {
  std::vector<int> out;
  for (int g = 0; g < n_generators(); ++g)
    if (spec_.generators[g].kind == GenKind::wind) out.push_back(g);
  return out;
}

std::vector<int> ValidatedCase::thermal_units() const {
  std::vector<int> out;
  for (int g = 0; g < n_generators(); ++g)
    if (spec_.generators[g].kind == GenKind::thermal) out.push_back(g);
  return out;
}

namespace {

bool finite(double v) { return std::isfinite(v); }

std::string hour_loc(const std::string& name, int hour) {
  // file formats use 1-based hours
  std::ostringstream os;
  os << "(" << name << ", " << hour + 1 << ")";
  return os.str();
}

}  // namespace

ValidationResult validate_system(const SystemSpec& spec, const TimeSeriesSet& series) {
  ValidationResult res;
  auto& v = res.violations;
  auto add = [&](std::string what, std::string where) {
    v.push_back({std::move(what), std::move(where)});
  };

  std::set<std::string> buses;
  for (const auto& b : spec.buses)
    if (!buses.insert(b).second) add("duplicate bus identifier", b);
  if (spec.buses.empty()) add("system has no buses", "buses");
  if (spec.generators.empty()) add("system needs at least one generator", "generators");

  std::set<std::string> gen_ids;
  double max_vc = 0.0;
  for (const auto& g : spec.generators) {
    if (!gen_ids.insert(g.id).second) add("duplicate generator identifier", g.id);
    if (!buses.count(g.bus)) add("generator references undeclared bus '" + g.bus + "'", g.id);
    if (!finite(g.p_min) || !finite(g.p_max) || g.p_min < 0.0 || g.p_min > g.p_max)
      add("generator limits must satisfy 0 <= p_min <= p_max", g.id);
    if (!finite(g.variable_cost) || g.variable_cost < 0.0)
      add("variable_cost must be nonnegative", g.id);
    else
      max_vc = std::max(max_vc, g.variable_cost);
    for (const auto& r : {g.ramp_up, g.ramp_down})
      if (r && (!finite(*r) || *r <= 0.0)) add("ramp limits must be positive", g.id);
    if (g.kind == GenKind::wind && g.has_ramp())
      add("ramp limits are only allowed on thermal units", g.id);
  }
  if (!finite(spec.nsp_cost) || spec.nsp_cost <= max_vc)
    add("nsp_cost must exceed all variable costs", "nsp_cost");

  std::set<std::string> line_ids;
  for (const auto& l : spec.lines) {
    if (!line_ids.insert(l.id).second) add("duplicate line identifier", l.id);
    if (!buses.count(l.from_bus)) add("line references undeclared bus '" + l.from_bus + "'", l.id);
    if (!buses.count(l.to_bus)) add("line references undeclared bus '" + l.to_bus + "'", l.id);
    if (l.from_bus == l.to_bus) add("line endpoints must differ", l.id);
    if (!finite(l.flow_limit) || l.flow_limit <= 0.0) add("flow_limit must be positive", l.id);
    if (!finite(l.transmission_cost) || l.transmission_cost < 0.0)
      add("transmission_cost must be nonnegative", l.id);
  }

  const int K = series.horizon;
  if (K < 1) add("horizon must be at least one hour", "horizon");
  for (const auto& b : spec.buses) {
    auto it = series.demand.find(b);
    if (it == series.demand.end()) {
      add("missing demand series for bus", b);
      continue;
    }
    for (int k = 0; k < K; ++k) {
      double d = k < static_cast<int>(it->second.size()) ? it->second[k] : std::nan("");
      if (std::isnan(d))
        add("missing demand value", hour_loc(b, k));
      else if (!finite(d) || d < 0.0)
        add("demand must be finite and nonnegative", hour_loc(b, k));
    }
  }
  for (const auto& [bus, _] : series.demand)
    if (!buses.count(bus)) add("demand series for undeclared bus", bus);

  for (const auto& g : spec.generators) {
    if (g.kind != GenKind::wind) continue;
    auto it = series.capacity_factor.find(g.id);
    if (it == series.capacity_factor.end()) {
      add("missing capacity factor series for wind unit", g.id);
      continue;
    }
    for (int k = 0; k < K; ++k) {
      double cf = k < static_cast<int>(it->second.size()) ? it->second[k] : std::nan("");
      if (std::isnan(cf))
        add("missing capacity factor value", hour_loc(g.id, k));
      else if (!(cf >= 0.0 && cf <= 1.0))
        add("capacity factor out of range [0,1]", hour_loc(g.id, k));
    }
  }
  for (const auto& [unit, _] : series.capacity_factor) {
    auto it = std::find_if(spec.generators.begin(), spec.generators.end(),
                           [&](const Generator& g) { return g.id == unit; });
    if (it == spec.generators.end() || it->kind != GenKind::wind)
      add("capacity factor series for unknown wind unit", unit);
  }

  if (v.empty()) res.validated = CaseAccess::make(spec, series);
  return res;
}

ValidatedCase validate_or_throw(const SystemSpec& spec, const TimeSeriesSet& series) {
  auto res = validate_system(spec, series);
  if (!res.ok()) {
    std::ostringstream os;
    os << "invalid case:";
    for (const auto& v : res.violations) os << "\n  " << v.where << ": " << v.what;
    throw std::invalid_argument(os.str());
  }
  return std::move(*res.validated);
}

std::optional<SynthProfile> parse_profile(const std::string& name) {
  if (name == "single_node") return SynthProfile::single_node;
  if (name == "single_node_rampstress") return SynthProfile::single_node_rampstress;
  if (name == "three_bus") return SynthProfile::three_bus;
  if (name == "three_bus_rampstress") return SynthProfile::three_bus_rampstress;
  return std::nullopt;
}

std::string profile_name(SynthProfile p) {
  switch (p) {
    case SynthProfile::single_node: return "single_node";
    case SynthProfile::single_node_rampstress: return "single_node_rampstress";
    case SynthProfile::three_bus: return "three_bus";
    case SynthProfile::three_bus_rampstress: return "three_bus_rampstress";
  }
  return "?";
}

namespace {

// mt19937_64 is fully specified by the standard; the std distributions are not,
// so uniform and normal draws are derived by hand to keep outputs portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 gen_;
};

constexpr double kInfRamp = std::numeric_limits<double>::infinity();

// divide by the integer reciprocal so results are the doubles nearest to the decimal values
double round_to(double v, double per_unit) { return std::round(v * per_unit) / per_unit; }

Generator make_wind(std::string bus) {
  return Generator{"W1", GenKind::wind, std::move(bus), 0.0, 500.0, 3.0, std::nullopt, std::nullopt};
}

Generator make_thermal(std::string bus) {
  return Generator{"T1", GenKind::thermal, std::move(bus), 0.0, 1000.0, 24.0, 100.0, 100.0};
}

}  // namespace

SynthCase synth_case(std::uint64_t seed, int horizon, SynthProfile profile) {
  if (horizon < 1) throw std::invalid_argument("synth_case: horizon must be >= 1");
  Rng rng(seed);
  const bool stress = profile == SynthProfile::single_node_rampstress ||
                      profile == SynthProfile::three_bus_rampstress;
  const bool network = profile == SynthProfile::three_bus || profile == SynthProfile::three_bus_rampstress;

  SynthCase out;
  auto& spec = out.spec;
  spec.nsp_cost = 5000.0;
  std::string load_bus;
  if (network) {
    spec.buses = {"B1", "B2", "B3"};
    spec.generators = {make_wind("B1"), make_thermal("B2")};
    spec.lines = {Line{"L1", "B1", "B3", 250.0, 0.0}, Line{"L2", "B1", "B2", 120.0, 0.0},
                  Line{"L3", "B2", "B3", 1500.0, 0.0}};
    load_bus = "B3";
  } else {
    spec.buses = {"N1"};
    spec.generators = {make_wind("N1"), make_thermal("N1")};
    load_bus = "N1";
  }

  auto& series = out.series;
  series.horizon = horizon;
  for (const auto& b : spec.buses) series.demand[b].assign(static_cast<std::size_t>(horizon), 0.0);
  auto& demand = series.demand[load_bus];
  auto& cf = series.capacity_factor["W1"];
  cf.assign(static_cast<std::size_t>(horizon), 0.0);

  const double phase = rng.uniform() * 2.0 * std::numbers::pi;
  double wind_state = rng.normal();
  double noise_state = 0.0;
  // stressed series start at the morning pickup so even short horizons contain a steep hour
  const int first_hour = stress ? 6 : 0;
  for (int k = 0; k < horizon; ++k) {
    const int h = (k + first_hour) % 24;
    const int day = (k + first_hour) / 24;
    const double season = 0.06 * std::cos(2.0 * std::numbers::pi * day / 364.0 + phase);
    noise_state = 0.7 * noise_state + 0.02 * rng.normal();
    double level;
    if (stress) {
      // flat nights, a morning pickup slightly steeper than the thermal ramp, a gentler evening drop
      double shape = 0.32;
      if (h >= 6 && h < 10) shape += 0.12 * (h - 5);
      else if (h >= 10 && h < 19) shape = 0.80 + 0.04 * std::sin(2.0 * std::numbers::pi * (h - 10) / 9.0);
      else if (h >= 19) shape = 0.80 - 0.09 * (h - 18);
      level = shape + season + noise_state + 0.015 * rng.normal();
    } else {
      level = 0.58 + 0.26 * std::sin(2.0 * std::numbers::pi * (h - 9) / 24.0) + season + noise_state;
    }
    demand[k] = round_to(std::clamp(level * 1000.0, 50.0, 1000.0), 10.0);
    if (stress && h >= 6 && h < 10 && k > 0) demand[k] = round_to(std::min(1000.0, std::max(demand[k], demand[k - 1] + 110.0)), 10.0);

    const double persistence = stress ? 0.88 : 0.92;
    const double shock = stress ? 0.45 : 0.35;
    wind_state = persistence * wind_state + shock * rng.normal();
    double c = 1.0 / (1.0 + std::exp(-1.6 * wind_state));
    cf[k] = round_to(std::clamp(c, 0.0, 1.0), 1e4);
  }
  if (stress && horizon > 1 && ramp_stress_pairs(spec, series) == 0)
    throw std::logic_error("synth_case: stressed series has no demand step above the ramp limit");
  return out;
}

SynthCase synth_case(std::uint64_t seed, int horizon, const std::string& profile) {
  auto p = parse_profile(profile);
  if (!p) throw std::invalid_argument("unknown profile '" + profile + "'");
  return synth_case(seed, horizon, *p);
}

int ramp_stress_pairs(const SystemSpec& spec, const TimeSeriesSet& series) {
  double ramp = kInfRamp;
  for (const auto& g : spec.generators)
    if (g.kind == GenKind::thermal && g.ramp_up) ramp = std::min(ramp, *g.ramp_up);
  if (ramp == kInfRamp) return 0;
  std::vector<double> total(static_cast<std::size_t>(series.horizon), 0.0);
  for (const auto& [bus, d] : series.demand)
    for (int k = 0; k < series.horizon && k < static_cast<int>(d.size()); ++k) total[k] += d[k];
  int n = 0;
  for (int k = 1; k < series.horizon; ++k)
    if (total[k] - total[k - 1] > ramp) ++n;
  return n;
}

}  // namespace btsa
