#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace btsa {

enum class GenKind { thermal, wind };

struct Generator {
  std::string id;
  GenKind kind = GenKind::thermal;
  std::string bus;
  double p_min = 0.0;
  double p_max = 0.0;
  double variable_cost = 0.0;
  std::optional<double> ramp_up;
  std::optional<double> ramp_down;

  bool has_ramp() const { return ramp_up.has_value() || ramp_down.has_value(); }
};

struct Line {
  std::string id;
  std::string from_bus;
  std::string to_bus;
  double flow_limit = 0.0;
  double transmission_cost = 0.0;
};

struct SystemSpec {
  std::vector<std::string> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  double nsp_cost = 0.0;
};

/// Hourly exogenous data. Hours are 0-based; a NaN entry marks a missing value.
struct TimeSeriesSet {
  int horizon = 0;
  std::map<std::string, std::vector<double>> demand;           // bus -> MW per hour
  std::map<std::string, std::vector<double>> capacity_factor;  // wind unit -> [0,1] per hour
};

struct Violation {
  std::string what;
  std::string where;
};

/// A system and series that passed validation. Dense per-hour arrays are
/// aligned with `spec().buses` and `spec().generators`.
class ValidatedCase {
 public:
  const SystemSpec& spec() const { return spec_; }
  const TimeSeriesSet& series() const { return series_; }
  int horizon() const { return series_.horizon; }
  int n_buses() const { return static_cast<int>(spec_.buses.size()); }
  int n_generators() const { return static_cast<int>(spec_.generators.size()); }

  int bus_index(const std::string& bus) const;
  int generator_bus(int g) const { return gen_bus_[g]; }
  int line_from(int l) const { return line_from_[l]; }
  int line_to(int l) const { return line_to_[l]; }

  double demand(int bus, int hour) const { return demand_[bus][hour]; }
  /// Capacity factor for generator g (1.0 for thermal units).
  double cf(int g, int hour) const { return cf_[g][hour]; }
  /// Upper bound of generator g in the given hour (cf * p_max for wind).
  double available(int g, int hour) const { return cf_[g][hour] * spec_.generators[g].p_max; }

  bool has_ramping() const;
  std::vector<int> wind_units() const;
  std::vector<int> thermal_units() const;

 private:
  friend struct CaseAccess;
  SystemSpec spec_;
  TimeSeriesSet series_;
  std::vector<int> gen_bus_;
  std::vector<int> line_from_;
  std::vector<int> line_to_;
  std::vector<std::vector<double>> demand_;
  std::vector<std::vector<double>> cf_;
};

struct ValidationResult {
  std::optional<ValidatedCase> validated;
  std::vector<Violation> violations;

  bool ok() const { return validated.has_value(); }
};

/// Checks every invariant of the system and series. Never throws on bad data;
/// each problem becomes a Violation with its location.
ValidationResult validate_system(const SystemSpec& spec, const TimeSeriesSet& series);

/// Convenience for trusted inputs (fixtures): throws std::invalid_argument
/// listing the violations.
ValidatedCase validate_or_throw(const SystemSpec& spec, const TimeSeriesSet& series);

enum class SynthProfile { single_node, single_node_rampstress, three_bus, three_bus_rampstress };

std::optional<SynthProfile> parse_profile(const std::string& name);
std::string profile_name(SynthProfile p);

struct SynthCase {
  SystemSpec spec;
  TimeSeriesSet series;
};

/// Deterministic synthetic case. Throws std::invalid_argument for horizon < 1.
SynthCase synth_case(std::uint64_t seed, int horizon, SynthProfile profile);
SynthCase synth_case(std::uint64_t seed, int horizon, const std::string& profile);

/// Hour pairs whose total demand rises by more than the tightest thermal
/// ramp-up limit. Stressed profiles have at least one from the first hour on.
int ramp_stress_pairs(const SystemSpec& spec, const TimeSeriesSet& series);

}  // namespace btsa
