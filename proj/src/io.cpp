#include "btsa/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace btsa {

using json = nlohmann::ordered_json;

namespace {

template <class T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw IoError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw IoError(where + ": field '" + key + "' has the wrong type");
  }
}

std::optional<double> optional_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number()) throw IoError(where + ": field '" + key + "' must be a number or null");
  return j.at(key).get<double>();
}

}  // namespace

SystemSpec parse_system_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(origin + ": " + e.what());
  }
  if (!j.is_object()) throw IoError(origin + ": top level must be an object");
  SystemSpec s;
  s.buses = field<std::vector<std::string>>(j, "buses", origin);
  s.nsp_cost = field<double>(j, "nsp_cost", origin);
  const auto lines = j.value("lines", json::array());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = origin + ": lines[" + std::to_string(i) + "]";
    const auto& l = lines[i];
    s.lines.push_back(Line{field<std::string>(l, "id", where), field<std::string>(l, "from_bus", where),
                           field<std::string>(l, "to_bus", where), field<double>(l, "flow_limit", where),
                           l.contains("transmission_cost") ? field<double>(l, "transmission_cost", where) : 0.0});
  }
  const auto gens = field<json>(j, "generators", origin);
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const std::string where = origin + ": generators[" + std::to_string(i) + "]";
    const auto& g = gens[i];
    const auto kind = field<std::string>(g, "kind", where);
    if (kind != "thermal" && kind != "wind") throw IoError(where + ": kind must be 'thermal' or 'wind'");
    s.generators.push_back(Generator{field<std::string>(g, "id", where),
                                     kind == "wind" ? GenKind::wind : GenKind::thermal,
                                     field<std::string>(g, "bus", where), field<double>(g, "p_min", where),
                                     field<double>(g, "p_max", where), field<double>(g, "variable_cost", where),
                                     optional_number(g, "ramp_up", where), optional_number(g, "ramp_down", where)});
  }
  return s;
}

std::string system_to_json(const SystemSpec& spec) {
  json j;
  j["buses"] = spec.buses;
  j["lines"] = json::array();
  for (const auto& l : spec.lines)
    j["lines"].push_back({{"id", l.id},
                          {"from_bus", l.from_bus},
                          {"to_bus", l.to_bus},
                          {"flow_limit", l.flow_limit},
                          {"transmission_cost", l.transmission_cost}});
  j["generators"] = json::array();
  for (const auto& g : spec.generators) {
    json o{{"id", g.id},
           {"kind", g.kind == GenKind::wind ? "wind" : "thermal"},
           {"bus", g.bus},
           {"p_min", g.p_min},
           {"p_max", g.p_max},
           {"variable_cost", g.variable_cost}};
    o["ramp_up"] = g.ramp_up ? json(*g.ramp_up) : json(nullptr);
    o["ramp_down"] = g.ramp_down ? json(*g.ramp_down) : json(nullptr);
    j["generators"].push_back(o);
  }
  j["nsp_cost"] = spec.nsp_cost;
  return j.dump(2) + "\n";
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto a = cell.find_first_not_of(" \t\r");
    const auto b = cell.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? std::string() : cell.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double number(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw IoError(where + ": '" + s + "' is not a number");
  return v;
}

struct Entry {
  int hour;
  std::string key;
  double value;
};

std::vector<Entry> read_table(const std::string& text, const std::vector<std::string>& header, const std::string& where) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<Entry> out;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    const std::string at = where + ":" + std::to_string(lineno);
    if (!seen_header) {
      if (cells != header)
        throw IoError(at + ": expected header '" + header[0] + "," + header[1] + "," + header[2] + "'");
      seen_header = true;
      continue;
    }
    if (cells.size() != 3) throw IoError(at + ": expected 3 columns");
    const double h = number(cells[0], at);
    if (h < 1 || h != std::floor(h) || h > std::numeric_limits<int>::max())
      throw IoError(at + ": hour must be a positive integer");
    out.push_back({static_cast<int>(h), cells[1], number(cells[2], at)});
  }
  if (!seen_header) throw IoError(where + ": empty file");
  return out;
}

}  // namespace

TimeSeriesSet parse_series_csv(const std::string& demand_csv, const std::string& cf_csv, const std::string& origin) {
  const auto d = read_table(demand_csv, {"hour", "bus", "demand_mw"}, origin + " (demand)");
  const auto f = read_table(cf_csv, {"hour", "unit", "cf"}, origin + " (cf)");
  TimeSeriesSet s;
  for (const auto& e : d) s.horizon = std::max(s.horizon, e.hour);
  for (const auto& e : f) s.horizon = std::max(s.horizon, e.hour);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& e : d) {
    auto& v = s.demand[e.key];
    if (v.empty()) v.assign(s.horizon, nan);
    if (!std::isnan(v[e.hour - 1]))
      throw IoError(origin + " (demand): duplicate entry for (" + e.key + ", " + std::to_string(e.hour) + ")");
    v[e.hour - 1] = e.value;
  }
  for (const auto& e : f) {
    auto& v = s.capacity_factor[e.key];
    if (v.empty()) v.assign(s.horizon, nan);
    if (!std::isnan(v[e.hour - 1]))
      throw IoError(origin + " (cf): duplicate entry for (" + e.key + ", " + std::to_string(e.hour) + ")");
    v[e.hour - 1] = e.value;
  }
  return s;
}

namespace {

// shortest representation that round-trips
std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string demand_to_csv(const TimeSeriesSet& s) {
  std::string out = "hour,bus,demand_mw\n";
  for (int k = 0; k < s.horizon; ++k)
    for (const auto& [bus, v] : s.demand) out += std::to_string(k + 1) + "," + bus + "," + fmt(v.at(k)) + "\n";
  return out;
}

std::string cf_to_csv(const TimeSeriesSet& s) {
  std::string out = "hour,unit,cf\n";
  for (int k = 0; k < s.horizon; ++k)
    for (const auto& [unit, v] : s.capacity_factor) out += std::to_string(k + 1) + "," + unit + "," + fmt(v.at(k)) + "\n";
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed: " + p.string());
}

std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string case_hash(const SystemSpec& spec, const TimeSeriesSet& series) {
  std::uint64_t h = fnv1a64(system_to_json(spec));
  h = fnv1a64(demand_to_csv(series), h);
  h = fnv1a64(cf_to_csv(series), h);
  return hex64(h);
}

}  // namespace btsa
