#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "btsa/system.hpp"

namespace btsa {

/// Unreadable, unwritable or malformed file; the message names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// System file: {"buses": [...], "lines": [...], "generators": [...], "nsp_cost": x}.
SystemSpec parse_system_json(const std::string& text, const std::string& origin = "<system>");
std::string system_to_json(const SystemSpec& spec);

/// Series files use 1-based hours: `hour,bus,demand_mw` and `hour,unit,cf`.
/// The horizon is the largest hour seen in either file; absent entries are
/// left as NaN so validation can name them.
TimeSeriesSet parse_series_csv(const std::string& demand_csv, const std::string& cf_csv,
                               const std::string& origin = "<series>");
std::string demand_to_csv(const TimeSeriesSet& s);
std::string cf_to_csv(const TimeSeriesSet& s);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t seed = 14695981039346656037ULL);
std::string hex64(std::uint64_t v);

/// Hash of the canonical serialisation of a case, independent of how the
/// input files were formatted.
std::string case_hash(const SystemSpec& spec, const TimeSeriesSet& series);

}  // namespace btsa
