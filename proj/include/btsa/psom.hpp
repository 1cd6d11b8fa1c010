#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "btsa/lp.hpp"
#include "btsa/system.hpp"

namespace btsa {

enum class ModelVariant { ed, ed_network, ed_ramping, ed_network_ramping };

std::optional<ModelVariant> parse_variant(const std::string& s);
std::string variant_name(ModelVariant v);
inline bool has_network(ModelVariant v) { return v == ModelVariant::ed_network || v == ModelVariant::ed_network_ramping; }
inline bool has_ramping(ModelVariant v) { return v == ModelVariant::ed_ramping || v == ModelVariant::ed_network_ramping; }

enum class FlowLimitMode {
  per_line,  ///< one row f_ij <= F_l per directed line
  per_bus    ///< for each bus and incident line: sum of exports <= F_l and sum of imports <= F_l
};

struct BuildOptions {
  /// Weight only the nsp term of each representative period (literal Eq. 2a).
  bool strict_paper_objective = false;
  FlowLimitMode flow_limits = FlowLimitMode::per_line;
};

/// A contiguous block of hours in an aggregated model. `demand[pos][bus]` and
/// `cf[pos][gen]` hold the centroid data (cf is 1 for thermal units).
struct RepresentativePeriod {
  int length = 1;
  double weight = 1.0;
  std::vector<std::vector<double>> demand;
  std::vector<std::vector<double>> cf;
};
using RepresentativePeriods = std::vector<RepresentativePeriod>;

/// Period holding the case's own data for hours [start, start + length).
RepresentativePeriod period_from_hours(const ValidatedCase& c, int start, int length, double weight = 1.0);

/// Column and row handles of a built model. A "slot" is one hour position:
/// for full models slot == hour, for aggregated models the slots of period r
/// are period_offset[r] .. period_offset[r+1]-1.
class IndexMap {
 public:
  ModelVariant variant = ModelVariant::ed;
  int n_gens = 0;
  int n_nodes = 0;  ///< balance nodes: buses for network variants, 1 otherwise
  int n_lines = 0;
  std::vector<int> period_offset{0};
  std::vector<double> period_weight;

  int n_periods() const { return static_cast<int>(period_offset.size()) - 1; }
  int n_slots() const { return period_offset.back(); }
  int period_length(int r) const { return period_offset[r + 1] - period_offset[r]; }
  int slot(int period, int pos) const { return period_offset[period] + pos; }

  int gen_col(int s, int g) const { return gen_col_[s * n_gens + g]; }
  int nsp_col(int s, int node) const { return nsp_col_[s * n_nodes + node]; }
  /// dir 0: from_bus -> to_bus, dir 1: reverse. -1 without network.
  int flow_col(int s, int l, int dir) const { return n_lines ? flow_col_[(s * n_lines + l) * 2 + dir] : -1; }
  int balance_row(int s, int node) const { return balance_row_[s * n_nodes + node]; }
  /// -1 when the unit has no such limit or the slot opens its period.
  int rampup_row(int s, int g) const { return rampup_row_[s * n_gens + g]; }
  int rampdown_row(int s, int g) const { return rampdown_row_[s * n_gens + g]; }

  std::span<const int> slot_rows(int s) const { return slice(slot_rows_, slot_row_start_, s); }
  std::span<const int> slot_cols(int s) const { return slice(slot_cols_, slot_col_start_, s); }
  /// Label without the period/hour dimensions, e.g. "balance[bus=B1]".
  const std::string& row_key(int row) const { return row_key_[row]; }
  const std::string& col_key(int col) const { return col_key_[col]; }

  int cols_per_slot() const;
  int rows_first_slot() const;  ///< rows of a slot that opens a period
  int rows_next_slot() const;   ///< rows of any later slot (adds ramp rows)

 private:
  friend class ModelAssembler;
  static std::span<const int> slice(const std::vector<int>& v, const std::vector<int>& start, int s) {
    return {v.data() + start[s], static_cast<std::size_t>(start[s + 1] - start[s])};
  }
  std::vector<int> gen_col_, nsp_col_, flow_col_, balance_row_, rampup_row_, rampdown_row_;
  std::vector<int> slot_rows_, slot_row_start_{0}, slot_cols_, slot_col_start_{0};
  std::vector<std::string> row_key_, col_key_;
  int rows_first_ = 0, rows_next_ = 0, cols_ = 0;
};

struct BuiltModel {
  LpProblem lp;
  IndexMap index;
};

/// Hourly model over the whole horizon. Throws std::invalid_argument when a
/// ramping variant is requested for a case without ramp limits.
BuiltModel build_full(const ValidatedCase& c, ModelVariant v, const BuildOptions& opts = {});

/// Weighted model over representative periods. Requires sum(length * weight)
/// to equal the horizon (throws std::invalid_argument otherwise). Ramping rows
/// only link positions inside the same period.
BuiltModel build_aggregated(const ValidatedCase& c, const RepresentativePeriods& periods, ModelVariant v,
                            const BuildOptions& opts = {});

/// Closed-form model sizes, used to cross-check the builders.
struct ModelSize {
  long cols = 0;
  long rows = 0;
};
ModelSize expected_size(const ValidatedCase& c, ModelVariant v, std::span<const int> period_lengths,
                        const BuildOptions& opts = {});

}  // namespace btsa
