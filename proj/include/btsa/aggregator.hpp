#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "btsa/basis_id.hpp"
#include "btsa/dual_partition.hpp"
#include "btsa/kkt.hpp"
#include "btsa/lp.hpp"
#include "btsa/psom.hpp"

namespace btsa {

enum class Method { hourly_basis, dual_partition, identity, naive_kmeans_stub };

std::optional<Method> parse_method(const std::string& s);
std::string method_name(Method m);

struct PipelineOptions {
  SolveOptions solve;
  BuildOptions build;
  PartitionOptions partition;
  SignatureMode signature_mode = SignatureMode::duals;
  double exact_tol = 1e-8;
  double kkt_tol = 1e-7;
  bool force = false;  // allow hourly_basis on ramping variants (Case A)
  int kmeans_k = 5;
  int kmeans_iterations = 50;
};

/// Failure of one pipeline stage ("full_solve", "aggregated_solve", ...).
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct SizeStats {
  long n_vars_full = 0, n_vars_agg = 0;
  long n_rows_full = 0, n_rows_agg = 0;
  double size_reduction_pct = 0.0;  // variables
  double row_reduction_pct = 0.0;
};

SizeStats size_stats(const LpProblem& full, const LpProblem& agg);

struct FailedChunk {
  int start_hour = 0;  // 1-based
  int length = 0;
  double cost_full = 0.0;
  double cost_alone = 0.0;
};

struct AggregationReport {
  ModelVariant variant = ModelVariant::ed;
  Method method = Method::identity;
  int horizon = 0;
  double obj_full = 0.0;
  double obj_agg = 0.0;
  double rel_error = 0.0;
  int n_bases = 0;
  int max_chunk_length = 0;
  int represented_hours = 0;
  double hour_reduction_factor = 0.0;  // horizon / represented_hours
  SizeStats size;
  bool zero_error_expected = false;
  bool exact = false;  // rel_error < exact_tol
  KktReport kkt_full;
  KktReport kkt_agg;
  long iterations_full = 0;
  long iterations_agg = 0;

  // hourly_basis
  std::optional<bool> signature_modes_agree;
  // dual_partition
  int n_chunks = 0;
  int n_flagged_chunks = 0;
  int n_failed_chunks = 0;
  int length_rule_disagreements = 0;
  int n_hours_mc_linked = 0;  // MC outside the set of unit variable costs and nsp
  std::vector<FailedChunk> failed_chunks;
  std::vector<LengthSummaryRow> length_table;
  std::vector<Chunk> chunks;

  std::vector<int> hour_basis;  // basis index per hour (plot data)
  std::vector<HourCluster> clusters;  // hourly_basis, naive_kmeans_stub
  std::vector<ChunkBasis> bases;      // dual_partition
  std::vector<std::string> warnings;
};

AggregationReport run_pipeline(const ValidatedCase& c, ModelVariant v, Method m, const PipelineOptions& opts = {});

/// Deterministic Lloyd iterations on (total demand, wind availability) per
/// hour; seeds are hours at evenly spaced demand quantiles. Returns a label
/// per hour.
std::vector<int> naive_kmeans(const ValidatedCase& c, int k, int iterations);

}  // namespace btsa
