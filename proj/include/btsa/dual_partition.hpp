#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "btsa/lp.hpp"
#include "btsa/psom.hpp"

namespace btsa {

struct McDecomposition {
  int a = 0;  // coefficient of the nsp cost
  int b = 0;  // thermal cost
  int c = 0;  // wind cost
  double residual = 0.0;
  bool sign_coupled = true;  // b * c <= 0
};

class NoDecomposition : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integer triple with mc ~= a*vc_nsp + b*vc_t + c*vc_w, a in {0,1},
/// |b| <= bound. Prefers b*c <= 0, then the smallest |a|+|b|+|c|, then
/// smallest |a|, then smallest |b|. Throws NoDecomposition when nothing is
/// within tol and std::invalid_argument unless vc_nsp > vc_t > vc_w >= 0.
McDecomposition decompose_mc(double mc, double vc_nsp, double vc_t, double vc_w, double tol = 1e-6,
                             int bound = 60);

/// round(mc / vc_t), at least 1.
int ramp_length(double mc, double vc_t);

enum class LengthRule { decomposition_b, nearest_multiple };
enum class PartitionRule { algorithm1, ramp_duals };

std::optional<LengthRule> parse_length_rule(const std::string& s);
std::string length_rule_name(LengthRule r);
std::optional<PartitionRule> parse_partition_rule(const std::string& s);
std::string partition_rule_name(PartitionRule r);

struct PartitionOptions {
  double q = 1e-6;
  double decomposition_tol = 1e-6;
  int decomposition_bound = 60;
  LengthRule length_rule = LengthRule::decomposition_b;
  PartitionRule rule = PartitionRule::algorithm1;
  /// Alg. 1 extends either backward (ramp-up) or forward (ramp-down); with
  /// this set an hour with both adjacent ramp rows active is extended both ways.
  bool both_directions = false;
  /// Resume the scan after a forward extension (the pseudocode's t <- t'+1)
  /// instead of visiting every hour.
  bool skip_marked = true;
};

enum ChunkFlag : unsigned {
  kBoundaryTruncated = 1u,  // search ran into the first or last hour
  kUndecomposable = 2u,     // MC had no integer decomposition
  kNoActiveRamp = 4u,       // non-separable MC without an active adjacent ramp row
};

struct Chunk {
  int start = 0;
  int length = 1;
  unsigned flags = 0;
};

struct PartitionResult {
  std::vector<Chunk> chunks;
  std::vector<unsigned> hour_flags;
  std::vector<std::vector<double>> mc;  // [hour][node]
  int length_rule_disagreements = 0;    // non-separable hours where |b| != round(mc / vc_t)
};

/// Dual-based partitioning of a full ramping model's horizon. Chunks are
/// contiguous, disjoint, ordered and cover every hour.
PartitionResult partition_horizon(const SolveResult& r, const IndexMap& im, const ValidatedCase& c,
                                  const PartitionOptions& opts = {});

struct ChunkCheck {
  double cost_full = 0.0;   // chunk's share of the full objective
  double cost_alone = 0.0;  // optimum of the chunk solved on its own
  bool pass = true;
};

struct IndependenceReport {
  std::vector<ChunkCheck> chunks;
  int n_failed = 0;
  bool pass() const { return n_failed == 0; }
};

/// Solves every chunk as an independent LP and compares with the full solution.
IndependenceReport check_chunks(const ValidatedCase& c, ModelVariant v, const std::vector<Chunk>& chunks,
                                const LpProblem& full_lp, const SolveResult& full, const IndexMap& im,
                                const BuildOptions& bopts = {}, const SolveOptions& sopts = {}, double tol = 1e-8);

/// Cost of each chunk in the full solution.
std::vector<double> chunk_costs(const LpProblem& lp, const SolveResult& r, const IndexMap& im,
                                const std::vector<Chunk>& chunks);

struct ChunkBasis {
  std::string signature;
  int length = 1;
  std::vector<int> members;  // chunk indices, ascending
  RepresentativePeriod centroid;
  double weight() const { return static_cast<double>(members.size()); }
};

/// Groups chunks of equal length whose quantized duals agree position by
/// position (ramp rows linking a chunk to the hour before it are left out).
std::vector<ChunkBasis> group_chunks(const ValidatedCase& c, const std::vector<Chunk>& chunks, const SolveResult& r,
                                     const IndexMap& im, double q = 1e-6);

/// Throws std::invalid_argument when the bases do not cover `horizon` hours.
RepresentativePeriods to_representative_periods(const std::vector<ChunkBasis>& bases, int horizon);

struct LengthSummaryRow {
  int length = 0;
  int n_subsets = 0;
  int n_bases = 0;
  double obj_fun_avg = 0.0;
};

std::vector<LengthSummaryRow> summarize_lengths(const std::vector<Chunk>& chunks, const std::vector<ChunkBasis>& bases,
                                                const std::vector<double>& costs);

}  // namespace btsa
