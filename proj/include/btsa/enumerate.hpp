#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "btsa/basis_id.hpp"
#include "btsa/system.hpp"

namespace btsa {

/// S(n, k) for 0 <= k <= n <= 20. Throws std::out_of_range otherwise.
std::uint64_t stirling(int n, int k);
/// Bell(n) for 0 <= n <= 20.
std::uint64_t bell(int n);

/// Restricted-growth string: rgs[0] = 0 and rgs[i] <= 1 + max(rgs[0..i-1]).
struct SetPartition {
  std::vector<int> rgs;
  int n_blocks = 0;

  std::vector<std::vector<int>> blocks() const;
  bool operator==(const SetPartition& o) const { return rgs == o.rgs; }
};

/// Canonical form of an arbitrary labelling (blocks numbered by first occurrence).
SetPartition canonical_partition(std::span<const int> labels);

inline constexpr int kMaxEnumerationSize = 15;

class EnumerationGuard : public std::length_error {
 public:
  EnumerationGuard(int n, std::uint64_t count);
  std::uint64_t count() const { return count_; }

 private:
  std::uint64_t count_;
};

/// Streams every partition of n items (k == 0) or those with exactly k blocks,
/// in lexicographic RGS order. Throws EnumerationGuard for n > 15.
void for_each_partition(int n, int k, const std::function<void(const SetPartition&)>& visit);
std::vector<SetPartition> enumerate_partitions(int n, int k = 0);

/// True iff every block of p lies inside a block of q. Throws on size mismatch.
bool is_refinement(const SetPartition& p, const SetPartition& q);

/// Optimal cost of one single-node dispatch hour: units filled in merit order
/// from their lower bounds, nsp covering the rest. `available` holds the
/// upper bound of each generator. Returns +inf when the lower bounds already
/// exceed demand.
double merit_order_cost(const SystemSpec& spec, double demand, std::span<const double> available);

struct CensusRow {
  int k = 0;
  std::uint64_t n_partitions = 0;
  std::uint64_t n_zero_error = 0;
  std::uint64_t n_zero_error_refining = 0;  // zero-error partitions refining the basis partition
  std::vector<SetPartition> exemplars;      // first zero-error partitions in RGS order
};

struct CensusOptions {
  double tol = 1e-9;  // relative zero-error threshold
  int max_exemplars = 3;
  int sample_every = 10000;  // simplex cross-check of one partition in this many
  SignatureMode mode = SignatureMode::duals;
  double q = 1e-6;
  int prefix_depth = 7;  // parallel work items are RGS prefixes of this length
};

struct CensusResult {
  int n = 0;
  double obj_full = 0.0;          // closed form
  double obj_full_simplex = 0.0;  // bundled solver
  std::vector<CensusRow> rows;    // k = 1..n
  SetPartition basis_partition;
  bool basis_zero_error = false;
  int min_zero_error_k = 0;
  bool unique_at_min = false;           // exactly one zero-error partition at min k
  bool basis_is_unique_minimum = false;  // ... and it is the basis partition
  std::uint64_t n_zero_error = 0;
  std::uint64_t n_zero_error_not_refining = 0;
  std::uint64_t n_partitions = 0;
  int n_cross_checks = 0;
  double max_cross_check_error = 0.0;  // relative, closed form vs simplex
};

/// Evaluates every partition of the case's hours as an aggregated ED model.
/// The case must be single-node-collapsible (ED variant) with horizon <= 15.
CensusResult zero_error_census(const ValidatedCase& c, const CensusOptions& opts = {});
CensusResult zero_error_census_serial(const ValidatedCase& c, const CensusOptions& opts = {});

}  // namespace btsa
