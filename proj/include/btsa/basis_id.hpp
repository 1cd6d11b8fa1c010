#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "btsa/lp.hpp"
#include "btsa/psom.hpp"

namespace btsa {

enum class SignatureMode { duals, active_set };

std::string mode_name(SignatureMode m);

/// Hour-relative encoding of one slot's optimal solution. In `duals` mode the
/// values are row duals and reduced costs rounded to multiples of q; in
/// `active_set` mode they are BasisStatus codes.
struct BasisSignature {
  SignatureMode mode = SignatureMode::duals;
  double q = 1e-6;
  std::vector<std::pair<std::string, std::int64_t>> entries;

  /// Canonical text, e.g. "balance[bus=B1]=24000000;p[g=W1]=-21000000".
  std::string key() const;
  bool operator==(const BasisSignature& o) const { return mode == o.mode && entries == o.entries; }
};

/// Throws std::out_of_range for a bad slot and std::invalid_argument for a
/// non-optimal result or q <= 0.
BasisSignature hour_signature(const SolveResult& r, const IndexMap& im, int slot, SignatureMode mode,
                              double q = 1e-6);

/// Signatures of every slot; the OpenMP path and the serial path agree exactly.
std::vector<BasisSignature> hour_signatures(const SolveResult& r, const IndexMap& im, SignatureMode mode,
                                            double q = 1e-6, bool parallel = true);

struct HourCluster {
  BasisSignature signature;
  std::vector<int> members;  // ascending hours
  std::vector<double> demand;  // per bus, mean over members
  std::vector<double> cf;      // per generator, mean over members
  double weight() const { return static_cast<double>(members.size()); }
};

/// Groups hours with equal signatures. Clusters are ordered by their first
/// member, so the result does not depend on hash or map ordering.
std::vector<HourCluster> cluster_hours(const ValidatedCase& c, std::span<const BasisSignature> signatures);

/// Clusters from an arbitrary labelling (label per hour), used by baselines
/// and the census; signatures are left empty.
std::vector<HourCluster> cluster_by_label(const ValidatedCase& c, std::span<const int> label);

/// One length-1 representative period per cluster.
RepresentativePeriods clusters_to_periods(const std::vector<HourCluster>& clusters);

/// True when both labellings induce the same partition of the hours.
bool same_grouping(std::span<const BasisSignature> a, std::span<const BasisSignature> b);

}  // namespace btsa
