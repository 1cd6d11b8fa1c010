#include "btsa/basis_id.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace btsa {

std::string mode_name(SignatureMode m) { return m == SignatureMode::duals ? "duals" : "active_set"; }

std::string BasisSignature::key() const {
  std::string s;
  for (const auto& [label, v] : entries) {
    if (!s.empty()) s += ';';
    s += label;
    s += '=';
    s += std::to_string(v);
  }
  return s;
}

namespace {

std::int64_t quantize(double x, double q) {
  const auto v = static_cast<std::int64_t>(std::llround(x / q));
  return v == 0 ? 0 : v;
}

}  // namespace

BasisSignature hour_signature(const SolveResult& r, const IndexMap& im, int slot, SignatureMode mode, double q) {
  if (slot < 0 || slot >= im.n_slots()) throw std::out_of_range("hour " + std::to_string(slot) + " out of range");
  if (!r.optimal()) throw std::invalid_argument("hour_signature needs an optimal result");
  if (!(q > 0.0)) throw std::invalid_argument("quantization step must be positive");
  BasisSignature sig;
  sig.mode = mode;
  sig.q = q;
  const auto rows = im.slot_rows(slot);
  const auto cols = im.slot_cols(slot);
  sig.entries.reserve(rows.size() + cols.size());
  for (int i : rows) {
    const std::int64_t v =
        mode == SignatureMode::duals ? quantize(r.row_duals[i], q) : static_cast<std::int64_t>(r.row_status[i]);
    sig.entries.emplace_back(im.row_key(i), v);
  }
  for (int j : cols) {
    const std::int64_t v =
        mode == SignatureMode::duals ? quantize(r.bound_duals[j], q) : static_cast<std::int64_t>(r.col_status[j]);
    sig.entries.emplace_back(im.col_key(j), v);
  }
  return sig;
}

std::vector<BasisSignature> hour_signatures(const SolveResult& r, const IndexMap& im, SignatureMode mode, double q,
                                            bool parallel) {
  const int n = im.n_slots();
  if (n > 0) hour_signature(r, im, 0, mode, q);  // argument checks outside the parallel region
  std::vector<BasisSignature> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static) if (parallel)
  for (int s = 0; s < n; ++s) out[s] = hour_signature(r, im, s, mode, q);
  return out;
}

namespace {

void fill_centroids(const ValidatedCase& c, std::vector<HourCluster>& clusters) {
  for (auto& cl : clusters) {
    cl.demand.assign(static_cast<std::size_t>(c.n_buses()), 0.0);
    cl.cf.assign(static_cast<std::size_t>(c.n_generators()), 0.0);
    for (int k : cl.members) {
      for (int b = 0; b < c.n_buses(); ++b) cl.demand[b] += c.demand(b, k);
      for (int g = 0; g < c.n_generators(); ++g) cl.cf[g] += c.cf(g, k);
    }
    const double n = static_cast<double>(cl.members.size());
    for (double& x : cl.demand) x /= n;
    for (double& x : cl.cf) x /= n;
  }
}

}  // namespace

std::vector<HourCluster> cluster_hours(const ValidatedCase& c, std::span<const BasisSignature> signatures) {
  if (static_cast<int>(signatures.size()) != c.horizon())
    throw std::invalid_argument("cluster_hours: need one signature per hour");
  std::unordered_map<std::string, int> index;
  std::vector<HourCluster> clusters;
  for (int k = 0; k < c.horizon(); ++k) {
    auto [it, fresh] = index.try_emplace(signatures[k].key(), static_cast<int>(clusters.size()));
    if (fresh) {
      clusters.emplace_back();
      clusters.back().signature = signatures[k];
    }
    clusters[it->second].members.push_back(k);
  }
  fill_centroids(c, clusters);
  return clusters;
}

std::vector<HourCluster> cluster_by_label(const ValidatedCase& c, std::span<const int> label) {
  if (static_cast<int>(label.size()) != c.horizon())
    throw std::invalid_argument("cluster_by_label: need one label per hour");
  std::map<int, int> index;
  std::vector<HourCluster> clusters;
  for (int k = 0; k < c.horizon(); ++k) {
    auto [it, fresh] = index.try_emplace(label[k], static_cast<int>(clusters.size()));
    if (fresh) clusters.emplace_back();
    clusters[it->second].members.push_back(k);
  }
  fill_centroids(c, clusters);
  return clusters;
}

RepresentativePeriods clusters_to_periods(const std::vector<HourCluster>& clusters) {
  RepresentativePeriods out;
  out.reserve(clusters.size());
  for (const auto& cl : clusters) {
    RepresentativePeriod p;
    p.length = 1;
    p.weight = cl.weight();
    p.demand = {cl.demand};
    p.cf = {cl.cf};
    out.push_back(std::move(p));
  }
  return out;
}

bool same_grouping(std::span<const BasisSignature> a, std::span<const BasisSignature> b) {
  if (a.size() != b.size()) return false;
  std::unordered_map<std::string, std::string> fwd, bwd;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto ka = a[k].key(), kb = b[k].key();
    auto [i, f1] = fwd.try_emplace(ka, kb);
    auto [j, f2] = bwd.try_emplace(kb, ka);
    if (i->second != kb || j->second != ka) return false;
  }
  return true;
}

}  // namespace btsa
