#include "btsa/report.hpp"

#include <charconv>
#include <cmath>

namespace btsa {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json to_json(const KktReport& k) {
  return Json{{"primal_residual", k.primal_residual},
              {"dual_residual", k.dual_residual},
              {"complementarity", k.complementarity},
              {"dual_sign", k.dual_sign},
              {"tolerance", k.tolerance},
              {"pass", k.pass}};
}

Json to_json(const AggregationReport& r) {
  Json j;
  j["variant"] = variant_name(r.variant);
  j["method"] = method_name(r.method);
  j["horizon"] = r.horizon;
  j["obj_full"] = r.obj_full;
  j["obj_agg"] = r.obj_agg;
  j["rel_error"] = r.rel_error;
  j["zero_error_expected"] = r.zero_error_expected;
  j["exact"] = r.exact;
  j["n_bases"] = r.n_bases;
  j["max_chunk_length"] = r.max_chunk_length;
  j["represented_hours"] = r.represented_hours;
  j["hour_reduction_factor"] = r.hour_reduction_factor;
  j["n_vars_full"] = r.size.n_vars_full;
  j["n_vars_agg"] = r.size.n_vars_agg;
  j["n_rows_full"] = r.size.n_rows_full;
  j["n_rows_agg"] = r.size.n_rows_agg;
  j["size_reduction_pct"] = r.size.size_reduction_pct;
  j["row_reduction_pct"] = r.size.row_reduction_pct;
  j["n_hours_mc_linked"] = r.n_hours_mc_linked;
  j["kkt_full"] = to_json(r.kkt_full);
  j["kkt_agg"] = to_json(r.kkt_agg);
  j["iterations_full"] = r.iterations_full;
  j["iterations_agg"] = r.iterations_agg;
  if (r.signature_modes_agree) j["signature_modes_agree"] = *r.signature_modes_agree;
  if (r.method == Method::dual_partition) {
    j["n_chunks"] = r.n_chunks;
    j["n_flagged_chunks"] = r.n_flagged_chunks;
    j["n_failed_chunks"] = r.n_failed_chunks;
    j["length_rule_disagreements"] = r.length_rule_disagreements;
    Json failed = Json::array();
    for (const auto& f : r.failed_chunks)
      failed.push_back({{"start_hour", f.start_hour},
                        {"length", f.length},
                        {"cost_full", f.cost_full},
                        {"cost_alone", f.cost_alone}});
    j["failed_chunks"] = failed;
    Json table = Json::array();
    for (const auto& row : r.length_table)
      table.push_back({{"length", row.length},
                       {"n_subsets", row.n_subsets},
                       {"n_bases", row.n_bases},
                       {"obj_fun_avg", row.obj_fun_avg}});
    j["length_table"] = table;
  }
  j["warnings"] = r.warnings;
  return j;
}

Json to_json(const CensusResult& r) {
  Json j;
  j["n"] = r.n;
  j["obj_full"] = r.obj_full;
  j["obj_full_simplex"] = r.obj_full_simplex;
  j["n_partitions"] = r.n_partitions;
  j["basis_partition"] = r.basis_partition.rgs;
  j["basis_partition_blocks"] = r.basis_partition.n_blocks;
  j["basis_zero_error"] = r.basis_zero_error;
  j["min_zero_error_k"] = r.min_zero_error_k;
  j["unique_at_min"] = r.unique_at_min;
  j["basis_is_unique_minimum"] = r.basis_is_unique_minimum;
  j["n_zero_error"] = r.n_zero_error;
  j["n_zero_error_not_refining"] = r.n_zero_error_not_refining;
  j["n_cross_checks"] = r.n_cross_checks;
  j["max_cross_check_error"] = r.max_cross_check_error;
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json ex = Json::array();
    for (const auto& p : row.exemplars) ex.push_back(p.rgs);
    rows.push_back({{"k", row.k},
                    {"n_partitions", row.n_partitions},
                    {"stirling", stirling(r.n, row.k)},
                    {"n_zero_error", row.n_zero_error},
                    {"n_zero_error_refining", row.n_zero_error_refining},
                    {"exemplars", ex}});
  }
  j["rows"] = rows;
  return j;
}

std::string table_ii_csv(const AggregationReport& r) {
  std::string s = "quantity,aggregated_model,complete_model,size_reduction_pct\n";
  s += "variables," + std::to_string(r.size.n_vars_agg) + "," + std::to_string(r.size.n_vars_full) + "," +
       format_double(r.size.size_reduction_pct) + "\n";
  s += "constraints," + std::to_string(r.size.n_rows_agg) + "," + std::to_string(r.size.n_rows_full) + "," +
       format_double(r.size.row_reduction_pct) + "\n";
  return s;
}

std::string table_vii_csv(const std::vector<LengthSummaryRow>& rows) {
  std::string s = "length,n_subsets,n_bases,obj_fun_avg\n";
  for (const auto& r : rows)
    s += std::to_string(r.length) + "," + std::to_string(r.n_subsets) + "," + std::to_string(r.n_bases) + "," +
         format_double(r.obj_fun_avg) + "\n";
  return s;
}

std::string table_viii_header() {
  return "variant,method,n_bases,max_subset_length,required_repr_hours,size_reduction_variables_pct\n";
}

std::string table_viii_row(const AggregationReport& r) {
  return variant_name(r.variant) + "," + method_name(r.method) + "," + std::to_string(r.n_bases) + "," +
         std::to_string(r.max_chunk_length) + "," + std::to_string(r.represented_hours) + "," +
         format_double(r.size.size_reduction_pct) + "\n";
}

std::string plot_csv(const ValidatedCase& c, const AggregationReport& r) {
  std::string s = "hour,demand,available_wind,basis_id\n";
  const auto wind = c.wind_units();
  for (int k = 0; k < c.horizon(); ++k) {
    double d = 0.0, w = 0.0;
    for (int b = 0; b < c.n_buses(); ++b) d += c.demand(b, k);
    for (int g : wind) w += c.available(g, k);
    s += std::to_string(k + 1) + "," + format_double(d) + "," + format_double(w) + "," +
         std::to_string(r.hour_basis.at(k) + 1) + "\n";
  }
  return s;
}

std::string partition_csv(const std::vector<Chunk>& chunks) {
  std::string s = "chunk_id,start_hour,length\n";
  for (std::size_t i = 0; i < chunks.size(); ++i)
    s += std::to_string(i + 1) + "," + std::to_string(chunks[i].start + 1) + "," + std::to_string(chunks[i].length) +
         "\n";
  return s;
}

Json bases_json(const std::vector<ChunkBasis>& bases, const std::vector<Chunk>& chunks) {
  Json arr = Json::array();
  for (std::size_t b = 0; b < bases.size(); ++b) {
    const auto& basis = bases[b];
    Json members = Json::array();
    for (int m : basis.members) members.push_back(chunks[m].start + 1);
    arr.push_back({{"basis_id", b + 1},
                   {"length", basis.length},
                   {"weight", basis.weight()},
                   {"member_start_hours", members},
                   {"signature", basis.signature},
                   {"centroid_demand", basis.centroid.demand},
                   {"centroid_cf", basis.centroid.cf}});
  }
  return arr;
}

std::string clusters_csv(const std::vector<HourCluster>& clusters) {
  std::string s = "cluster_id,hour\n";
  for (std::size_t i = 0; i < clusters.size(); ++i)
    for (int k : clusters[i].members) s += std::to_string(i + 1) + "," + std::to_string(k + 1) + "\n";
  return s;
}

Json clusters_json(const ValidatedCase& c, const std::vector<HourCluster>& clusters) {
  Json arr = Json::array();
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const auto& cl = clusters[i];
    Json demand, cf;
    for (int b = 0; b < c.n_buses(); ++b) demand[c.spec().buses[b]] = cl.demand[b];
    for (int g = 0; g < c.n_generators(); ++g) cf[c.spec().generators[g].id] = cl.cf[g];
    arr.push_back({{"cluster_id", i + 1},
                   {"weight", cl.weight()},
                   {"signature_mode", mode_name(cl.signature.mode)},
                   {"signature", cl.signature.key()},
                   {"centroid_demand", demand},
                   {"centroid_cf", cf}});
  }
  return arr;
}

std::string census_csv(const CensusResult& r) {
  std::string s = "clusters,possible_clusterings,clusterings_with_no_error\n";
  for (const auto& row : r.rows)
    s += std::to_string(row.k) + "," + std::to_string(row.n_partitions) + "," + std::to_string(row.n_zero_error) + "\n";
  return s;
}

std::string duals_csv(const SolveResult& r, const IndexMap& im) {
  std::string s = "hour,label,kind,value\n";
  for (int k = 0; k < im.n_slots(); ++k) {
    const std::string h = std::to_string(k + 1) + ",";
    for (int i : im.slot_rows(k)) s += h + im.row_key(i) + ",row_dual," + format_double(r.row_duals[i]) + "\n";
    for (int j : im.slot_cols(k)) s += h + im.col_key(j) + ",reduced_cost," + format_double(r.bound_duals[j]) + "\n";
    for (int j : im.slot_cols(k)) s += h + im.col_key(j) + ",primal," + format_double(r.primal[j]) + "\n";
  }
  return s;
}

}  // namespace btsa
