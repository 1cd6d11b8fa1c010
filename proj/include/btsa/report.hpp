#pragma once

#include <string>
#include <vector>

#include "btsa/aggregator.hpp"
#include "btsa/enumerate.hpp"
#include "json.hpp"

namespace btsa {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.3.0";

Json to_json(const KktReport& k);
Json to_json(const AggregationReport& r);
Json to_json(const CensusResult& r);

/// quantity,aggregated_model,complete_model,size_reduction_pct
std::string table_ii_csv(const AggregationReport& r);
/// length,n_subsets,n_bases,obj_fun_avg
std::string table_vii_csv(const std::vector<LengthSummaryRow>& rows);
/// variant,method,n_bases,max_subset_length,required_repr_hours,size_reduction_variables_pct
std::string table_viii_header();
std::string table_viii_row(const AggregationReport& r);
/// hour,demand,available_wind,basis_id (1-based hours, system totals)
std::string plot_csv(const ValidatedCase& c, const AggregationReport& r);
/// chunk_id,start_hour,length
std::string partition_csv(const std::vector<Chunk>& chunks);
Json bases_json(const std::vector<ChunkBasis>& bases, const std::vector<Chunk>& chunks);
/// cluster_id,hour
std::string clusters_csv(const std::vector<HourCluster>& clusters);
Json clusters_json(const ValidatedCase& c, const std::vector<HourCluster>& clusters);
/// clusters,possible_clusterings,clusterings_with_no_error
std::string census_csv(const CensusResult& r);
/// hour,label,kind,value: row duals, reduced costs and primal values per hour
std::string duals_csv(const SolveResult& r, const IndexMap& im);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace btsa
