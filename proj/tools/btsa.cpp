// btsa: command-line driver for basis-oriented time series aggregation.
//
// Exit codes: 0 success, 1 usage or I/O error, 2 invalid input or config,
// 3 solver failure, 4 exactness failure under --require-exact.

#include <cctype>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "btsa/aggregator.hpp"
#include "btsa/fixtures.hpp"
#include "btsa/io.hpp"
#include "btsa/report.hpp"

namespace fs = std::filesystem;
using namespace btsa;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInvalid = 2, kSolver = 3, kInexact = 4 };

struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputArgs {
  std::string system, demand, cf;
  std::string profile;
  std::string fixture;
  std::uint64_t seed = 1;
  int horizon = 8736;
};

struct TolArgs {
  double feas = 1e-9;
  double q = 1e-6;
  double exact = 1e-8;
  double decomposition = 1e-6;
};

struct ModelArgs {
  std::string variant = "ed";
  bool strict_paper_objective = false;
  std::string flow_limits = "per_line";
};

struct PartitionArgs {
  std::string length_rule = "decomposition_b";
  std::string rule = "algorithm1";
  bool both_directions = false;
  bool visit_every_hour = false;
};

std::string env_name(const std::string& flag) {
  std::string s = "BTSA_";
  for (char ch : flag) s += ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

template <class T>
CLI::Option* flag_opt(CLI::App* app, const std::string& name, T& target, const std::string& help) {
  return app->add_option("--" + name, target, help)->envname(env_name(name))->capture_default_str();
}

CLI::Option* bool_flag(CLI::App* app, const std::string& name, bool& target, const std::string& help) {
  return app->add_flag("--" + name, target, help)->envname(env_name(name));
}

void add_input(CLI::App* app, InputArgs& in) {
  flag_opt(app, "system", in.system, "system JSON file");
  flag_opt(app, "demand", in.demand, "demand CSV (hour,bus,demand_mw)");
  flag_opt(app, "cf", in.cf, "capacity factor CSV (hour,unit,cf)");
  flag_opt(app, "profile", in.profile, "synthesize instead: single_node, single_node_rampstress, three_bus, three_bus_rampstress");
  flag_opt(app, "seed", in.seed, "synthesis seed");
  flag_opt(app, "horizon", in.horizon, "synthesis horizon in hours");
  flag_opt(app, "fixture", in.fixture, "built-in case: table, table_ramping, regime[:PATTERN]");
}

void add_tols(CLI::App* app, TolArgs& t) {
  flag_opt(app, "feas-tol", t.feas, "simplex feasibility tolerance");
  flag_opt(app, "q", t.q, "dual quantization step");
  flag_opt(app, "exact-tol", t.exact, "relative zero-error threshold");
  flag_opt(app, "decomposition-tol", t.decomposition, "marginal cost decomposition tolerance");
}

void add_model(CLI::App* app, ModelArgs& m) {
  flag_opt(app, "variant", m.variant, "ed, ed_network, ed_ramping, ed_network_ramping");
  bool_flag(app, "strict-paper-objective", m.strict_paper_objective, "weight only the nsp term of each period");
  flag_opt(app, "flow-limits", m.flow_limits, "per_line or per_bus");
}

void add_partition(CLI::App* app, PartitionArgs& p) {
  flag_opt(app, "length-rule", p.length_rule, "decomposition_b or nearest_multiple");
  flag_opt(app, "partition-rule", p.rule, "algorithm1 or ramp_duals");
  bool_flag(app, "both-directions", p.both_directions, "extend backward and forward when both ramp rows bind");
  bool_flag(app, "visit-every-hour", p.visit_every_hour, "do not skip hours covered by a forward extension");
}

struct LoadedCase {
  SystemSpec spec;
  TimeSeriesSet series;
  std::string source;
};

LoadedCase load(const InputArgs& in) {
  const int sources = !in.fixture.empty() + !in.profile.empty() + !in.system.empty();
  if (sources != 1) throw CLI::ValidationError("input", "give exactly one of --system, --profile or --fixture");
  if (!in.fixture.empty()) {
    SynthCase sc;
    if (in.fixture == "table")
      sc = table_case(false);
    else if (in.fixture == "table_ramping")
      sc = table_case(true);
    else if (in.fixture.rfind("regime", 0) == 0)
      sc = in.fixture.size() > 7 && in.fixture[6] == ':' ? regime_case(in.fixture.substr(7)) : regime_case();
    else
      throw CLI::ValidationError("--fixture", "unknown fixture '" + in.fixture + "'");
    return {sc.spec, sc.series, "fixture:" + in.fixture};
  }
  if (!in.profile.empty()) {
    if (!parse_profile(in.profile)) throw CLI::ValidationError("--profile", "unknown profile '" + in.profile + "'");
    if (in.horizon < 1) throw CLI::ValidationError("--horizon", "must be >= 1");
    auto sc = synth_case(in.seed, in.horizon, in.profile);
    return {sc.spec, sc.series, "synth:" + in.profile};
  }
  if (in.demand.empty() || in.cf.empty()) throw CLI::ValidationError("input", "--system needs --demand and --cf");
  LoadedCase lc;
  lc.spec = parse_system_json(read_file(in.system), in.system);
  lc.series = parse_series_csv(read_file(in.demand), read_file(in.cf), in.demand + " / " + in.cf);
  lc.source = "files";
  return lc;
}

ValidatedCase validated(const LoadedCase& lc) {
  auto v = validate_system(lc.spec, lc.series);
  if (!v.ok()) {
    std::string msg = "input failed validation:";
    for (const auto& e : v.violations) msg += "\n  " + e.what + (e.where.empty() ? "" : " at " + e.where);
    throw ValidationFailure(msg);
  }
  return *v.validated;
}

Json input_json(const InputArgs& in, const LoadedCase& lc) {
  Json j{{"source", lc.source}};
  if (!in.fixture.empty()) j["fixture"] = in.fixture;
  if (!in.profile.empty()) {
    j["profile"] = in.profile;
    j["seed"] = in.seed;
    j["horizon"] = in.horizon;
  }
  if (!in.system.empty()) {
    j["system"] = in.system;
    j["demand"] = in.demand;
    j["cf"] = in.cf;
  }
  return j;
}

Json tol_json(const TolArgs& t) {
  return Json{{"feas_tol", t.feas}, {"q", t.q}, {"exact_tol", t.exact}, {"decomposition_tol", t.decomposition}};
}

ModelVariant variant_of(const ModelArgs& m) {
  auto v = parse_variant(m.variant);
  if (!v) throw CLI::ValidationError("--variant", "unknown variant '" + m.variant + "'");
  return *v;
}

BuildOptions build_of(const ModelArgs& m) {
  BuildOptions b;
  b.strict_paper_objective = m.strict_paper_objective;
  if (m.flow_limits == "per_bus")
    b.flow_limits = FlowLimitMode::per_bus;
  else if (m.flow_limits != "per_line")
    throw CLI::ValidationError("--flow-limits", "must be per_line or per_bus");
  return b;
}

PartitionOptions partition_of(const PartitionArgs& p, const TolArgs& t) {
  PartitionOptions o;
  o.q = t.q;
  o.decomposition_tol = t.decomposition;
  auto lr = parse_length_rule(p.length_rule);
  if (!lr) throw CLI::ValidationError("--length-rule", "unknown length rule '" + p.length_rule + "'");
  auto pr = parse_partition_rule(p.rule);
  if (!pr) throw CLI::ValidationError("--partition-rule", "unknown partition rule '" + p.rule + "'");
  o.length_rule = *lr;
  o.rule = *pr;
  o.both_directions = p.both_directions;
  o.skip_marked = !p.visit_every_hour;
  return o;
}

Json model_json(const ModelArgs& m) {
  return Json{{"variant", m.variant}, {"strict_paper_objective", m.strict_paper_objective}, {"flow_limits", m.flow_limits}};
}

Json partition_json(const PartitionArgs& p) {
  return Json{{"length_rule", p.length_rule},
              {"partition_rule", p.rule},
              {"both_directions", p.both_directions},
              {"visit_every_hour", p.visit_every_hour}};
}

void check_tols(const TolArgs& t) {
  if (!(t.feas > 0 && t.q > 0 && t.exact > 0 && t.decomposition > 0))
    throw CLI::ValidationError("tolerances", "all tolerances must be > 0");
}

Json envelope(const std::string& command, Json config, const LoadedCase& lc) {
  return Json{{"tool", "btsa"},
              {"version", kToolVersion},
              {"command", command},
              {"config", std::move(config)},
              {"input_hash", case_hash(lc.spec, lc.series)}};
}

void emit(const fs::path& dir, const std::string& name, const std::string& text) { write_file(dir / name, text); }

int cmd_gen(const InputArgs& in, const std::string& out) {
  if (in.profile.empty()) throw CLI::ValidationError("--profile", "gen needs --profile");
  const auto lc = load(in);
  validated(lc);
  const fs::path dir(out);
  emit(dir, "system.json", system_to_json(lc.spec));
  emit(dir, "demand.csv", demand_to_csv(lc.series));
  emit(dir, "cf.csv", cf_to_csv(lc.series));
  std::cout << "wrote " << (dir / "system.json").string() << ", demand.csv, cf.csv (" << lc.series.horizon
            << " hours, hash " << case_hash(lc.spec, lc.series) << ")\n";
  return kOk;
}

struct RunArgs {
  InputArgs in;
  TolArgs tol;
  ModelArgs model;
  PartitionArgs part;
  std::string method = "hourly_basis";
  std::string signature_mode = "duals";
  bool force = false;
  bool require_exact = false;
  int kmeans_k = 5;
  std::string out = "out";
};

int cmd_run(const RunArgs& a) {
  check_tols(a.tol);
  const auto lc = load(a.in);
  const auto c = validated(lc);
  const auto v = variant_of(a.model);
  auto m = parse_method(a.method);
  if (!m) throw CLI::ValidationError("--method", "unknown method '" + a.method + "'");
  PipelineOptions o;
  o.solve.feas_tol = a.tol.feas;
  o.build = build_of(a.model);
  o.partition = partition_of(a.part, a.tol);
  o.exact_tol = a.tol.exact;
  o.force = a.force;
  o.kmeans_k = a.kmeans_k;
  if (a.signature_mode == "active_set")
    o.signature_mode = SignatureMode::active_set;
  else if (a.signature_mode != "duals")
    throw CLI::ValidationError("--signature-mode", "must be duals or active_set");
  if (*m == Method::hourly_basis && has_ramping(v) && !a.force)
    throw CLI::ValidationError("--method", "hourly_basis ignores ramping links; use dual_partition or pass --force");

  const auto rep = run_pipeline(c, v, *m, o);

  Json config{{"input", input_json(a.in, lc)},
              {"model", model_json(a.model)},
              {"method", a.method},
              {"signature_mode", a.signature_mode},
              {"partition", partition_json(a.part)},
              {"tolerances", tol_json(a.tol)},
              {"force", a.force},
              {"require_exact", a.require_exact},
              {"kmeans_k", a.kmeans_k}};
  Json doc = envelope("run", config, lc);
  doc["result"] = to_json(rep);
  const fs::path dir(a.out);
  emit(dir, "report.json", doc.dump(2) + "\n");
  emit(dir, "table_ii.csv", table_ii_csv(rep));
  emit(dir, "table_viii.csv", table_viii_header() + table_viii_row(rep));
  emit(dir, "plot.csv", plot_csv(c, rep));
  if (!rep.clusters.empty()) {
    emit(dir, "clusters.csv", clusters_csv(rep.clusters));
    emit(dir, "clusters.json", clusters_json(c, rep.clusters).dump(2) + "\n");
  }
  if (*m == Method::dual_partition) {
    emit(dir, "partition.csv", partition_csv(rep.chunks));
    emit(dir, "bases.json", bases_json(rep.bases, rep.chunks).dump(2) + "\n");
    emit(dir, "table_vii.csv", table_vii_csv(rep.length_table));
  }
  std::cout << variant_name(v) << " / " << method_name(*m) << ": obj_full " << format_double(rep.obj_full)
            << ", obj_agg " << format_double(rep.obj_agg) << ", rel_error " << format_double(rep.rel_error)
            << ", bases " << rep.n_bases << ", represented hours " << rep.represented_hours << "\n";
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  if (a.require_exact && !rep.exact) {
    std::cerr << "exactness failure: rel_error " << format_double(rep.rel_error) << " >= " << format_double(a.tol.exact)
              << "\n";
    return kInexact;
  }
  return kOk;
}

struct CensusArgs {
  InputArgs in;
  double tol = 1e-9;
  int max_n = 12;
  int sample_every = 10000;
  std::string out = "out";
};

int cmd_census(const CensusArgs& a) {
  if (!(a.tol > 0)) throw CLI::ValidationError("--tol", "must be > 0");
  InputArgs in = a.in;
  if (in.fixture.empty() && in.profile.empty() && in.system.empty()) in.fixture = "regime";
  const auto lc = load(in);
  const auto c = validated(lc);
  if (c.horizon() > a.max_n) {
    if (c.horizon() > kMaxEnumerationSize) throw EnumerationGuard(c.horizon(), bell(std::min(c.horizon(), 20)));
    throw CLI::ValidationError("--max-n", "horizon " + std::to_string(c.horizon()) + " exceeds --max-n " +
                                              std::to_string(a.max_n) + " (" +
                                              std::to_string(bell(c.horizon())) + " partitions)");
  }
  CensusOptions o;
  o.tol = a.tol;
  o.sample_every = a.sample_every;
  const auto r = zero_error_census(c, o);
  Json config{{"input", input_json(in, lc)}, {"tol", a.tol}, {"max_n", a.max_n}, {"sample_every", a.sample_every}};
  Json doc = envelope("census", config, lc);
  doc["result"] = to_json(r);
  if (r.n == 12) doc["note"] = "S(12,3) = 86526 by recurrence; the value 8526 sometimes quoted is inconsistent with Bell(12) = 4213597";
  const fs::path dir(a.out);
  emit(dir, "census.csv", census_csv(r));
  emit(dir, "census.json", doc.dump(2) + "\n");
  std::cout << census_csv(r);
  std::cout << "minimal zero-error cardinality: " << r.min_zero_error_k << "\n"
            << "unique at minimum: " << (r.unique_at_min ? "true" : "false") << "\n"
            << "basis partition is the unique minimum: " << (r.basis_is_unique_minimum ? "true" : "false") << "\n"
            << "zero-error partitions not refining the basis partition: " << r.n_zero_error_not_refining << "\n";
  if (r.n == 12) std::cout << "note: " << doc["note"].get<std::string>() << "\n";
  return kOk;
}

struct PartArgs {
  InputArgs in;
  TolArgs tol;
  ModelArgs model;
  PartitionArgs part;
  std::string out = "out";
};

int cmd_partition(const PartArgs& a) {
  check_tols(a.tol);
  const auto lc = load(a.in);
  const auto c = validated(lc);
  const auto v = variant_of(a.model);
  const auto bopts = build_of(a.model);
  const auto popts = partition_of(a.part, a.tol);
  const auto full = build_full(c, v, bopts);
  SolveOptions so;
  so.feas_tol = a.tol.feas;
  const auto r = solve(full.lp, so);
  if (!r.optimal()) throw PipelineError("full_solve", to_string(r.status));
  const auto part = partition_horizon(r, full.index, c, popts);
  const auto check = check_chunks(c, v, part.chunks, full.lp, r, full.index, bopts, so, a.tol.exact);
  const auto bases = group_chunks(c, part.chunks, r, full.index, a.tol.q);
  const auto table = summarize_lengths(part.chunks, bases, chunk_costs(full.lp, r, full.index, part.chunks));

  Json config{{"input", input_json(a.in, lc)},
              {"model", model_json(a.model)},
              {"partition", partition_json(a.part)},
              {"tolerances", tol_json(a.tol)}};
  Json doc = envelope("partition", config, lc);
  Json failed = Json::array(), flagged = Json::array();
  for (std::size_t i = 0; i < part.chunks.size(); ++i) {
    const auto& ch = part.chunks[i];
    if (!check.chunks[i].pass)
      failed.push_back({{"chunk_id", i + 1},
                        {"start_hour", ch.start + 1},
                        {"length", ch.length},
                        {"cost_full", check.chunks[i].cost_full},
                        {"cost_alone", check.chunks[i].cost_alone}});
    if (ch.flags) {
      Json f = Json::array();
      if (ch.flags & kBoundaryTruncated) f.push_back("boundary_truncated");
      if (ch.flags & kUndecomposable) f.push_back("undecomposable");
      if (ch.flags & kNoActiveRamp) f.push_back("no_active_ramp");
      flagged.push_back({{"chunk_id", i + 1}, {"start_hour", ch.start + 1}, {"length", ch.length}, {"flags", f}});
    }
  }
  doc["result"] = Json{{"objective", r.objective},
                       {"n_chunks", part.chunks.size()},
                       {"n_bases", bases.size()},
                       {"length_rule_disagreements", part.length_rule_disagreements},
                       {"n_failed_chunks", check.n_failed},
                       {"failed_chunks", failed},
                       {"flagged_chunks", flagged}};
  const fs::path dir(a.out);
  emit(dir, "partition.csv", partition_csv(part.chunks));
  emit(dir, "bases.json", bases_json(bases, part.chunks).dump(2) + "\n");
  emit(dir, "table_vii.csv", table_vii_csv(table));
  emit(dir, "partition.json", doc.dump(2) + "\n");
  std::cout << part.chunks.size() << " chunks, " << bases.size() << " bases, " << check.n_failed
            << " chunk(s) failing the independence check\n";
  return kOk;
}

struct SolveArgs {
  InputArgs in;
  TolArgs tol;
  ModelArgs model;
  std::string out = "out";
};

int cmd_solve(const SolveArgs& a) {
  check_tols(a.tol);
  const auto lc = load(a.in);
  const auto c = validated(lc);
  const auto v = variant_of(a.model);
  const auto full = build_full(c, v, build_of(a.model));
  SolveOptions so;
  so.feas_tol = a.tol.feas;
  const auto r = solve(full.lp, so);
  if (!r.optimal()) throw PipelineError("full_solve", std::string(to_string(r.status)) + " " + r.message);
  const auto kkt = check_kkt(full.lp, r);
  Json config{{"input", input_json(a.in, lc)}, {"model", model_json(a.model)}, {"tolerances", tol_json(a.tol)}};
  Json doc = envelope("solve", config, lc);
  doc["result"] = Json{{"status", to_string(r.status)},
                       {"objective", r.objective},
                       {"n_cols", full.lp.n_cols()},
                       {"n_rows", full.lp.n_rows()},
                       {"iterations", r.iterations},
                       {"n_blocks", r.n_blocks},
                       {"kkt", to_json(kkt)}};
  const fs::path dir(a.out);
  emit(dir, "duals.csv", duals_csv(r, full.index));
  emit(dir, "solve.json", doc.dump(2) + "\n");
  std::cout << "optimal, objective " << format_double(r.objective) << ", KKT " << (kkt.pass ? "pass" : "FAIL") << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Basis-oriented time series aggregation for dispatch LPs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("btsa ") + kToolVersion);

  InputArgs gen_in;
  std::string gen_out = "out";
  auto* gen = app.add_subcommand("gen", "write a synthetic system JSON and series CSVs");
  add_input(gen, gen_in);
  flag_opt(gen, "out", gen_out, "output directory");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "full solve, aggregation and comparison report");
  add_input(run, run_args.in);
  add_tols(run, run_args.tol);
  add_model(run, run_args.model);
  add_partition(run, run_args.part);
  flag_opt(run, "method", run_args.method, "hourly_basis, dual_partition, identity, naive_kmeans_stub");
  flag_opt(run, "signature-mode", run_args.signature_mode, "duals or active_set");
  bool_flag(run, "force", run_args.force, "allow hourly_basis on ramping variants");
  bool_flag(run, "require-exact", run_args.require_exact, "exit 4 when rel_error >= exact-tol");
  flag_opt(run, "kmeans-k", run_args.kmeans_k, "cluster count for naive_kmeans_stub");
  flag_opt(run, "out", run_args.out, "output directory");

  CensusArgs census_args;
  auto* census = app.add_subcommand("census", "zero-error census over all partitions of a short horizon");
  add_input(census, census_args.in);
  flag_opt(census, "tol", census_args.tol, "relative zero-error threshold");
  flag_opt(census, "max-n", census_args.max_n, "largest horizon to enumerate (at most 15)");
  flag_opt(census, "sample-every", census_args.sample_every, "simplex cross-check one partition in this many");
  flag_opt(census, "out", census_args.out, "output directory");

  PartArgs part_args;
  part_args.model.variant = "ed_ramping";
  auto* part = app.add_subcommand("partition", "dual-based partition of a ramping model");
  add_input(part, part_args.in);
  add_tols(part, part_args.tol);
  add_model(part, part_args.model);
  add_partition(part, part_args.part);
  flag_opt(part, "out", part_args.out, "output directory");

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "solve the full model and dump duals per hour");
  add_input(solve_cmd, solve_args.in);
  add_tols(solve_cmd, solve_args.tol);
  add_model(solve_cmd, solve_args.model);
  flag_opt(solve_cmd, "out", solve_args.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return cmd_gen(gen_in, gen_out);
    if (*run) return cmd_run(run_args);
    if (*census) return cmd_census(census_args);
    if (*part) return cmd_partition(part_args);
    if (*solve_cmd) return cmd_solve(solve_args);
  } catch (const ValidationFailure& e) {
    std::cerr << e.what() << "\n";
    return kInvalid;
  } catch (const EnumerationGuard& e) {
    std::cerr << e.what() << "\n";
    return kInvalid;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const PipelineError& e) {
    std::cerr << "solver failure in " << e.what() << "\n";
    return kSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolver;
  }
  return kUsage;
}
