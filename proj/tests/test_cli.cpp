#include <stdexcept>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "btsa/enumerate.hpp"
#include "btsa/io.hpp"
#include "btsa/system.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using btsa::read_file;

namespace {

fs::path scratch_path() { return fs::temp_directory_path() / ("btsa_cli_" + std::to_string(::getpid())); }

// removes the scratch directory at exit
struct ScratchCleanup {
  ~ScratchCleanup() {
    std::error_code ec;
    fs::remove_all(scratch_path(), ec);
  }
} scratch_cleanup;

const fs::path& scratch() {
  static const fs::path dir = [] {
    const auto d = scratch_path();
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + BTSA_CLI + std::string(" ") + args + " > " + (scratch() / "stdout.txt").string() +
                          " 2> " + (scratch() / "stderr.txt").string();
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string out(const std::string& name) { return (scratch() / name).string(); }

nlohmann::json report(const std::string& dir, const std::string& file = "report.json") {
  return nlohmann::json::parse(read_file(fs::path(out(dir)) / file));
}

int lines(const std::string& text) {
  int n = 0;
  for (char ch : text) n += ch == '\n';
  return n;
}

void gen(const std::string& dir, const std::string& profile, int horizon, int seed) {
  REQUIRE(run("gen --profile " + profile + " --horizon " + std::to_string(horizon) + " --seed " +
              std::to_string(seed) + " --out " + out(dir)) == 0);
}

std::string files(const std::string& dir) {
  return "--system " + out(dir) + "/system.json --demand " + out(dir) + "/demand.csv --cf " + out(dir) + "/cf.csv";
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("gen is deterministic and shaped") {
    gen("g7a", "three_bus", 8736, 7);
    gen("g7b", "three_bus", 8736, 7);
    for (const char* f : {"system.json", "demand.csv", "cf.csv"})
      CHECK(read_file(fs::path(out("g7a")) / f) == read_file(fs::path(out("g7b")) / f));
    CHECK(lines(read_file(fs::path(out("g7a")) / "demand.csv")) == 1 + 3 * 8736);
    gen("g3", "single_node", 12, 3);
    CHECK(lines(read_file(fs::path(out("g3")) / "demand.csv")) == 13);
  }

  TEST_CASE("generated ramp-stress files pass the scan") {
    gen("gs", "single_node_rampstress", 2016, 1);
    const auto spec = btsa::parse_system_json(read_file(fs::path(out("gs")) / "system.json"));
    const auto series =
        btsa::parse_series_csv(read_file(fs::path(out("gs")) / "demand.csv"), read_file(fs::path(out("gs")) / "cf.csv"));
    CHECK(btsa::validate_system(spec, series).ok());
    CHECK(btsa::ramp_stress_pairs(spec, series) > 0);
  }

  TEST_CASE("run: network hourly bases are exact and reproducible") {
    gen("n", "three_bus", 24 * 28, 2);
    REQUIRE(run("run --variant ed_network --method hourly_basis " + files("n") + " --out " + out("r1")) == 0);
    REQUIRE(run("run --variant ed_network --method hourly_basis " + files("n") + " --out " + out("r2")) == 0);
    const auto j = report("r1");
    CHECK(j["result"]["rel_error"].get<double>() < 1e-8);
    CHECK(j["tool"] == "btsa");
    CHECK(j["config"]["model"]["variant"] == "ed_network");
    CHECK(j["input_hash"].get<std::string>().size() == 16u);
    for (const char* f : {"report.json", "table_ii.csv", "table_viii.csv", "plot.csv", "clusters.csv", "clusters.json"})
      CHECK(read_file(fs::path(out("r1")) / f) == read_file(fs::path(out("r2")) / f));
    CHECK(lines(read_file(fs::path(out("r1")) / "plot.csv")) == 1 + 24 * 28);
  }

  TEST_CASE("run: forced hourly bases on ramping, and --require-exact") {
    gen("s", "single_node_rampstress", 336, 2);
    CHECK(run("run --variant ed_ramping --method hourly_basis " + files("s") + " --out " + out("f0")) == 2);
    CHECK(run("run --variant ed_ramping --method hourly_basis --force " + files("s") + " --out " + out("f1")) == 0);
    CHECK(report("f1")["result"]["rel_error"].get<double>() > 0.0);
    CHECK(run("run --variant ed_ramping --method hourly_basis --force --require-exact " + files("s") + " --out " +
              out("f2")) == 4);
    CHECK(run("run --variant ed_ramping --method dual_partition --partition-rule ramp_duals --require-exact " +
              files("s") + " --out " + out("f3")) == 0);
    for (const char* f : {"partition.csv", "bases.json", "table_vii.csv"}) CHECK(fs::exists(fs::path(out("f3")) / f));
  }

  TEST_CASE("run: identity is exact") {
    CHECK(run("run --variant ed --method identity --fixture table --out " + out("id")) == 0);
    CHECK(report("id")["result"]["rel_error"].get<double>() == 0.0);
  }

  TEST_CASE("environment overrides flags") {
    CHECK(run("run --fixture table --out " + out("env"), "BTSA_METHOD=identity") == 0);
    CHECK(report("env")["config"]["method"] == "identity");
  }

  TEST_CASE("census output") {
    REQUIRE(run("census --fixture regime --out " + out("c")) == 0);
    const auto csv = read_file(fs::path(out("c")) / "census.csv");
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    CHECK(line == "clusters,possible_clusterings,clusterings_with_no_error");
    int k = 0;
    while (std::getline(is, line)) {
      ++k;
      const auto a = line.find(','), b = line.rfind(',');
      CHECK(std::stoi(line.substr(0, a)) == k);
      CHECK(std::stoull(line.substr(a + 1, b - a - 1)) == btsa::stirling(12, k));
    }
    CHECK(k == 12);
    const auto j = report("c", "census.json");
    CHECK(j["result"]["min_zero_error_k"] == 3);
    CHECK(j["result"]["unique_at_min"] == true);
    CHECK(read_file(out("stdout.txt")).find("86526") != std::string::npos);
    REQUIRE(run("census --fixture regime:WWWWWWWWWWWW --out " + out("ch")) == 0);
    CHECK(report("ch", "census.json")["result"]["min_zero_error_k"] == 1);
  }

  TEST_CASE("exit codes") {
    CHECK(run("") == 1);
    CHECK(run("run --fixture table --variant nonsense --out " + out("x")) == 2);
    CHECK(run("run --fixture table --exact-tol -1 --out " + out("x")) == 2);
    CHECK(run("census --profile single_node --horizon 16 --max-n 16 --out " + out("x")) == 2);
    CHECK(run("run --system /nonexistent/s.json --demand a --cf b --out " + out("x")) == 1);

    // a system that fails validation
    btsa::write_file(out("bad/system.json"),
                     R"({"buses":["B1"],"lines":[],"generators":[{"id":"T1","kind":"thermal","bus":"B1","p_min":0,)"
                     R"("p_max":100,"variable_cost":24,"ramp_up":null,"ramp_down":null}],"nsp_cost":0})");
    btsa::write_file(out("bad/demand.csv"), "hour,bus,demand_mw\n1,B1,50\n");
    btsa::write_file(out("bad/cf.csv"), "hour,unit,cf\n");
    CHECK(run("run " + files("bad") + " --out " + out("x")) == 2);
    CHECK(read_file(out("stderr.txt")).find("nsp_cost") != std::string::npos);

    // valid data, infeasible dispatch: minimum output above demand
    btsa::write_file(out("inf/system.json"),
                     R"({"buses":["B1"],"lines":[],"generators":[{"id":"T1","kind":"thermal","bus":"B1","p_min":80,)"
                     R"("p_max":100,"variable_cost":24,"ramp_up":null,"ramp_down":null}],"nsp_cost":5000})");
    btsa::write_file(out("inf/demand.csv"), "hour,bus,demand_mw\n1,B1,50\n");
    btsa::write_file(out("inf/cf.csv"), "hour,unit,cf\n");
    CHECK(run("solve " + files("inf") + " --out " + out("x")) == 3);
  }

  TEST_CASE("solve and partition dump their outputs") {
    REQUIRE(run("solve --fixture table_ramping --variant ed_ramping --out " + out("sv")) == 0);
    const auto duals = read_file(fs::path(out("sv")) / "duals.csv");
    CHECK(duals.find("4,balance[bus=B1],row_dual,") != std::string::npos);
    REQUIRE(run("partition --fixture table_ramping --out " + out("pt")) == 0);
    CHECK(read_file(fs::path(out("pt")) / "partition.csv") == "chunk_id,start_hour,length\n1,1,1\n2,2,3\n");
  }
}
