#include "btsa/backend.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

namespace btsa {

namespace {

using nlohmann::json;

json bound_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class BundledBackend final : public SolverBackend {
 public:
  std::string name() const override { return "bundled"; }
  SolveResult solve(const LpProblem& p, const SolveOptions& opts) const override { return btsa::solve(p, opts); }
};

class ExternalBackend final : public SolverBackend {
 public:
  explicit ExternalBackend(std::string command) : command_(std::move(command)) {}
  std::string name() const override { return "external-adapter"; }

  SolveResult solve(const LpProblem& p, const SolveOptions&) const override {
    static std::atomic<int> counter{0};
    const auto dir = std::filesystem::temp_directory_path();
    const std::string stem = "btsa_ext_" + std::to_string(::getpid()) + "_" + std::to_string(counter++);
    const auto in = dir / (stem + ".in.json");
    const auto out = dir / (stem + ".out.json");
    {
      std::ofstream f(in);
      f << lp_to_json(p);
    }
    const std::string cmd = command_ + " < '" + in.string() + "' > '" + out.string() + "'";
    const int rc = std::system(cmd.c_str());
    std::ifstream f(out);
    std::stringstream ss;
    ss << f.rdbuf();
    std::filesystem::remove(in);
    std::filesystem::remove(out);
    if (rc != 0) {
      SolveResult r;
      r.status = SolveStatus::invalid_input;
      r.message = "external solver exited with status " + std::to_string(rc);
      return r;
    }
    return result_from_json(p, ss.str());
  }

 private:
  std::string command_;
};

}  // namespace

std::string lp_to_json(const LpProblem& p) {
  json j;
  j["n_cols"] = p.n_cols();
  json cost = json::array(), lower = json::array(), upper = json::array();
  for (int c = 0; c < p.n_cols(); ++c) {
    cost.push_back(p.cost(c));
    lower.push_back(bound_json(p.lower(c)));
    upper.push_back(bound_json(p.upper(c)));
  }
  j["cost"] = cost;
  j["lower"] = lower;
  j["upper"] = upper;
  json rows = json::array();
  for (int i = 0; i < p.n_rows(); ++i) {
    auto cols = p.row_cols(i);
    auto vals = p.row_vals(i);
    const char* s = p.sense(i) == Sense::le ? "le" : p.sense(i) == Sense::ge ? "ge" : "eq";
    rows.push_back({{"sense", s},
                    {"rhs", p.rhs(i)},
                    {"cols", std::vector<int>(cols.begin(), cols.end())},
                    {"vals", std::vector<double>(vals.begin(), vals.end())}});
  }
  j["rows"] = rows;
  return j.dump();
}

SolveResult result_from_json(const LpProblem& p, const std::string& text) {
  SolveResult r;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    r.status = SolveStatus::invalid_input;
    r.message = std::string("unreadable external result: ") + e.what();
    return r;
  }
  const std::string st = j.value("status", "invalid_input");
  if (st == "optimal")
    r.status = SolveStatus::optimal;
  else if (st == "infeasible")
    r.status = SolveStatus::infeasible;
  else if (st == "unbounded")
    r.status = SolveStatus::unbounded;
  else if (st == "iteration_limit")
    r.status = SolveStatus::iteration_limit;
  else
    r.status = SolveStatus::invalid_input;
  if (!r.optimal()) return r;
  r.objective = j.at("objective").get<double>();
  r.primal = j.at("primal").get<std::vector<double>>();
  r.row_duals = j.at("row_duals").get<std::vector<double>>();
  r.bound_duals = j.at("bound_duals").get<std::vector<double>>();
  // External solvers report no basis; derive a status from bound activity.
  r.col_status.resize(r.primal.size());
  for (int c = 0; c < p.n_cols(); ++c) {
    const double x = r.primal[c];
    if (std::isfinite(p.lower(c)) && std::abs(x - p.lower(c)) <= 1e-9 * (1 + std::abs(x)))
      r.col_status[c] = BasisStatus::at_lower;
    else if (std::isfinite(p.upper(c)) && std::abs(x - p.upper(c)) <= 1e-9 * (1 + std::abs(x)))
      r.col_status[c] = BasisStatus::at_upper;
    else
      r.col_status[c] = BasisStatus::basic;
  }
  r.row_status.assign(static_cast<std::size_t>(p.n_rows()), BasisStatus::basic);
  return r;
}

std::unique_ptr<SolverBackend> solver_backend(const std::string& name) {
  if (name == "bundled") return std::make_unique<BundledBackend>();
  if (name == "external-adapter") {
    const char* cmd = std::getenv("BTSA_EXTERNAL_SOLVER");
    if (cmd == nullptr || *cmd == '\0')
      throw BackendUnavailable("external-adapter is not configured (set BTSA_EXTERNAL_SOLVER)");
    return std::make_unique<ExternalBackend>(cmd);
  }
  throw std::invalid_argument("unknown solver backend '" + name + "'");
}

}  // namespace btsa
