#include <stdexcept>
#include <cstdlib>
#include <random>

#include "btsa/backend.hpp"
#include "btsa/fixtures.hpp"
#include "btsa/kkt.hpp"
#include "btsa/lp.hpp"
#include "btsa/psom.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace btsa;

namespace {

// first hour of the four-hour table case, written out by hand
LpProblem first_hour_lp() {
  LpProblem p;
  const int t = p.add_column("p_t", 24.0, 0.0, 1000.0);
  const int w = p.add_column("p_w", 3.0, 0.0, 40.0);
  p.add_row("balance", Sense::eq, 170.2, {{t, 1.0}, {w, 1.0}});
  return p;
}

// random feasible bounded LP: x0 is feasible by construction
LpProblem random_lp(std::mt19937_64& rng, int n, int m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LpProblem p;
  std::vector<double> x0(n);
  for (int j = 0; j < n; ++j) {
    const double lo = u(rng) < 0.5 ? 0.0 : -5.0 * u(rng);
    const double up = u(rng) < 0.2 ? kInf : lo + 1.0 + 9.0 * u(rng);
    x0[j] = std::isfinite(up) ? lo + (up - lo) * u(rng) : lo + 3.0 * u(rng);
    p.add_column("x" + std::to_string(j), 10.0 * u(rng) - 2.0, lo, up);
  }
  for (int i = 0; i < m; ++i) {
    std::vector<std::pair<int, double>> e;
    double act = 0.0;
    for (int j = 0; j < n; ++j)
      if (u(rng) < 0.5) {
        const double a = std::round(20.0 * u(rng) - 10.0);
        if (a == 0.0) continue;
        e.emplace_back(j, a);
        act += a * x0[j];
      }
    if (e.empty()) e.emplace_back(i % n, 1.0), act = x0[i % n];
    const double r = u(rng);
    const Sense s = r < 0.3 ? Sense::eq : r < 0.65 ? Sense::le : Sense::ge;
    const double rhs = s == Sense::eq ? act : s == Sense::le ? act + u(rng) : act - u(rng);
    p.add_row("r" + std::to_string(i), s, rhs, e);
  }
  return p;
}

double dual_objective(const LpProblem& p, const SolveResult& r) {
  double v = 0.0;
  for (int i = 0; i < p.n_rows(); ++i) v += r.row_duals[i] * p.rhs(i);
  for (int j = 0; j < p.n_cols(); ++j) {
    const double z = r.bound_duals[j];
    if (z > 0.0) v += z * p.lower(j);
    if (z < 0.0) v += z * p.upper(j);
  }
  return v;
}

}  // namespace

TEST_SUITE("lp_core") {
  TEST_CASE("single hour dispatch: objective and marginal cost") {
    const auto p = first_hour_lp();
    CHECK(p.check().empty());
    const auto r = solve(p);
    REQUIRE(r.optimal());
    CHECK(r.objective == doctest::Approx(24.0 * 130.2 + 3.0 * 40.0).epsilon(1e-12));
    CHECK(r.objective == doctest::Approx(3244.8));
    CHECK(r.primal[0] == doctest::Approx(130.2));
    CHECK(r.primal[1] == doctest::Approx(40.0));
    CHECK(r.row_duals[0] == doctest::Approx(24.0));
    CHECK(r.bound_duals[1] == doctest::Approx(-21.0));
    CHECK(r.col_status[1] == BasisStatus::at_upper);
    CHECK(check_kkt(p, r).pass);
  }

  TEST_CASE("bound optimum without rows") {
    LpProblem p;
    p.add_column("x", 1.0, 0.0, 5.0);
    const auto r = solve(p);
    REQUIRE(r.optimal());
    CHECK(r.objective == 0.0);
    CHECK(r.primal[0] == 0.0);
    CHECK(check_kkt(p, r).pass);
  }

  TEST_CASE("infeasible, unbounded and malformed problems") {
    LpProblem inf;
    const int x = inf.add_column("x", 1.0, 0.0, 1.0);
    inf.add_row("r", Sense::ge, 2.0, {{x, 1.0}});
    CHECK(solve(inf).status == SolveStatus::infeasible);

    LpProblem unb;
    const int y = unb.add_column("y", -1.0, 0.0, kInf);
    const int z = unb.add_column("z", 0.0, 0.0, kInf);
    unb.add_row("r", Sense::ge, 0.0, {{y, 1.0}, {z, -1.0}});
    CHECK(solve(unb).status == SolveStatus::unbounded);

    LpProblem bad;
    bad.add_column("a", std::nan(""), 0.0, 1.0);
    bad.add_column("a", 1.0, 2.0, 1.0);
    CHECK(bad.check().size() >= 3);
    CHECK(solve(bad).status == SolveStatus::invalid_input);
    CHECK_THROWS_AS(check_kkt(bad, solve(bad)), std::invalid_argument);
  }

  TEST_CASE("strong duality and KKT on random bounded LPs") {
    std::mt19937_64 rng(7);
    int n_optimal = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const auto p = random_lp(rng, 3 + trial % 9, 1 + trial % 7);
      const auto r = solve(p);
      if (r.status == SolveStatus::unbounded) continue;
      REQUIRE_MESSAGE(r.optimal(), "trial ", trial, ": ", to_string(r.status));
      ++n_optimal;
      CHECK(oracle::rel(dual_objective(p, r), r.objective) < 1e-7);
      const auto k = check_kkt(p, r);
      CHECK_MESSAGE(k.pass, "trial ", trial, " residual ", k.max_residual());
    }
    CHECK(n_optimal > 150);
  }

  TEST_CASE("determinism, pricing rules and serial reference") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 40; ++trial) {
      const auto p = random_lp(rng, 8, 5);
      const auto a = solve(p);
      const auto b = solve(p);
      CHECK(a.col_status == b.col_status);
      CHECK(a.row_status == b.row_status);
      CHECK(a.primal == b.primal);
      if (!a.optimal()) continue;
      SolveOptions bland;
      bland.pricing = PricingRule::lowest_index;
      const auto c = solve(p, bland);
      REQUIRE(c.optimal());
      CHECK(oracle::rel(c.objective, a.objective) < 1e-9);
      const auto s = solve_serial(p);
      CHECK(s.primal == a.primal);
      CHECK(s.row_duals == a.row_duals);
    }
  }

  TEST_CASE("row scaling scales the dual inversely and keeps the primal") {
    const auto sc = table_case(true);
    const auto c = validate_or_throw(sc.spec, sc.series);
    auto full = build_full(c, ModelVariant::ed_ramping);
    const auto base = solve(full.lp);
    REQUIRE(base.optimal());
    for (double lambda : {0.5, 3.0, 1000.0}) {
      for (int i = 0; i < full.lp.n_rows(); ++i) {
        if (full.lp.sense(i) != Sense::eq) continue;
        auto p = full.lp;
        p.scale_row(i, lambda);
        const auto r = solve(p);
        REQUIRE(r.optimal());
        CHECK(r.objective == doctest::Approx(base.objective).epsilon(1e-12));
        for (int j = 0; j < p.n_cols(); ++j) CHECK(r.primal[j] == doctest::Approx(base.primal[j]).epsilon(1e-9));
        CHECK(r.row_duals[i] * lambda == doctest::Approx(base.row_duals[i]).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("block decomposition matches the monolithic solve") {
    const auto sc = synth_case(4, 48, SynthProfile::three_bus);
    const auto c = validate_or_throw(sc.spec, sc.series);
    const auto full = build_full(c, ModelVariant::ed_network);
    const auto blocks = find_blocks(full.lp);
    CHECK(blocks.rows.size() == 48u);
    SolveOptions mono;
    mono.decompose = false;
    const auto a = solve(full.lp);
    const auto b = solve(full.lp, mono);
    REQUIRE(a.optimal());
    REQUIRE(b.optimal());
    CHECK(a.n_blocks == 48);
    CHECK(oracle::rel(a.objective, b.objective) < 1e-10);
    CHECK(check_kkt(full.lp, a).pass);
    CHECK(check_kkt(full.lp, b).pass);
  }

  TEST_CASE("KKT rejects an injected dual fault") {
    const auto p = first_hour_lp();
    auto r = solve(p);
    REQUIRE(check_kkt(p, r).pass);
    r.row_duals[0] += 1.0;
    const auto k = check_kkt(p, r);
    CHECK_FALSE(k.pass);
    // stationarity residuals are scaled by 1 + |c_j|
    CHECK(k.dual_residual >= 1.0 / (1.0 + 24.0) - 1e-12);

    auto s = solve(p);
    s.primal[1] = 45.0;
    CHECK_FALSE(check_kkt(p, s).pass);
    auto t = solve(p);
    t.bound_duals[1] = 21.0;
    CHECK_FALSE(check_kkt(p, t).pass);
  }

  TEST_CASE("duplicate constraint: any returned dual split certifies") {
    LpProblem p;
    const int x = p.add_column("x", 2.0, 0.0, 10.0);
    const int y = p.add_column("y", 5.0, 0.0, 10.0);
    p.add_row("a", Sense::ge, 4.0, {{x, 1.0}, {y, 1.0}});
    p.add_row("b", Sense::ge, 4.0, {{x, 1.0}, {y, 1.0}});
    const auto r = solve(p);
    REQUIRE(r.optimal());
    CHECK(r.objective == doctest::Approx(8.0));
    CHECK(r.row_duals[0] + r.row_duals[1] == doctest::Approx(2.0));
    CHECK(check_kkt(p, r).pass);
  }

  TEST_CASE("backends") {
    CHECK(solver_backend("bundled")->name() == "bundled");
    CHECK_THROWS_AS(solver_backend("cplex"), std::invalid_argument);
    const char* ext = std::getenv("BTSA_EXTERNAL_SOLVER");
    if (!ext) {
      CHECK_THROWS_AS(solver_backend("external-adapter"), BackendUnavailable);
      return;
    }
    const auto backend = solver_backend("external-adapter");
    const auto p = first_hour_lp();
    const auto r = backend->solve(p, {});
    REQUIRE(r.optimal());
    CHECK(oracle::rel(r.objective, 3244.8) < 1e-6);
    CHECK(check_kkt(p, r).pass);
  }

  TEST_CASE("external adapter agrees with the bundled solver" * doctest::skip(!std::getenv("BTSA_EXTERNAL_SOLVER"))) {
    const auto backend = solver_backend("external-adapter");
    for (auto [variant, profile] : {std::pair{ModelVariant::ed, "single_node"},
                                   std::pair{ModelVariant::ed_network, "three_bus"},
                                   std::pair{ModelVariant::ed_ramping, "single_node_rampstress"},
                                   std::pair{ModelVariant::ed_network_ramping, "three_bus_rampstress"}}) {
      const auto sc = synth_case(5, 72, profile);
      const auto c = validate_or_throw(sc.spec, sc.series);
      const auto m = build_full(c, variant);
      const auto a = solve(m.lp);
      const auto b = backend->solve(m.lp, {});
      REQUIRE(a.optimal());
      REQUIRE(b.optimal());
      CHECK_MESSAGE(oracle::rel(a.objective, b.objective) < 1e-6, variant_name(variant));
    }
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = random_lp(rng, 6, 4);
      const auto a = solve(p);
      if (!a.optimal()) continue;
      const auto b = backend->solve(p, {});
      REQUIRE(b.optimal());
      CHECK(oracle::rel(a.objective, b.objective) < 1e-6);
    }
  }
}
