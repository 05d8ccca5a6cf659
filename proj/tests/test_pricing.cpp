#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "g2kp/oracle.hpp"
#include "g2kp/pricing.hpp"
#include "test_util.hpp"

using namespace g2kp;

namespace {

Instance single_piece_plate() {
  Instance inst;
  inst.plate_length = inst.plate_width = 10;
  inst.pieces = {Piece{10, 10, 7, 1}};
  return inst;
}

bool same_solution(const Solution& a, const Solution& b) {
  return a.objective == b.objective && a.cut_multiplicity == b.cut_multiplicity &&
         a.sale_multiplicity == b.sale_multiplicity &&
         a.extraction_multiplicity == b.extraction_multiplicity;
}

}  // namespace

TEST_CASE("greedy heuristic on TOY1 places the large piece") {
  Instance toy = test::toy1();
  CutGraph graph = enumerate(toy, RuleSet::Restricted);
  Solution sol = greedy_heuristic(toy, graph);
  CHECK(sol.objective >= 12);
  CHECK(sol.objective == 16);  // piece A wins the profit/area tie by area
  CHECK(verify_solution(sol, graph, toy).ok);
  CHECK(same_solution(sol, greedy_heuristic(toy, graph)));
}

TEST_CASE("greedy heuristic sells a plate-sized piece outright") {
  Instance inst = single_piece_plate();
  CutGraph graph = enumerate(inst, RuleSet::Restricted);
  Solution sol = greedy_heuristic(inst, graph);
  CHECK(sol.objective == 7);
  CHECK(verify_solution(sol, graph, inst).ok);
}

TEST_CASE("greedy heuristic is feasible across random instances and options") {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    Instance inst = generate_random_instance(seed);
    for (bool normalize : {false, true}) {
      CutGraph graph = enumerate(inst, RuleSet::Restricted, EnumOptions{.normalize = normalize});
      Solution sol = greedy_heuristic(inst, graph);
      Verdict verdict = verify_solution(sol, graph, inst);
      CHECK(verdict.ok);
      CHECK(sol.objective > 0);  // something always fits a valid instance
    }
  }
}

TEST_CASE("restricted solve reaches the TOY1 optimum") {
  auto backend = make_external_backend();
  RestrictedResult r =
      solve_restricted(test::toy1(), EnumOptions{.normalize = true}, *backend, BackendConfig{});
  CHECK(r.status == SolveStatus::Optimal);
  CHECK(r.lower_bound == 28);
  CHECK(verify_solution(r.incumbent, *r.graph, test::toy1()).ok);

  RestrictedResult s =
      solve_restricted(single_piece_plate(), EnumOptions{}, *backend, BackendConfig{});
  CHECK(s.lower_bound == 7);
}

TEST_CASE("iterative pricing reproduces the full-model LP value") {
  Instance toy = test::toy1();
  auto backend = make_external_backend();
  CutGraph graph = enumerate(toy, RuleSet::Enhanced, EnumOptions{.normalize = true});
  ModelIR model = build_enhanced_model(graph, toy);

  std::vector<char> empty_seed(model.columns.size(), 0);
  IterativePricingResult ip =
      iterative_pricing(graph, model, 16, *backend, BackendConfig{}, empty_seed);
  REQUIRE(ip.status == SolveStatus::Optimal);

  SolveReport full = backend->solve_lp(model, BackendConfig{});
  REQUIRE(full.status == SolveStatus::Optimal);
  CHECK(ip.upper_bound == doctest::Approx(full.primal).epsilon(1e-7));
  CHECK(ip.upper_bound >= 28.0 - 1e-6);

  // terminal duals: active columns with positive LP value price to ~0,
  // and the explicit duality formulas agree with obj - duals * column
  std::vector<double> rc = reduced_costs(model, ip.row_duals);
  for (std::size_t i = 0; i < model.columns.size(); ++i) {
    auto it = ip.lp_values.find(model.columns[i].name);
    if (it != ip.lp_values.end() && std::abs(it->second) > 1e-9)
      CHECK(std::abs(rc[i]) <= 1e-6);
  }
  auto dual_of = [&](const std::string& row) {
    auto it = ip.row_duals.find(row);
    return it == ip.row_duals.end() ? 0.0 : it->second;
  };
  for (std::size_t i = 0; i < model.columns.size(); ++i) {
    const VarId origin = model.columns[i].origin;
    double expected;
    if (origin.kind == VarId::Kind::Cut) {
      const Cut& cut = graph.cuts[static_cast<std::size_t>(origin.index)];
      auto row_name = [&](int plate) {
        return plate == 0 ? std::string("root") : "plate_" + std::to_string(plate);
      };
      expected = -dual_of(row_name(cut.parent));
      if (cut.first_child != kWasteChild) expected += dual_of(row_name(cut.first_child));
      if (cut.second_child != kWasteChild) expected += dual_of(row_name(cut.second_child));
    } else {
      const Extraction& e = graph.extractions[static_cast<std::size_t>(origin.index)];
      std::string plate_row = e.plate == 0 ? "root" : "plate_" + std::to_string(e.plate);
      expected = static_cast<double>(model.columns[i].objective) - dual_of(plate_row) -
                 dual_of("dem_" + std::to_string(e.piece));
    }
    CHECK(rc[i] == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("a full active set converges in one round") {
  Instance toy = test::toy1();
  auto backend = make_external_backend();
  CutGraph graph = enumerate(toy, RuleSet::Enhanced, EnumOptions{.normalize = true});
  ModelIR model = build_enhanced_model(graph, toy);
  std::vector<char> all(model.columns.size(), 1);
  IterativePricingResult ip =
      iterative_pricing(graph, model, 28, *backend, BackendConfig{}, all);
  CHECK(ip.status == SolveStatus::Optimal);
  CHECK(ip.rounds == 1);
  for (char a : ip.active) CHECK(a == 1);
}

TEST_CASE("an instance with nothing fitting prices to zero") {
  Instance inst;
  inst.plate_length = inst.plate_width = 3;
  inst.pieces = {Piece{5, 5, 9, 1}};
  auto backend = make_external_backend();
  CutGraph graph = enumerate(inst, RuleSet::Enhanced);
  CHECK(graph.plates.size() == 1);
  ModelIR model = build_enhanced_model(graph, inst);
  IterativePricingResult ip = iterative_pricing(graph, model, 0, *backend, BackendConfig{}, {});
  CHECK(ip.status == SolveStatus::Optimal);
  CHECK(ip.upper_bound == doctest::Approx(0.0));
}

TEST_CASE("final pricing contracts") {
  Instance toy = test::toy1();
  auto backend = make_external_backend();
  CutGraph graph = enumerate(toy, RuleSet::Enhanced, EnumOptions{.normalize = true});
  ModelIR model = build_enhanced_model(graph, toy);
  IterativePricingResult ip = iterative_pricing(graph, model, 28, *backend, BackendConfig{}, {});
  REQUIRE(ip.status == SolveStatus::Optimal);

  CHECK_THROWS_AS(final_pricing(model, 100, ip.upper_bound, ip, {}), std::logic_error);

  FinalPricingResult fp = final_pricing(model, 28, ip.upper_bound, ip, {});
  std::vector<double> rc = reduced_costs(model, ip.row_duals);
  for (std::size_t i = 0; i < model.columns.size(); ++i) {
    if (rc[i] >= -1e-9) CHECK(fp.keep[i] == 1);  // rc = 0 is never removed
  }
  // removing the fixed variables keeps the optimum reachable
  CutGraph reduced = purge(graph, fp.removed);
  ModelIR reduced_model = build_enhanced_model(reduced, toy);
  SolveReport solve = backend->solve_milp(reduced_model, BackendConfig{});
  REQUIRE(solve.status == SolveStatus::Optimal);
  CHECK(std::llround(solve.primal) == 28);
}

TEST_CASE("priced pipeline solves TOY1 with either formulation") {
  Instance toy = test::toy1();
  auto backend = make_external_backend();
  for (RuleSet rules : {RuleSet::Enhanced, RuleSet::Faithful}) {
    PricingOptions options;
    options.rules = rules;
    options.enumeration.normalize = true;
    PricingReport report = run_priced_pipeline(toy, options, *backend, BackendConfig{});
    REQUIRE(report.status == SolveStatus::Optimal);
    CHECK(report.objective == 28);
    CHECK(report.lower_bound == 28);
    CHECK(report.upper_bound == doctest::Approx(28.0));
    CHECK(report.verification.ok);
    // sandwich at every recorded phase boundary
    for (const BoundRecord& b : report.bound_trail) {
      CHECK(b.lower <= 28);
      CHECK(b.upper >= 28.0 - 1e-6);
    }
  }
}

TEST_CASE("pipeline early-returns when pricing closes the gap") {
  Instance inst = single_piece_plate();
  auto backend = make_external_backend();
  PricingOptions options;
  PricingReport report = run_priced_pipeline(inst, options, *backend, BackendConfig{});
  REQUIRE(report.status == SolveStatus::Optimal);
  CHECK(report.objective == 7);
  CHECK(report.early_return);
  CHECK(report.timings[Phase::BB] == 0.0);
  CHECK(report.timings[Phase::LP] == 0.0);
}

TEST_CASE("pipeline respects the global time limit") {
  auto backend = make_external_backend();
  PricingOptions options;
  BackendConfig config;
  config.time_limit_seconds = 1e-9;
  PricingReport report = run_priced_pipeline(test::toy1(), options, *backend, config);
  CHECK(report.status == SolveStatus::TimeLimit);
  CHECK(report.lower_bound >= 16);  // the heuristic ran before the deadline hit
}

TEST_CASE("pipeline rejects unusable configurations") {
  auto nodual = make_backend("external:noduals");
  PricingOptions options;
  CHECK_THROWS_AS(run_priced_pipeline(test::toy1(), options, *nodual, BackendConfig{}),
                  std::invalid_argument);
  auto backend = make_external_backend();
  PricingOptions restricted;
  restricted.rules = RuleSet::Restricted;
  CHECK_THROWS_AS(run_priced_pipeline(test::toy1(), restricted, *backend, BackendConfig{}),
                  std::invalid_argument);
}

TEST_CASE("skipping the purge keeps the answer and more variables") {
  Instance inst = generate_random_instance(3);
  auto backend = make_external_backend();
  PricingOptions purged;
  purged.enumeration.normalize = true;
  PricingOptions kept = purged;
  kept.purge_after_fixing = false;
  PricingReport a = run_priced_pipeline(inst, purged, *backend, BackendConfig{});
  PricingReport b = run_priced_pipeline(inst, kept, *backend, BackendConfig{});
  REQUIRE(a.status == SolveStatus::Optimal);
  REQUIRE(b.status == SolveStatus::Optimal);
  CHECK(a.objective == b.objective);
  if (!a.early_return && !b.early_return) {
    CHECK(a.final_variable_count <= b.final_variable_count);
    CHECK(a.final_plate_count <= b.final_plate_count);
  }
}

TEST_CASE("priced answers match the oracle and the plain solve") {
  auto backend = make_external_backend();
  OracleLimits limits;
  limits.max_total_demand = 15;
  for (std::uint64_t seed = 21; seed <= 28; ++seed) {
    Instance inst = generate_random_instance(seed);
    long long oracle = optimal_value_bruteforce(inst, limits).value;

    PricingOptions options;
    options.enumeration.normalize = true;
    PricingReport priced = run_priced_pipeline(inst, options, *backend, BackendConfig{});
    REQUIRE(priced.status == SolveStatus::Optimal);
    CHECK(priced.objective == oracle);
    CHECK(priced.verification.ok);
    for (const BoundRecord& b : priced.bound_trail) {
      CHECK(b.lower <= oracle);
      CHECK(b.upper >= static_cast<double>(oracle) - 1e-6);
    }

    CutGraph graph = enumerate(inst, RuleSet::Enhanced, EnumOptions{.normalize = true});
    ModelIR model = build_enhanced_model(graph, inst);
    SolveReport plain = backend->solve_milp(model, BackendConfig{});
    REQUIRE(plain.status == SolveStatus::Optimal);
    CHECK(priced.objective == std::llround(plain.primal));
  }
}

TEST_CASE("phase CSV layout") {
  PhaseTimings t;
  t[Phase::E] = 0.25;
  CHECK(phase_csv_header() == "instance,phase,seconds");
  std::string rows = phase_csv_rows("toy", t);
  CHECK(rows.find("toy,E,0.25") == 0);
  CHECK(rows.find("toy,BB,0") != std::string::npos);
}
