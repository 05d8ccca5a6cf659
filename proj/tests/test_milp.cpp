#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "g2kp/milp.hpp"
#include "test_util.hpp"

using namespace g2kp;

namespace {

Instance single_piece_plate() {
  Instance inst;
  inst.plate_length = inst.plate_width = 10;
  inst.pieces = {Piece{10, 10, 7, 1}};
  return inst;
}

long long coeff_of(const ModelIR& model, const std::string& row, const std::string& col) {
  int r = model.row_index(row);
  int c = model.column_index(col);
  REQUIRE(r >= 0);
  REQUIRE(c >= 0);
  for (const RowTerm& t : model.rows[static_cast<std::size_t>(r)].terms)
    if (t.column == c) return t.coeff;
  return 0;
}

std::map<std::string, double> toy1_optimal_values(const ModelIR& model, const CutGraph& graph) {
  auto p26 = graph.find_plate(2, 6);
  auto p46 = graph.find_plate(4, 6);
  REQUIRE(p26.has_value());
  REQUIRE(p46.has_value());
  (void)model;
  return {
      {"x_v_2_0", 1.0},
      {"e_0_" + std::to_string(*p46), 1.0},
      {"e_1_" + std::to_string(*p26), 1.0},
  };
}

}  // namespace

TEST_CASE("TOY1 enhanced model structure") {
  CutGraph g = enumerate(test::toy1(), RuleSet::Enhanced, EnumOptions{.normalize = true});
  ModelIR model = build_enhanced_model(g, test::toy1());

  int root = model.row_index("root");
  REQUIRE(root >= 0);
  CHECK(model.rows[static_cast<std::size_t>(root)].rhs == 1);
  CHECK(model.rows[static_cast<std::size_t>(root)].relation == Relation::LessEqual);

  // all columns integer, nonnegative, unbounded above
  for (const Column& col : model.columns) {
    CHECK(col.integer);
    CHECK(col.lower == 0.0);
    CHECK(col.upper == kUnbounded);
  }
  // middle rule: no cut at 4 on the root plate survives enumeration
  CHECK(model.column_index("x_v_4_0") == -1);
  CHECK(model.column_index("x_h_4_0") == -1);

  Solution sol = extract_solution(model, toy1_optimal_values(model, g), g);
  CHECK(sol.objective == 28);
  CHECK(verify_solution(sol, g, test::toy1()).ok);
}

TEST_CASE("a twin-children cut carries coefficient -2") {
  CutGraph g = enumerate(test::toy1(), RuleSet::Enhanced, EnumOptions{.normalize = true});
  ModelIR model = build_enhanced_model(g, test::toy1());
  auto plate26 = g.find_plate(2, 6);
  auto plate46 = g.find_plate(4, 6);
  REQUIRE(plate26.has_value());
  REQUIRE(plate46.has_value());
  // cutting (4,6) at 2 yields two copies of (2,6)
  std::string row = "plate_" + std::to_string(*plate26);
  std::string col = "x_v_2_" + std::to_string(*plate46);
  CHECK(coeff_of(model, row, col) == -2);
}

TEST_CASE("piece-equals-plate model: one extraction, capped by the root row") {
  Instance inst = single_piece_plate();
  CutGraph g = enumerate(inst, RuleSet::Enhanced);
  ModelIR model = build_enhanced_model(g, inst);
  REQUIRE(model.columns.size() == 1);
  CHECK(model.columns[0].name == "e_0_0");
  CHECK(model.columns[0].objective == 7);
  CHECK(coeff_of(model, "root", "e_0_0") == 1);
}

TEST_CASE("faithful model: bounded sales and demand rows") {
  Instance toy = test::toy1();
  CutGraph g = enumerate(toy, RuleSet::Faithful);
  ModelIR model = build_faithful_model(g, toy);
  auto p44 = g.find_plate(4, 4);
  auto p26 = g.find_plate(2, 6);
  REQUIRE(p44.has_value());
  REQUIRE(p26.has_value());
  int y44 = model.column_index("y_" + std::to_string(*p44));
  REQUIRE(y44 >= 0);
  CHECK(model.columns[static_cast<std::size_t>(y44)].objective == 16);
  CHECK(model.columns[static_cast<std::size_t>(y44)].upper == 1.0);
  CHECK(coeff_of(model, "dem_0", "y_" + std::to_string(*p44)) == 1);
  CHECK(coeff_of(model, "dem_1", "y_" + std::to_string(*p26)) == 1);
}

TEST_CASE("formulation/rule-set mismatches are rejected") {
  CutGraph enhanced = enumerate(test::toy1(), RuleSet::Enhanced);
  CutGraph faithful = enumerate(test::toy1(), RuleSet::Faithful);
  CutGraph restricted = enumerate(test::toy1(), RuleSet::Restricted);
  CHECK_THROWS_AS(build_enhanced_model(faithful, test::toy1()), std::invalid_argument);
  CHECK_THROWS_AS(build_faithful_model(enhanced, test::toy1()), std::invalid_argument);
  CHECK_NOTHROW(build_faithful_model(restricted, test::toy1()));

  Instance other = single_piece_plate();
  CHECK_THROWS_AS(build_enhanced_model(enhanced, other), std::invalid_argument);
}

TEST_CASE("column order and bijection with graph variables") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Instance inst = generate_random_instance(seed);
    for (RuleSet rules : {RuleSet::Faithful, RuleSet::Enhanced}) {
      CutGraph g = enumerate(inst, rules, EnumOptions{.normalize = (seed % 2 == 0)});
      ModelIR model = rules == RuleSet::Enhanced ? build_enhanced_model(g, inst)
                                                 : build_faithful_model(g, inst);
      CHECK(model.columns.size() == g.stats().n_variables());
      std::set<std::string> names;
      std::set<std::pair<int, int>> origins;
      for (const Column& col : model.columns) {
        CHECK(names.insert(col.name).second);
        CHECK(origins.insert({static_cast<int>(col.origin.kind), col.origin.index}).second);
      }
      // x block first, ordered by (plate, orientation, position)
      std::size_t i = 0;
      for (; i < model.columns.size() && model.columns[i].origin.kind == VarId::Kind::Cut; ++i) {
        if (i == 0) continue;
        const Cut& prev = g.cuts[static_cast<std::size_t>(model.columns[i - 1].origin.index)];
        const Cut& cur = g.cuts[static_cast<std::size_t>(model.columns[i].origin.index)];
        auto key = [](const Cut& c) {
          return std::make_tuple(c.parent, static_cast<int>(c.orientation), c.position);
        };
        CHECK(key(prev) < key(cur));
      }
      CHECK(i == g.cuts.size());
    }
  }
}

TEST_CASE("enhanced cut variables are a subset of faithful ones") {
  // The enhanced rule set composes the symmetry rule with the middle-cut
  // filter, so per plate (and in total) it can only drop cuts. The full
  // variable-count comparison (cuts plus extractions versus cuts plus
  // sales) is exercised by the acceptance suite; extraction sets can
  // out-number sales on very small plates.
  for (std::uint64_t seed = 1; seed <= 80; ++seed) {
    Instance inst = generate_random_instance(seed);
    for (bool normalize : {false, true}) {
      EnumOptions options;
      options.normalize = normalize;
      CutGraph e = enumerate(inst, RuleSet::Enhanced, options);
      CutGraph f = enumerate(inst, RuleSet::Faithful, options);
      CHECK(e.stats().n_cuts <= f.stats().n_cuts);
      CHECK(e.stats().n_plates <= f.stats().n_plates);
      // every enhanced cut's child pair is produced by some faithful cut
      // on the matching plate (the kept representative may differ)
      using Dims = std::pair<int, int>;
      auto child_dims = [](const CutGraph& g, int id) {
        if (id == kWasteChild) return Dims{-1, -1};
        const Plate& p = g.plates[static_cast<std::size_t>(id)];
        return Dims{p.length, p.width};
      };
      auto unordered = [](Dims a, Dims b) {
        return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
      };
      for (const Cut& c : e.cuts) {
        const Plate& parent = e.plates[static_cast<std::size_t>(c.parent)];
        auto fp = f.find_plate(parent.length, parent.width);
        REQUIRE(fp.has_value());
        auto want = unordered(child_dims(e, c.first_child), child_dims(e, c.second_child));
        bool found = false;
        for (int fc : f.cuts_on[static_cast<std::size_t>(*fp)]) {
          const Cut& cand = f.cuts[static_cast<std::size_t>(fc)];
          auto got = unordered(child_dims(f, cand.first_child), child_dims(f, cand.second_child));
          if (got == want) found = true;
        }
        CHECK(found);
      }
    }
  }
}

TEST_CASE("export is deterministic and uses the documented names") {
  CutGraph g = enumerate(test::toy1(), RuleSet::Enhanced, EnumOptions{.normalize = true});
  ModelIR model = build_enhanced_model(g, test::toy1());
  std::string lp1 = export_model(model, ExportFormat::LpText);
  std::string lp2 = export_model(model, ExportFormat::LpText);
  CHECK(lp1 == lp2);
  CHECK(lp1.find("root:") != std::string::npos);
  CHECK(lp1.find("x_v_2_0") != std::string::npos);
  CHECK(lp1.find("x_v_4_0") == std::string::npos);
  std::string mps1 = export_model(model, ExportFormat::MpsText);
  CHECK(mps1 == export_model(model, ExportFormat::MpsText));
  CHECK(mps1.find("OBJSENSE") != std::string::npos);
}

TEST_CASE("LP text golden file for the one-variable model") {
  Instance inst = single_piece_plate();
  CutGraph g = enumerate(inst, RuleSet::Enhanced);
  ModelIR model = build_enhanced_model(g, inst);
  std::string expected =
      "\\ g2kp\n"
      "Maximize\n"
      " obj: 7 e_0_0\n"
      "Subject To\n"
      " root: 1 e_0_0 <= 1\n"
      " dem_0: 1 e_0_0 <= 1\n"
      "General\n"
      " e_0_0\n"
      "End\n";
  CHECK(export_model(model, ExportFormat::LpText) == expected);
}

TEST_CASE("relaxation drops integrality; restriction keeps names") {
  CutGraph g = enumerate(test::toy1(), RuleSet::Enhanced);
  ModelIR model = build_enhanced_model(g, test::toy1());
  ModelIR lp = relax(model);
  for (const Column& col : lp.columns) CHECK(!col.integer);
  CHECK(export_model(lp, ExportFormat::LpText).find("General") == std::string::npos);

  std::vector<char> first_only(model.columns.size(), 0);
  first_only[0] = 1;
  ModelIR sub = restrict_columns(model, first_only);
  REQUIRE(sub.columns.size() == 1);
  CHECK(sub.columns[0].name == model.columns[0].name);
  CHECK(sub.rows.size() == model.rows.size());
}

TEST_CASE("extract_solution rejects fractional and negative values") {
  CutGraph g = enumerate(test::toy1(), RuleSet::Enhanced, EnumOptions{.normalize = true});
  ModelIR model = build_enhanced_model(g, test::toy1());
  CHECK(extract_solution(model, {}, g).objective == 0);
  CHECK_THROWS_AS(extract_solution(model, {{"x_v_2_0", 0.5}}, g), std::runtime_error);
  CHECK_THROWS_AS(extract_solution(model, {{"x_v_2_0", -1.0}}, g), std::runtime_error);
  CHECK_NOTHROW(extract_solution(model, {{"x_v_2_0", 1.0 + 5e-7}}, g));
}

TEST_CASE("verify_solution flags the first violated row") {
  Instance toy = test::toy1();
  CutGraph g = enumerate(toy, RuleSet::Enhanced, EnumOptions{.normalize = true});
  ModelIR model = build_enhanced_model(g, toy);
  Solution good = extract_solution(model, toy1_optimal_values(model, g), g);
  CHECK(verify_solution(good, g, toy).ok);

  // cutting a plate twice with a single produced copy
  auto p46 = g.find_plate(4, 6);
  auto cut46 = g.find_cut(*p46, Orientation::Vertical, 2);
  REQUIRE(cut46.has_value());
  Solution bad = good;
  bad.cut_multiplicity[*cut46] = 2;
  Verdict v = verify_solution(bad, g, toy);
  CHECK(!v.ok);
  CHECK(v.detail.find("plate_" + std::to_string(*p46)) != std::string::npos);

  // selling beyond the demand with ample availability: root cut plus a
  // twin-children cut make three copies of (2,6)
  auto root_cut = g.find_cut(0, Orientation::Vertical, 2);
  REQUIRE(root_cut.has_value());
  Solution over;
  over.cut_multiplicity[*root_cut] = 1;
  over.cut_multiplicity[*cut46] = 1;
  over.extraction_multiplicity[{1, *g.find_plate(2, 6)}] = 3;
  over.objective = 3 * 12;
  Verdict dv = verify_solution(over, g, toy);
  CHECK(!dv.ok);
  CHECK(dv.detail.find("dem_1") != std::string::npos);
}

TEST_CASE("solution round-trips through column values") {
  CutGraph g = enumerate(test::toy1(), RuleSet::Enhanced, EnumOptions{.normalize = true});
  ModelIR model = build_enhanced_model(g, test::toy1());
  Solution sol = extract_solution(model, toy1_optimal_values(model, g), g);
  auto values = solution_to_values(sol, model, g);
  Solution again = extract_solution(model, values, g);
  CHECK(again.objective == sol.objective);
  CHECK(again.cut_multiplicity == sol.cut_multiplicity);
  CHECK(again.extraction_multiplicity == sol.extraction_multiplicity);
}

TEST_CASE("name-value parsing") {
  auto values = parse_values_text("# solution\nx_v_2_0 1\ne_0_2 2.0\n");
  CHECK(values.at("x_v_2_0") == 1.0);
  CHECK(values.at("e_0_2") == 2.0);
  CHECK_THROWS_AS(parse_values_text("x_v_2_0\n"), std::runtime_error);
}
