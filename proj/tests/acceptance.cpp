// Acceptance suite: runs every gate criterion end to end and prints one
// pass/fail line per criterion. Returns the number of failed criteria.
//
// Optional datasets are picked up from the environment:
//   G2KP_FUR59_DIR     directory with the 59-instance literature set
//                      (canonical format) for the variable/plate ratios
//   G2KP_P2_INSTANCE   path of instance P2_200_100_25_1 for the
//                      long-running spot check (hours)

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "g2kp/oracle.hpp"
#include "g2kp/pricing.hpp"
#include "test_util.hpp"

using namespace g2kp;
namespace fs = std::filesystem;

namespace {

constexpr int kInstances = 300;

struct Criterion {
  bool pass = true;
  bool skipped = false;
  int violations = 0;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;  // keep the first violation
    pass = false;
    ++violations;
  }
};

struct PerInstance {
  Instance instance;
  long long oracle = 0;
  GraphStats stats_fa, stats_fb, stats_ec, stats_ed;
};

long long milp_optimum(SolverBackend& backend, const CutGraph& graph, const Instance& inst,
                       bool enhanced) {
  ModelIR model = enhanced ? build_enhanced_model(graph, inst) : build_faithful_model(graph, inst);
  SolveReport report = backend.solve_milp(model, BackendConfig{});
  if (report.status != SolveStatus::Optimal)
    throw std::runtime_error("backend did not prove optimality: " +
                             std::string(status_name(report.status)) + " " + report.message);
  // every optimal solution must replay cleanly through the flow check
  Solution solution = extract_solution(model, report.values, graph);
  Verdict verdict = verify_solution(solution, graph, inst);
  if (!verdict.ok) throw std::runtime_error("solution failed verification: " + verdict.detail);
  if (solution.objective != std::llround(report.primal))
    throw std::runtime_error("recomputed objective differs from the solver's");
  return solution.objective;
}

bool graphs_equal(const CutGraph& a, const CutGraph& b) {
  return a.plates == b.plates && a.cuts == b.cuts && a.extractions == b.extractions &&
         a.sales == b.sales;
}

std::string seed_tag(std::uint64_t seed) { return "seed " + std::to_string(seed); }

}  // namespace

int main() {
  auto started = std::chrono::steady_clock::now();
  auto backend = make_external_backend();

  Criterion c1, c2, c3, c4, c5, c6, c7, c8;
  OracleLimits limits;
  limits.max_total_demand = 15;  // n <= 5 pieces with demand <= 3

  // Criteria 1, 2, 4, 5 share one pass over the seeded instances:
  // L,W in [5,16], n in [2,5], u in [1,3] (the generator defaults).
  for (std::uint64_t seed = 1; seed <= kInstances; ++seed) {
    Instance inst = generate_random_instance(seed);
    long long oracle = optimal_value_bruteforce(inst, limits).value;

    EnumOptions plain, norm;
    norm.normalize = true;
    CutGraph fa = enumerate(inst, RuleSet::Faithful, plain);
    CutGraph fb = enumerate(inst, RuleSet::Faithful, norm);
    CutGraph ec = enumerate(inst, RuleSet::Enhanced, plain);
    CutGraph ed = enumerate(inst, RuleSet::Enhanced, norm);

    try {
      long long va = milp_optimum(*backend, fa, inst, false);
      long long vb = milp_optimum(*backend, fb, inst, false);
      long long vc = milp_optimum(*backend, ec, inst, true);
      long long vd = milp_optimum(*backend, ed, inst, true);
      if (va != oracle) c1.fail(seed_tag(seed) + ": faithful " + std::to_string(va) +
                                " != oracle " + std::to_string(oracle));
      if (vb != oracle) c1.fail(seed_tag(seed) + ": faithful+normalize " + std::to_string(vb) +
                                " != oracle " + std::to_string(oracle));
      if (vc != oracle) c1.fail(seed_tag(seed) + ": enhanced " + std::to_string(vc) +
                                " != oracle " + std::to_string(oracle));
      if (vd != oracle) c1.fail(seed_tag(seed) + ": enhanced+normalize " + std::to_string(vd) +
                                " != oracle " + std::to_string(oracle));

      PricingOptions priced;
      priced.rules = RuleSet::Enhanced;
      priced.enumeration.normalize = true;
      priced.warm_start = true;
      PricingReport pp = run_priced_pipeline(inst, priced, *backend, BackendConfig{});
      if (pp.status != SolveStatus::Optimal) {
        c1.fail(seed_tag(seed) + ": pricing status " + status_name(pp.status));
      } else {
        if (pp.objective != oracle)
          c1.fail(seed_tag(seed) + ": enhanced+pricing " + std::to_string(pp.objective) +
                  " != oracle " + std::to_string(oracle));
        if (!pp.verification.ok)
          c1.fail(seed_tag(seed) + ": priced solution failed verification: " +
                  pp.verification.detail);
        // criterion 5: sandwich at every phase boundary, priced == plain
        for (const BoundRecord& b : pp.bound_trail) {
          if (b.lower > oracle)
            c5.fail(seed_tag(seed) + ": LB " + std::to_string(b.lower) + " above oracle in " +
                    phase_tag(b.phase));
          if (b.upper < static_cast<double>(oracle) - 1e-6)
            c5.fail(seed_tag(seed) + ": UB below oracle in " + std::string(phase_tag(b.phase)));
        }
        if (pp.objective != vd)
          c5.fail(seed_tag(seed) + ": priced answer differs from the non-priced optimum");
        // criterion 4 on the graph the final model was built on
        if (pp.final_graph) {
          CutGraph again = purge(*pp.final_graph);
          if (!graphs_equal(again, *pp.final_graph))
            c4.fail(seed_tag(seed) + ": purge is not a fixpoint after pricing");
        }
      }
    } catch (const std::exception& ex) {
      c1.fail(seed_tag(seed) + ": " + ex.what());
    }

    // criterion 2: size dominance, matching option pairs
    if (ec.stats().n_variables() > fa.stats().n_variables())
      c2.fail(seed_tag(seed) + ": enhanced " + std::to_string(ec.stats().n_variables()) +
              " vars > faithful " + std::to_string(fa.stats().n_variables()));
    if (ed.stats().n_variables() > fb.stats().n_variables())
      c2.fail(seed_tag(seed) + ": enhanced+normalize " +
              std::to_string(ed.stats().n_variables()) + " vars > faithful+normalize " +
              std::to_string(fb.stats().n_variables()));
    if (fb.stats().n_plates > fa.stats().n_plates)
      c2.fail(seed_tag(seed) + ": normalization grew the faithful plate pool");
    if (ed.stats().n_plates > ec.stats().n_plates)
      c2.fail(seed_tag(seed) + ": normalization grew the enhanced plate pool");

    // criterion 4: purge of a fresh graph is the identity and idempotent,
    // i.e. every enumerated plate is reachable from plate 0
    for (const CutGraph* g : {&fa, &fb, &ec, &ed}) {
      CutGraph purged = purge(*g);
      if (!graphs_equal(purged, *g)) {
        c4.fail(seed_tag(seed) + ": purge dropped structure from a fresh graph");
        break;
      }
      if (!graphs_equal(purge(purged), purged)) {
        c4.fail(seed_tag(seed) + ": purge is not idempotent");
        break;
      }
    }

    if (seed % 50 == 0)
      std::cerr << "  [acceptance] " << seed << "/" << kInstances << " instances\n";
  }

  // Criterion 3: literature-set ratios, dataset-contingent.
  const char* fur59 = std::getenv("G2KP_FUR59_DIR");
  std::string fur59_dir = fur59 ? fur59 : "data/fur59";
  if (!fs::is_directory(fur59_dir)) {
    c3.skipped = true;
    c3.detail = "dataset not present (" + fur59_dir + "); criteria 1-2 stand in";
  } else {
    long long vars_enh = 0, vars_fai = 0, plates_enh = 0, plates_fai = 0;
    int files = 0;
    for (const auto& entry : fs::directory_iterator(fur59_dir)) {
      if (!entry.is_regular_file()) continue;
      ++files;
      Instance inst = load_instance_file(entry.path().string());
      EnumOptions enh_opts;
      enh_opts.normalize = true;
      enh_opts.cut_position = true;
      CutGraph enh = enumerate(inst, RuleSet::Enhanced, enh_opts);
      EnumOptions fai_opts;
      fai_opts.cut_position = true;
      fai_opts.redundant_cut = true;
      CutGraph fai = enumerate(inst, RuleSet::Faithful, fai_opts);
      vars_enh += static_cast<long long>(enh.stats().n_variables());
      plates_enh += static_cast<long long>(enh.stats().n_plates);
      vars_fai += static_cast<long long>(fai.stats().n_variables());
      plates_fai += static_cast<long long>(fai.stats().n_plates);
    }
    double var_ratio = 100.0 * static_cast<double>(vars_enh) / static_cast<double>(vars_fai);
    double plate_ratio =
        100.0 * static_cast<double>(plates_enh) / static_cast<double>(plates_fai);
    std::ostringstream ss;
    ss << files << " instances, var ratio " << var_ratio << "% (target 3.07 +- 1.5), plate ratio "
       << plate_ratio << "% (target 8.35 +- 1.5)";
    c3.detail = ss.str();
    if (std::abs(var_ratio - 3.07) > 1.5 || std::abs(plate_ratio - 8.35) > 1.5) c3.pass = false;
  }

  // Criterion 6: discretization against exhaustive enumeration, plus the
  // worked length-21 example.
  {
    std::mt19937_64 rng(99);
    for (int round = 0; round < 1000 && c6.pass; ++round) {
      int limit = 2 + static_cast<int>(rng() % 59);
      int n = 1 + static_cast<int>(rng() % 5);
      std::vector<std::pair<int, int>> items;
      Instance inst;
      inst.plate_length = 64;
      inst.plate_width = 8;
      int total = 0;
      for (int i = 0; i < n && total < 12; ++i) {
        int size = 1 + static_cast<int>(rng() % 30);
        int demand = std::min(1 + static_cast<int>(rng() % 3), 12 - total);
        total += demand;
        items.push_back({size, demand});
        inst.pieces.push_back(Piece{size, 1, 1, demand});
      }
      NormalPositions np = normal_positions(inst, Orientation::Vertical, 8, limit);
      auto brute = test::brute_force_sums(items, limit);
      if (np.positions != std::vector<int>(brute.begin(), brute.end()))
        c6.fail("round " + std::to_string(round) + ": positions differ from enumeration");
    }
    Instance worked;
    worked.plate_length = 21;
    worked.plate_width = 1;
    worked.pieces = {Piece{5, 1, 1, 2}, Piece{7, 1, 1, 3}};
    CutGraph g = enumerate(worked, RuleSet::Faithful, EnumOptions{.normalize = true});
    auto cut = g.find_cut(0, Orientation::Vertical, 12);
    if (!cut) {
      c6.fail("worked example: no cut at 12 on the length-21 plate");
    } else {
      const Cut& c = g.cuts[static_cast<std::size_t>(*cut)];
      int second_len =
          c.second_child == kWasteChild ? -1 : g.plates[(std::size_t)c.second_child].length;
      if (second_len != 7)
        c6.fail("worked example: second child of the cut at 12 has length " +
                std::to_string(second_len) + ", expected 7 (raw 9 normalized)");
    }
  }

  // Criterion 7: determinism of enumerate + build + export.
  for (std::uint64_t seed = 1; seed <= 10 && c7.pass; ++seed) {
    Instance inst = generate_random_instance(seed);
    for (bool enhanced : {false, true}) {
      auto once = [&] {
        CutGraph g = enumerate(inst, enhanced ? RuleSet::Enhanced : RuleSet::Faithful,
                               EnumOptions{.normalize = true});
        ModelIR m = enhanced ? build_enhanced_model(g, inst) : build_faithful_model(g, inst);
        return export_model(m, ExportFormat::LpText);
      };
      if (once() != once()) c7.fail(seed_tag(seed) + ": LP exports differ between runs");
    }
  }

  // Criterion 8: long-running spot check, dataset-contingent.
  const char* p2 = std::getenv("G2KP_P2_INSTANCE");
  if (!p2 || !fs::is_regular_file(p2)) {
    c8.skipped = true;
    c8.detail = "instance P2_200_100_25_1 not present (set G2KP_P2_INSTANCE)";
  } else {
    Instance inst = load_instance_file(p2);
    PricingOptions options;
    options.enumeration.normalize = true;
    options.enumeration.cut_position = true;
    PricingReport report = run_priced_pipeline(inst, options, *backend, BackendConfig{});
    if (report.status != SolveStatus::Optimal || report.objective != 21494) {
      c8.pass = false;
      c8.detail = "status " + std::string(status_name(report.status)) + ", objective " +
                  std::to_string(report.objective) + " (expected 21494)";
    }
  }

  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  auto print = [](int index, const char* name, const Criterion& c) {
    std::cout << "criterion " << index << " (" << name << "): "
              << (c.skipped ? "SKIPPED" : c.pass ? "PASS" : "FAIL");
    if (!c.pass && c.violations > 1)
      std::cout << " - " << c.violations << " violations, first: " << c.detail;
    else if (!c.detail.empty())
      std::cout << " - " << c.detail;
    std::cout << '\n';
    return c.skipped || c.pass ? 0 : 1;
  };
  int failures = 0;
  failures += print(1, "oracle equivalence, 300 instances x 5 variants", c1);
  failures += print(2, "size dominance", c2);
  failures += print(3, "literature-set variable/plate ratios", c3);
  failures += print(4, "purge invariance", c4);
  failures += print(5, "pricing sandwich", c5);
  failures += print(6, "discretization oracle", c6);
  failures += print(7, "deterministic exports", c7);
  failures += print(8, "long-running spot check", c8);
  std::cout << "acceptance suite finished in " << elapsed << "s\n";
  return failures;
}
