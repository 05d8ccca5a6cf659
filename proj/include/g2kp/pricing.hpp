#ifndef G2KP_PRICING_HPP
#define G2KP_PRICING_HPP

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "g2kp/milp.hpp"
#include "g2kp/solver_backend.hpp"

namespace g2kp {

// Pipeline phases, in execution order.
enum class Phase { E = 0, H, RP, IP, FP, LP, BB };
inline constexpr int kPhaseCount = 7;
const char* phase_tag(Phase phase);  // "E", "H", ...

struct PhaseTimings {
  double seconds[kPhaseCount] = {};
  double& operator[](Phase p) { return seconds[static_cast<int>(p)]; }
  double operator[](Phase p) const { return seconds[static_cast<int>(p)]; }
  double total() const;
};

/// Lower/upper bound snapshot taken at the end of a phase.
struct BoundRecord {
  Phase phase = Phase::E;
  long long lower = 0;
  double upper = std::numeric_limits<double>::infinity();
};

struct PricingOptions {
  RuleSet rules = RuleSet::Enhanced;  // final-model formulation
  EnumOptions enumeration;
  bool warm_start = true;
  bool purge_after_fixing = true;
};

struct PricingReport {
  SolveStatus status = SolveStatus::Error;
  long long lower_bound = 0;
  double upper_bound = std::numeric_limits<double>::infinity();
  long long objective = 0;    // value of the best solution in hand
  bool early_return = false;  // optimum proven before the final model
  PhaseTimings timings;
  std::vector<BoundRecord> bound_trail;

  // Graph the final model was built on (purged when enabled); the full
  // graph on early return. `best_solution` is expressed against
  // `solution_graph`.
  std::shared_ptr<CutGraph> final_graph;
  std::shared_ptr<CutGraph> solution_graph;
  Solution best_solution;
  Verdict verification;
  std::size_t final_variable_count = 0;
  std::size_t final_plate_count = 0;
  std::string message;
};

/// Deterministic shelf-building greedy: piece types by profit/area
/// descending (ties: larger area, then lower index), first-fit into
/// guillotine-consistent shelves. The result is expressed against the
/// given restricted graph and always verifies.
Solution greedy_heuristic(const Instance& instance, const CutGraph& restricted_graph);

/// Re-expresses a solution against another graph of the same instance
/// (e.g. restricted -> enhanced for warm starts). Cuts are matched by
/// parent dimensions and child pair, sales by piece and plate
/// dimensions; nullopt when any variable has no counterpart.
std::optional<Solution> map_solution(const Solution& solution, const CutGraph& from,
                                     const CutGraph& to);

struct RestrictedResult {
  SolveStatus status = SolveStatus::Error;
  Solution incumbent;  // against `graph`
  long long lower_bound = 0;
  std::shared_ptr<CutGraph> graph;
  double heuristic_seconds = 0.0;
  double solve_seconds = 0.0;
};

/// Restricted-rules enumeration + faithful model, MIP-started with the
/// greedy heuristic. The incumbent value is the pipeline lower bound.
RestrictedResult solve_restricted(const Instance& instance, const EnumOptions& options,
                                  SolverBackend& backend, const BackendConfig& config);

struct IterativePricingResult {
  SolveStatus status = SolveStatus::Error;
  double upper_bound = std::numeric_limits<double>::infinity();
  std::map<std::string, double> row_duals;   // terminal LP duals
  std::map<std::string, double> lp_values;   // terminal LP column values
  std::vector<char> active;                  // per full-model column
  int rounds = 0;
  std::string message;
};

/// Repeatedly solves the LP over the active column set and activates
/// every inactive variable with reduced cost > 1e-9, until none remains.
/// The final LP value is then a valid upper bound for the full model.
IterativePricingResult iterative_pricing(const CutGraph& graph, const ModelIR& model,
                                         long long lower_bound, SolverBackend& backend,
                                         const BackendConfig& config,
                                         const std::vector<char>& initial_active);

struct FinalPricingResult {
  std::vector<VarId> removed;
  std::vector<char> keep;  // per full-model column
};

/// Reduced-cost fixing: drops variables that were never activated or sat
/// at zero in the terminal LP and whose bound UB + rc < LB + 1 proves
/// they cannot appear in a solution strictly better than the incumbent.
/// Variables with rc >= 0 and protected (incumbent-support) variables are
/// never dropped. Throws std::logic_error when lower_bound > upper_bound.
FinalPricingResult final_pricing(const ModelIR& model, long long lower_bound,
                                 double upper_bound, const IterativePricingResult& pricing,
                                 const std::vector<char>& protect);

/// Reduced costs of every column under the given row duals
/// (obj - duals * column).
std::vector<double> reduced_costs(const ModelIR& model,
                                  const std::map<std::string, double>& row_duals);

/// Full pipeline: enumeration, heuristic, restricted solve, iterative
/// pricing, final pricing, purge, final LP + branch-and-bound, under one
/// global time limit. Early-returns as optimal when the bounds meet.
PricingReport run_priced_pipeline(const Instance& instance, const PricingOptions& options,
                                  SolverBackend& backend, const BackendConfig& config);

std::string phase_csv_header();
std::string phase_csv_rows(const std::string& instance_name, const PhaseTimings& timings);

}  // namespace g2kp

#endif  // G2KP_PRICING_HPP
