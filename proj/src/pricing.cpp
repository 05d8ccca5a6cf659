#include "g2kp/pricing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace g2kp {

const char* phase_tag(Phase phase) {
  switch (phase) {
    case Phase::E: return "E";
    case Phase::H: return "H";
    case Phase::RP: return "RP";
    case Phase::IP: return "IP";
    case Phase::FP: return "FP";
    case Phase::LP: return "LP";
    case Phase::BB: return "BB";
  }
  return "?";
}

double PhaseTimings::total() const {
  double t = 0.0;
  for (double s : seconds) t += s;
  return t;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Deadline {
  Clock::time_point start = Clock::now();
  double limit = 0.0;

  double remaining() const { return limit - seconds_since(start); }
  bool expired() const { return remaining() <= 0.01; }
};

BackendConfig with_remaining(const BackendConfig& config, const Deadline& deadline) {
  BackendConfig c = config;
  c.time_limit_seconds = std::max(0.05, deadline.remaining());
  return c;
}

// ---- greedy shelf heuristic -------------------------------------------

struct Shelf {
  int width = 0;
  int used_length = 0;
  std::vector<int> cells;  // piece indices, placement order
};

std::vector<Shelf> plan_shelves(const Instance& inst) {
  std::vector<int> order(inst.pieces.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Piece& pa = inst.pieces[static_cast<std::size_t>(a)];
    const Piece& pb = inst.pieces[static_cast<std::size_t>(b)];
    long long lhs = pa.profit * pb.area();  // profit/area ratio, cross-multiplied
    long long rhs = pb.profit * pa.area();
    if (lhs != rhs) return lhs > rhs;
    if (pa.area() != pb.area()) return pa.area() > pb.area();
    return a < b;
  });

  std::vector<Shelf> shelves;
  int used_width = 0;
  for (int idx : order) {
    const Piece& p = inst.pieces[static_cast<std::size_t>(idx)];
    for (int copy = 0; copy < p.demand; ++copy) {
      bool placed = false;
      for (Shelf& shelf : shelves) {
        if (p.width <= shelf.width && shelf.used_length + p.length <= inst.plate_length) {
          shelf.cells.push_back(idx);
          shelf.used_length += p.length;
          placed = true;
          break;
        }
      }
      if (!placed && used_width + p.width <= inst.plate_width &&
          p.length <= inst.plate_length) {
        shelves.push_back(Shelf{p.width, p.length, {idx}});
        used_width += p.width;
        placed = true;
      }
      if (!placed) break;  // later copies of the same piece will not fit either
    }
  }
  return shelves;
}

using Dims = std::pair<int, int>;
inline constexpr Dims kWasteDims{-1, -1};

Dims dims_of(const CutGraph& graph, int plate_id) {
  if (plate_id == kWasteChild) return kWasteDims;
  const Plate& p = graph.plates[static_cast<std::size_t>(plate_id)];
  return {p.length, p.width};
}

std::pair<Dims, Dims> unordered_pair(Dims a, Dims b) {
  return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
}

// Cuts are deduplicated by their unordered child pair, so the pair
// identifies the cut on a plate regardless of which representative
// position survived (it may even be the other orientation).
std::optional<int> find_cut_with_children(const CutGraph& graph, int plate, Dims a, Dims b) {
  auto want = unordered_pair(a, b);
  for (int c : graph.cuts_on[static_cast<std::size_t>(plate)]) {
    const Cut& cut = graph.cuts[static_cast<std::size_t>(c)];
    auto got = unordered_pair(dims_of(graph, cut.first_child), dims_of(graph, cut.second_child));
    if (got == want) return c;
  }
  return std::nullopt;
}

// Resolves the cut (plate, o, q) to whatever representative the graph
// kept; returns (cut id, child id hosting the q side).
std::optional<std::pair<int, int>> find_cut_for(const Instance& inst,
                                                const DiscretizationTables& tables,
                                                const CutGraph& graph, int plate, Orientation o,
                                                int q) {
  const Plate& parent = graph.plates[static_cast<std::size_t>(plate)];
  int rl1, rw1, rl2, rw2;
  if (o == Orientation::Vertical) {
    rl1 = q, rw1 = parent.width, rl2 = parent.length - q, rw2 = parent.width;
  } else {
    rl1 = parent.length, rw1 = q, rl2 = parent.length, rw2 = parent.width - q;
  }
  auto first = resolve_child_dims(inst, tables, graph.options.normalize, rl1, rw1);
  if (!first) return std::nullopt;
  auto second = resolve_child_dims(inst, tables, graph.options.normalize, rl2, rw2);
  auto cut_id = find_cut_with_children(graph, plate, *first, second ? *second : kWasteDims);
  if (!cut_id) return std::nullopt;
  const Cut& cut = graph.cuts[static_cast<std::size_t>(*cut_id)];
  if (dims_of(graph, cut.first_child) == *first) return std::make_pair(*cut_id, cut.first_child);
  return std::make_pair(*cut_id, cut.second_child);
}

std::optional<int> find_sale(const CutGraph& graph, int plate, int piece) {
  for (int s : graph.sales_on[static_cast<std::size_t>(plate)])
    if (graph.sales[static_cast<std::size_t>(s)].piece == piece) return s;
  return std::nullopt;
}

struct WalkFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Solution materialize_shelves(const Instance& inst, const CutGraph& graph,
                             const std::vector<Shelf>& shelves) {
  DiscretizationTables tables(inst);
  Solution sol;
  int rest = 0;  // plate currently holding the unused width
  for (std::size_t s = 0; s < shelves.size(); ++s) {
    const Shelf& shelf = shelves[s];
    if (rest == kWasteChild) throw WalkFailure("no plate left for shelf");
    const Plate& cur = graph.plates[static_cast<std::size_t>(rest)];
    int strip;
    if (shelf.width == cur.width) {
      strip = rest;
      rest = kWasteChild;
    } else {
      auto hit = find_cut_for(inst, tables, graph, rest, Orientation::Horizontal, shelf.width);
      if (!hit) throw WalkFailure("missing shelf cut");
      sol.cut_multiplicity[hit->first] += 1;
      const Cut& cut = graph.cuts[static_cast<std::size_t>(hit->first)];
      strip = hit->second;
      rest = cut.first_child == strip ? cut.second_child : cut.first_child;
    }
    for (int piece : shelf.cells) {
      const Piece& p = inst.pieces[static_cast<std::size_t>(piece)];
      if (strip == kWasteChild) throw WalkFailure("strip exhausted");
      const Plate& sp = graph.plates[static_cast<std::size_t>(strip)];
      int cell;
      if (p.length == sp.length) {
        cell = strip;
        strip = kWasteChild;
      } else {
        auto hit = find_cut_for(inst, tables, graph, strip, Orientation::Vertical, p.length);
        if (!hit) throw WalkFailure("missing cell cut");
        sol.cut_multiplicity[hit->first] += 1;
        const Cut& cut = graph.cuts[static_cast<std::size_t>(hit->first)];
        cell = hit->second;
        strip = cut.first_child == cell ? cut.second_child : cut.first_child;
      }
      const Plate& cp = graph.plates[static_cast<std::size_t>(cell)];
      int final_plate = cell;
      if (p.width != cp.width) {
        auto hit = find_cut_for(inst, tables, graph, cell, Orientation::Horizontal, p.width);
        if (!hit) throw WalkFailure("missing trim cut");
        sol.cut_multiplicity[hit->first] += 1;
        final_plate = hit->second;
      }
      auto sale = find_sale(graph, final_plate, piece);
      if (!sale) throw WalkFailure("missing sale");
      sol.sale_multiplicity[{piece, final_plate}] += 1;
      sol.objective += p.profit;
    }
  }
  return sol;
}

}  // namespace

std::optional<Solution> map_solution(const Solution& sol, const CutGraph& from,
                                     const CutGraph& to) {
  std::map<std::pair<int, int>, int> to_plate;
  for (const Plate& p : to.plates) to_plate[{p.length, p.width}] = p.id;
  auto find_to_plate = [&](int length, int width) -> std::optional<int> {
    auto it = to_plate.find({length, width});
    if (it == to_plate.end()) return std::nullopt;
    return it->second;
  };
  Solution out;
  out.objective = sol.objective;
  for (const auto& [cut_id, mult] : sol.cut_multiplicity) {
    const Cut& cut = from.cuts.at(static_cast<std::size_t>(cut_id));
    const Plate& parent = from.plates[static_cast<std::size_t>(cut.parent)];
    auto plate = find_to_plate(parent.length, parent.width);
    if (!plate) return std::nullopt;
    // Both graphs resolve children of equal plates identically, so the
    // recorded child pair identifies the matching cut.
    auto hit = find_cut_with_children(to, *plate, dims_of(from, cut.first_child),
                                      dims_of(from, cut.second_child));
    if (!hit) return std::nullopt;
    out.cut_multiplicity[*hit] += mult;
  }
  auto map_sell = [&](int piece, int plate_id, long long mult) -> bool {
    const Plate& plate = from.plates[static_cast<std::size_t>(plate_id)];
    auto target = find_to_plate(plate.length, plate.width);
    if (!target) return false;
    if (to.rules == RuleSet::Enhanced) {
      for (int e : to.extractions_on[static_cast<std::size_t>(*target)]) {
        if (to.extractions[static_cast<std::size_t>(e)].piece == piece) {
          out.extraction_multiplicity[{piece, *target}] += mult;
          return true;
        }
      }
      return false;
    }
    if (find_sale(to, *target, piece)) {
      out.sale_multiplicity[{piece, *target}] += mult;
      return true;
    }
    return false;
  };
  for (const auto& [key, mult] : sol.sale_multiplicity)
    if (!map_sell(key.first, key.second, mult)) return std::nullopt;
  for (const auto& [key, mult] : sol.extraction_multiplicity)
    if (!map_sell(key.first, key.second, mult)) return std::nullopt;
  return out;
}

namespace {

// Active-set seed: every full-model column whose graph variable also
// exists in the restricted graph (matched by dimensions/position).
std::vector<char> restricted_support(const ModelIR& model, const CutGraph& full,
                                     const CutGraph& restricted) {
  std::map<std::pair<int, int>, int> restricted_plate;
  for (const Plate& p : restricted.plates) restricted_plate[{p.length, p.width}] = p.id;
  auto find_restricted = [&](int length, int width) -> std::optional<int> {
    auto it = restricted_plate.find({length, width});
    if (it == restricted_plate.end()) return std::nullopt;
    return it->second;
  };
  std::vector<char> active(model.columns.size(), 0);
  for (std::size_t i = 0; i < model.columns.size(); ++i) {
    const VarId& origin = model.columns[i].origin;
    if (origin.kind == VarId::Kind::Cut) {
      const Cut& cut = full.cuts[static_cast<std::size_t>(origin.index)];
      const Plate& parent = full.plates[static_cast<std::size_t>(cut.parent)];
      auto plate = find_restricted(parent.length, parent.width);
      if (plate && find_cut_with_children(restricted, *plate, dims_of(full, cut.first_child),
                                          dims_of(full, cut.second_child)))
        active[i] = 1;
    } else {
      int piece, plate_id;
      if (origin.kind == VarId::Kind::Extraction) {
        piece = full.extractions[static_cast<std::size_t>(origin.index)].piece;
        plate_id = full.extractions[static_cast<std::size_t>(origin.index)].plate;
      } else {
        piece = full.sales[static_cast<std::size_t>(origin.index)].piece;
        plate_id = full.sales[static_cast<std::size_t>(origin.index)].plate;
      }
      const Plate& plate = full.plates[static_cast<std::size_t>(plate_id)];
      auto target = find_restricted(plate.length, plate.width);
      if (target && find_sale(restricted, *target, piece)) active[i] = 1;
    }
  }
  return active;
}

std::vector<char> solution_support(const ModelIR& model, const CutGraph& graph,
                                   const Solution& sol) {
  std::vector<char> support(model.columns.size(), 0);
  for (std::size_t i = 0; i < model.columns.size(); ++i) {
    const VarId& origin = model.columns[i].origin;
    if (origin.kind == VarId::Kind::Cut) {
      support[i] = sol.cut_multiplicity.count(origin.index) != 0;
    } else if (origin.kind == VarId::Kind::Extraction) {
      const Extraction& e = graph.extractions[static_cast<std::size_t>(origin.index)];
      support[i] = sol.extraction_multiplicity.count({e.piece, e.plate}) != 0;
    } else {
      const Sale& s = graph.sales[static_cast<std::size_t>(origin.index)];
      support[i] = sol.sale_multiplicity.count({s.piece, s.plate}) != 0;
    }
  }
  return support;
}

long long rounded_objective(double primal) {
  return static_cast<long long>(std::llround(primal));
}

}  // namespace

Solution greedy_heuristic(const Instance& instance, const CutGraph& restricted_graph) {
  if (restricted_graph.rules != RuleSet::Restricted)
    throw std::invalid_argument("greedy_heuristic expects a restricted-rules graph");
  auto shelves = plan_shelves(instance);
  try {
    return materialize_shelves(instance, restricted_graph, shelves);
  } catch (const WalkFailure&) {
    // The empty solution is always feasible; the restricted solve will
    // recover any lost bound quality.
    return Solution{};
  }
}

RestrictedResult solve_restricted(const Instance& instance, const EnumOptions& options,
                                  SolverBackend& backend, const BackendConfig& config) {
  RestrictedResult result;
  result.graph = std::make_shared<CutGraph>(enumerate(instance, RuleSet::Restricted, options));

  auto h_start = Clock::now();
  Solution heuristic = greedy_heuristic(instance, *result.graph);
  result.heuristic_seconds = seconds_since(h_start);

  ModelIR model = build_faithful_model(*result.graph, instance);
  model.warm_start = solution_to_values(heuristic, model, *result.graph);

  auto s_start = Clock::now();
  SolveReport report = backend.solve_milp(model, config);
  result.solve_seconds = seconds_since(s_start);

  result.incumbent = heuristic;
  result.lower_bound = heuristic.objective;
  result.status = report.status;
  if (report.has_primal && !report.values.empty()) {
    try {
      Solution candidate = extract_solution(model, report.values, *result.graph);
      if (candidate.objective > result.lower_bound &&
          verify_solution(candidate, *result.graph, instance).ok) {
        result.incumbent = std::move(candidate);
        result.lower_bound = result.incumbent.objective;
      }
    } catch (const std::exception&) {
      // keep the heuristic incumbent
    }
  } else if (report.has_primal) {
    result.lower_bound = std::max(result.lower_bound, rounded_objective(report.primal));
  }
  return result;
}

std::vector<double> reduced_costs(const ModelIR& model,
                                  const std::map<std::string, double>& row_duals) {
  std::vector<double> rc(model.columns.size(), 0.0);
  for (std::size_t i = 0; i < model.columns.size(); ++i)
    rc[i] = static_cast<double>(model.columns[i].objective);
  for (const Row& row : model.rows) {
    auto it = row_duals.find(row.name);
    if (it == row_duals.end() || it->second == 0.0) continue;
    for (const RowTerm& t : row.terms)
      rc[static_cast<std::size_t>(t.column)] -= it->second * static_cast<double>(t.coeff);
  }
  return rc;
}

IterativePricingResult iterative_pricing(const CutGraph& graph, const ModelIR& model,
                                         long long lower_bound, SolverBackend& backend,
                                         const BackendConfig& config,
                                         const std::vector<char>& initial_active) {
  (void)graph;
  (void)lower_bound;  // the stopping rule is "no positive reduced cost"
  if (!backend.supports_duals())
    throw std::invalid_argument("iterative pricing needs a backend with duals");
  IterativePricingResult result;
  result.active = initial_active;
  result.active.resize(model.columns.size(), 0);

  Deadline deadline{Clock::now(), config.time_limit_seconds};
  while (true) {
    if (deadline.expired()) {
      result.status = SolveStatus::TimeLimit;
      result.message = "time limit during iterative pricing";
      return result;
    }
    ModelIR sub = restrict_columns(model, result.active);
    SolveReport lp = backend.solve_lp(sub, with_remaining(config, deadline));
    ++result.rounds;
    if (lp.status != SolveStatus::Optimal) {
      result.status = lp.status == SolveStatus::TimeLimit ? SolveStatus::TimeLimit
                                                          : SolveStatus::Error;
      result.message = "LP inside pricing: " + std::string(status_name(lp.status)) +
                       (lp.message.empty() ? "" : " (" + lp.message + ")");
      return result;
    }
    std::vector<double> rc = reduced_costs(model, lp.row_duals);
    long long added = 0;
    for (std::size_t i = 0; i < model.columns.size(); ++i) {
      if (!result.active[i] && rc[i] > 1e-9) {
        result.active[i] = 1;
        ++added;
      }
    }
    if (added == 0) {
      result.status = SolveStatus::Optimal;
      result.upper_bound = lp.primal;
      result.row_duals = lp.row_duals;
      result.lp_values = lp.values;
      return result;
    }
  }
}

FinalPricingResult final_pricing(const ModelIR& model, long long lower_bound, double upper_bound,
                                 const IterativePricingResult& pricing,
                                 const std::vector<char>& protect) {
  if (static_cast<double>(lower_bound) > upper_bound + 1e-6)
    throw std::logic_error("final pricing: lower bound exceeds upper bound");
  FinalPricingResult result;
  result.keep.assign(model.columns.size(), 1);
  std::vector<double> rc = reduced_costs(model, pricing.row_duals);
  for (std::size_t i = 0; i < model.columns.size(); ++i) {
    bool zero_in_lp = true;
    if (pricing.active[i]) {
      auto it = pricing.lp_values.find(model.columns[i].name);
      zero_in_lp = it == pricing.lp_values.end() || std::abs(it->second) <= 1e-9;
    }
    if (pricing.active[i] && !zero_in_lp) continue;
    if (i < protect.size() && protect[i]) continue;
    if (rc[i] >= -1e-9) continue;  // the bound is not strict for rc = 0
    if (upper_bound + rc[i] < static_cast<double>(lower_bound) + 1.0 - 1e-6) {
      result.keep[i] = 0;
      result.removed.push_back(model.columns[i].origin);
    }
  }
  return result;
}

PricingReport run_priced_pipeline(const Instance& instance, const PricingOptions& options,
                                  SolverBackend& backend, const BackendConfig& config) {
  if (options.rules == RuleSet::Restricted)
    throw std::invalid_argument("the final model must use faithful or enhanced rules");
  if (!backend.supports_duals())
    throw std::invalid_argument("pricing requires a backend that provides duals");

  PricingReport report;
  Deadline deadline{Clock::now(), config.time_limit_seconds};
  auto snapshot = [&](Phase phase, long long lb, double ub) {
    report.bound_trail.push_back(BoundRecord{phase, lb, ub});
  };
  auto timeout_report = [&](long long lb, double ub, const std::string& where) {
    report.status = SolveStatus::TimeLimit;
    report.lower_bound = lb;
    report.upper_bound = ub;
    report.objective = lb;
    report.message = "time limit during " + where;
    return report;
  };

  // E: enumeration of the full and the restricted graphs.
  auto t0 = Clock::now();
  auto full = std::make_shared<CutGraph>(enumerate(instance, options.rules, options.enumeration));
  auto restricted =
      std::make_shared<CutGraph>(enumerate(instance, RuleSet::Restricted, options.enumeration));
  report.timings[Phase::E] = seconds_since(t0);
  snapshot(Phase::E, 0, std::numeric_limits<double>::infinity());

  // H: greedy heuristic on the restricted graph.
  t0 = Clock::now();
  Solution heuristic = greedy_heuristic(instance, *restricted);
  report.timings[Phase::H] = seconds_since(t0);
  long long lb = heuristic.objective;
  Solution incumbent = heuristic;
  std::shared_ptr<CutGraph> incumbent_graph = restricted;
  snapshot(Phase::H, lb, std::numeric_limits<double>::infinity());
  if (deadline.expired()) return timeout_report(lb, report.upper_bound, "heuristic");

  // RP: restricted model, MIP-started with the heuristic.
  t0 = Clock::now();
  ModelIR rmodel = build_faithful_model(*restricted, instance);
  rmodel.warm_start = solution_to_values(heuristic, rmodel, *restricted);
  SolveReport rp = backend.solve_milp(rmodel, with_remaining(config, deadline));
  report.timings[Phase::RP] = seconds_since(t0);
  if (rp.status == SolveStatus::Error) {
    report.status = SolveStatus::Error;
    report.message = "restricted solve failed: " + rp.message;
    report.lower_bound = lb;
    return report;
  }
  if (rp.has_primal && !rp.values.empty()) {
    try {
      Solution candidate = extract_solution(rmodel, rp.values, *restricted);
      if (candidate.objective > lb && verify_solution(candidate, *restricted, instance).ok) {
        incumbent = std::move(candidate);
        lb = incumbent.objective;
      }
    } catch (const std::exception&) {
    }
  }
  snapshot(Phase::RP, lb, std::numeric_limits<double>::infinity());
  if (deadline.expired() || rp.status == SolveStatus::TimeLimit)
    return timeout_report(lb, report.upper_bound, "restricted solve");

  // IP: iterative pricing over the full model.
  t0 = Clock::now();
  ModelIR fmodel = options.rules == RuleSet::Enhanced ? build_enhanced_model(*full, instance)
                                                      : build_faithful_model(*full, instance);
  std::vector<char> seed = restricted_support(fmodel, *full, *restricted);
  IterativePricingResult ip =
      iterative_pricing(*full, fmodel, lb, backend, with_remaining(config, deadline), seed);
  report.timings[Phase::IP] = seconds_since(t0);
  if (ip.status != SolveStatus::Optimal) {
    report.status = ip.status;
    report.lower_bound = lb;
    report.objective = lb;
    report.message = ip.message;
    return report;
  }
  double ub = ip.upper_bound;
  report.lower_bound = lb;
  report.upper_bound = ub;
  snapshot(Phase::IP, lb, ub);

  // Early return: with integral profits the optimum is at most floor(UB).
  if (static_cast<double>(lb) >= std::floor(ub + 1e-6) - 1e-9) {
    report.status = SolveStatus::Optimal;
    report.upper_bound = static_cast<double>(lb);
    report.objective = lb;
    report.early_return = true;
    report.solution_graph = incumbent_graph;
    report.best_solution = incumbent;
    report.verification = verify_solution(incumbent, *incumbent_graph, instance);
    return report;
  }

  // FP: reduced-cost fixing, protecting the incumbent's mapped support.
  t0 = Clock::now();
  std::vector<char> protect;
  std::optional<Solution> incumbent_on_full = map_solution(incumbent, *incumbent_graph, *full);
  if (incumbent_on_full) protect = solution_support(fmodel, *full, *incumbent_on_full);
  FinalPricingResult fp = final_pricing(fmodel, lb, ub, ip, protect);
  report.timings[Phase::FP] = seconds_since(t0);
  snapshot(Phase::FP, lb, ub);

  ModelIR final_model;
  if (options.purge_after_fixing) {
    report.final_graph = std::make_shared<CutGraph>(purge(*full, fp.removed));
    final_model = options.rules == RuleSet::Enhanced
                      ? build_enhanced_model(*report.final_graph, instance)
                      : build_faithful_model(*report.final_graph, instance);
  } else {
    report.final_graph = full;
    final_model = restrict_columns(fmodel, fp.keep);
  }
  report.final_variable_count = final_model.columns.size();
  report.final_plate_count = report.final_graph->plates.size();

  if (options.warm_start) {
    if (auto mapped = map_solution(incumbent, *incumbent_graph, *report.final_graph)) {
      if (verify_solution(*mapped, *report.final_graph, instance).ok)
        final_model.warm_start = solution_to_values(*mapped, final_model, *report.final_graph);
    }
  }

  if (deadline.expired()) return timeout_report(lb, ub, "final pricing");

  // LP: root relaxation of the final model.
  t0 = Clock::now();
  SolveReport lp = backend.solve_lp(final_model, with_remaining(config, deadline));
  report.timings[Phase::LP] = seconds_since(t0);
  if (lp.status == SolveStatus::Optimal)
    ub = std::min(ub, std::max(static_cast<double>(lb), lp.primal));
  report.upper_bound = ub;
  snapshot(Phase::LP, lb, ub);
  if (deadline.expired()) return timeout_report(lb, ub, "final root relaxation");

  if (static_cast<double>(lb) >= std::floor(ub + 1e-6) - 1e-9) {
    report.status = SolveStatus::Optimal;
    report.upper_bound = static_cast<double>(lb);
    report.objective = lb;
    report.solution_graph = incumbent_graph;
    report.best_solution = incumbent;
    report.verification = verify_solution(incumbent, *incumbent_graph, instance);
    return report;
  }

  // BB: the final integer solve.
  t0 = Clock::now();
  SolveReport bb = backend.solve_milp(final_model, with_remaining(config, deadline));
  report.timings[Phase::BB] = seconds_since(t0);
  if (bb.status == SolveStatus::Error || bb.status == SolveStatus::Infeasible) {
    // The zero solution is always feasible, so infeasible means backend
    // trouble rather than a model property.
    report.status = SolveStatus::Error;
    report.lower_bound = lb;
    report.objective = lb;
    report.message = "final solve: " + std::string(status_name(bb.status)) +
                     (bb.message.empty() ? "" : " (" + bb.message + ")");
    return report;
  }
  if (bb.has_primal && !bb.values.empty()) {
    try {
      Solution candidate = extract_solution(final_model, bb.values, *report.final_graph);
      if (candidate.objective >= lb &&
          verify_solution(candidate, *report.final_graph, instance).ok) {
        incumbent = std::move(candidate);
        incumbent_graph = report.final_graph;
        lb = std::max(lb, incumbent.objective);
      }
    } catch (const std::exception&) {
    }
  } else if (bb.has_primal) {
    lb = std::max(lb, rounded_objective(bb.primal));
  }
  if (bb.status == SolveStatus::Optimal) {
    // The optimum over the full graph is max(reduced optimum, LB).
    long long reduced_opt = rounded_objective(bb.primal);
    long long optimum = std::max(lb, reduced_opt);
    report.status = SolveStatus::Optimal;
    report.lower_bound = optimum;
    report.upper_bound = static_cast<double>(optimum);
    report.objective = optimum;
  } else {
    report.status = SolveStatus::TimeLimit;
    report.lower_bound = lb;
    report.upper_bound = std::min(ub, std::max(static_cast<double>(lb), bb.dual_bound));
    report.objective = lb;
  }
  snapshot(Phase::BB, report.lower_bound, report.upper_bound);
  report.solution_graph = incumbent_graph;
  report.best_solution = incumbent;
  report.verification = verify_solution(incumbent, *incumbent_graph, instance);
  return report;
}

std::string phase_csv_header() { return "instance,phase,seconds"; }

std::string phase_csv_rows(const std::string& instance_name, const PhaseTimings& timings) {
  std::ostringstream out;
  for (int p = 0; p < kPhaseCount; ++p) {
    out << instance_name << ',' << phase_tag(static_cast<Phase>(p)) << ','
        << timings.seconds[p] << '\n';
  }
  return out.str();
}

}  // namespace g2kp
