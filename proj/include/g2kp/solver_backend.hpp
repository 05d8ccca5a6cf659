#ifndef G2KP_SOLVER_BACKEND_HPP
#define G2KP_SOLVER_BACKEND_HPP

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "g2kp/milp.hpp"

namespace g2kp {

enum class SolveStatus { Optimal, Feasible, Infeasible, TimeLimit, Error };
const char* status_name(SolveStatus status);

struct SolveReport {
  SolveStatus status = SolveStatus::Error;
  bool has_primal = false;
  double primal = 0.0;      // best feasible objective, maximization sense
  double dual_bound = 0.0;  // proven bound (infinity when none)
  std::map<std::string, double> values;         // column name -> value
  std::map<std::string, double> row_duals;      // LP solves only
  std::map<std::string, double> reduced_costs;  // LP solves only
  double wall_seconds = 0.0;
  std::string message;
};

enum class LpAlgorithm { Automatic, DualSimplex, Barrier };
const char* lp_algorithm_tag(LpAlgorithm a);  // "auto" / "dual-simplex" / "barrier"

struct BackendConfig {
  double time_limit_seconds = 10800.0;
  int threads = 1;
  LpAlgorithm lp_algorithm = LpAlgorithm::Automatic;
  int seed = 1;
};

class SolverBackend {
 public:
  virtual ~SolverBackend() = default;

  /// Continuous relaxation; populates duals and reduced costs.
  virtual SolveReport solve_lp(const ModelIR& model, const BackendConfig& config) = 0;

  /// Integer solve; honors the model's warm start where the underlying
  /// solver supports it, and never reports a primal below the value of a
  /// feasible warm start.
  virtual SolveReport solve_milp(const ModelIR& model, const BackendConfig& config) = 0;

  virtual bool supports_duals() const = 0;
};

/// Reference adapter: export the model to a file, run an external solver
/// command, parse its solution file.
///
/// The command template understands the placeholders {model}, {solution},
/// {timelimit}, {threads}, {seed}, {lphint} and {warmstart}. When the
/// template is empty the bundled driver script is used; in that case a
/// single driver process is kept alive between solves (persistent mode)
/// unless disabled.
///
/// Environment overrides:
///   G2KP_SOLVER_CMD     full command template (switches to one process
///                       per solve)
///   G2KP_SOLVER_DRIVER  path of the bundled driver script
struct ExternalBackendOptions {
  std::string command_template;  // empty = bundled driver
  bool persistent = true;
  bool provides_duals = true;
  std::string work_dir;  // empty = fresh temporary directory
  ExportFormat format = ExportFormat::LpText;
};

std::unique_ptr<SolverBackend> make_external_backend(ExternalBackendOptions options = {});

/// Registry slot for in-process adapters (linked solver libraries).
/// `make_backend` recognizes "external" plus any registered scheme;
/// "external:noduals" yields an adapter that refuses dual queries, and
/// "external:cmd=<template>" forces a command template.
using BackendFactory = std::function<std::unique_ptr<SolverBackend>(const std::string& spec)>;
void register_backend_factory(const std::string& scheme, BackendFactory factory);
std::unique_ptr<SolverBackend> make_backend(const std::string& spec = "external");

/// Resolved path of the bundled driver script.
std::string default_driver_path();

/// Evaluates a column-value map against the model: all bounds, all rows,
/// integrality. Returns the objective through `objective` when feasible.
bool values_feasible(const ModelIR& model, const std::map<std::string, double>& values,
                     double tolerance, double* objective, std::string* why = nullptr);

}  // namespace g2kp

#endif  // G2KP_SOLVER_BACKEND_HPP
