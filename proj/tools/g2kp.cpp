// Command-line front end: solve single instances, benchmark instance
// directories across configuration variants, dump enumeration statistics,
// generate random instances, and verify solution files.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "g2kp/oracle.hpp"
#include "g2kp/pricing.hpp"

namespace fs = std::filesystem;
using namespace g2kp;

namespace {

int exit_code_for(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return 0;
    case SolveStatus::Feasible: return 2;
    case SolveStatus::TimeLimit: return 2;
    case SolveStatus::Infeasible: return 3;
    case SolveStatus::Error: return 4;
  }
  return 4;
}

struct RunConfig {
  bool enhanced = true;
  bool normalize = false;
  bool cut_position = false;
  bool redundant_cut = false;
  bool warm = false;
  bool pricing = false;
  bool purge = true;

  RuleSet rules() const { return enhanced ? RuleSet::Enhanced : RuleSet::Faithful; }
  EnumOptions enum_options() const {
    return EnumOptions{normalize, cut_position, redundant_cut};
  }
  std::string label() const {
    std::string s = enhanced ? "enhanced" : "faithful";
    if (normalize) s += "+normalize";
    if (cut_position) s += "+cut-position";
    if (redundant_cut) s += "+redundant-cut";
    if (warm) s += "+warm";
    if (pricing) s += "+pricing";
    if (!purge) s += "+no-purge";
    return s;
  }
};

void check_config(const RunConfig& config, const SolverBackend& backend) {
  if (config.redundant_cut && config.enhanced)
    throw CLI::ValidationError("--redundant-cut requires --faithful");
  if (config.pricing && !backend.supports_duals())
    throw CLI::ValidationError("--pricing requires a backend that provides duals");
}

RunConfig parse_config_token(const std::string& token) {
  RunConfig config;
  bool formulation_seen = false;
  std::istringstream ss(token);
  std::string part;
  while (std::getline(ss, part, '+')) {
    if (part == "enhanced") {
      config.enhanced = true;
      formulation_seen = true;
    } else if (part == "faithful") {
      config.enhanced = false;
      formulation_seen = true;
    } else if (part == "normalize") {
      config.normalize = true;
    } else if (part == "cut-position") {
      config.cut_position = true;
    } else if (part == "redundant-cut") {
      config.redundant_cut = true;
    } else if (part == "warm") {
      config.warm = true;
    } else if (part == "pricing") {
      config.pricing = true;
    } else if (part == "no-purge") {
      config.purge = false;
    } else {
      throw CLI::ValidationError("unknown config token: " + part);
    }
  }
  if (!formulation_seen)
    throw CLI::ValidationError("config must name a formulation (enhanced or faithful)");
  return config;
}

struct SolveOutcome {
  SolveStatus status = SolveStatus::Error;
  long long lb = 0;
  double ub = std::numeric_limits<double>::infinity();
  std::size_t n_vars = 0;
  std::size_t n_plates = 0;
  PhaseTimings timings;
  double total_seconds = 0.0;
  Solution solution;
  std::shared_ptr<CutGraph> graph;
  Verdict verification;
  std::string message;
};

SolveOutcome run_one(const Instance& instance, const RunConfig& config, SolverBackend& backend,
                     const BackendConfig& backend_config) {
  SolveOutcome out;
  auto started = std::chrono::steady_clock::now();
  auto elapsed = [](auto t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  if (config.pricing) {
    PricingOptions options;
    options.rules = config.rules();
    options.enumeration = config.enum_options();
    options.warm_start = config.warm;
    options.purge_after_fixing = config.purge;
    PricingReport report = run_priced_pipeline(instance, options, backend, backend_config);
    out.status = report.status;
    out.lb = report.lower_bound;
    out.ub = report.upper_bound;
    out.timings = report.timings;
    out.n_vars = report.final_variable_count;
    out.n_plates = report.final_plate_count;
    out.solution = report.best_solution;
    out.graph = report.solution_graph;
    out.verification = report.verification;
    out.message = report.message;
  } else {
    auto t0 = std::chrono::steady_clock::now();
    auto graph = std::make_shared<CutGraph>(
        enumerate(instance, config.rules(), config.enum_options()));
    ModelIR model = config.enhanced ? build_enhanced_model(*graph, instance)
                                    : build_faithful_model(*graph, instance);
    out.timings[Phase::E] = elapsed(t0);
    out.n_vars = model.columns.size();
    out.n_plates = graph->plates.size();

    if (config.warm) {
      t0 = std::chrono::steady_clock::now();
      CutGraph restricted = enumerate(instance, RuleSet::Restricted, config.enum_options());
      Solution heuristic = greedy_heuristic(instance, restricted);
      if (auto mapped = map_solution(heuristic, restricted, *graph))
        model.warm_start = solution_to_values(*mapped, model, *graph);
      out.timings[Phase::H] = elapsed(t0);
    }

    t0 = std::chrono::steady_clock::now();
    SolveReport report = backend.solve_milp(model, backend_config);
    out.timings[Phase::BB] = elapsed(t0);
    out.status = report.status;
    out.message = report.message;
    out.graph = graph;
    if (report.has_primal && !report.values.empty()) {
      out.solution = extract_solution(model, report.values, *graph);
      out.lb = out.solution.objective;
      out.verification = verify_solution(out.solution, *graph, instance);
    }
    if (report.status == SolveStatus::Optimal)
      out.ub = static_cast<double>(out.lb);
    else if (std::isfinite(report.dual_bound))
      out.ub = report.dual_bound;
  }
  out.total_seconds = elapsed(started);
  return out;
}

std::string format_bound(double v) {
  if (!std::isfinite(v)) return "inf";
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

const char* kStatsHeader =
    "instance,formulation,normalize,cut_position,redundant_cut,warm,pricing,purge,"
    "n_vars,n_plates,lb,ub,status,t_total,t_E,t_H,t_RP,t_IP,t_FP,t_LP,t_BB";

std::string stats_row(const std::string& instance_name, const RunConfig& config,
                      const SolveOutcome& out) {
  std::ostringstream ss;
  ss << instance_name << ',' << (config.enhanced ? "enhanced" : "faithful") << ','
     << config.normalize << ',' << config.cut_position << ',' << config.redundant_cut << ','
     << config.warm << ',' << config.pricing << ',' << config.purge << ',' << out.n_vars << ','
     << out.n_plates << ',' << out.lb << ',' << format_bound(out.ub) << ','
     << status_name(out.status) << ',' << out.total_seconds;
  for (int p = 0; p < kPhaseCount; ++p) ss << ',' << out.timings.seconds[p];
  return ss.str();
}

void append_csv(const std::string& path, const std::string& header, const std::string& rows) {
  bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (fresh) out << header << '\n';
  out << rows << '\n';
}

void write_solution_file(const std::string& path, const SolveOutcome& out,
                         const Instance& instance) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "# objective " << out.solution.objective << '\n';
  if (out.graph) {
    ModelIR model = out.graph->rules == RuleSet::Enhanced
                        ? build_enhanced_model(*out.graph, instance)
                        : build_faithful_model(*out.graph, instance);
    for (const auto& [name, value] : solution_to_values(out.solution, model, *out.graph))
      f << name << ' ' << value << '\n';
  }
}

int cmd_solve(const std::string& instance_path, const RunConfig& config,
              const std::string& backend_spec, const BackendConfig& backend_config, bool verify,
              const std::string& solution_out, const std::string& stats_out,
              const std::string& phase_out, const std::string& export_out,
              const std::string& export_format) {
  auto backend = make_backend(backend_spec);
  check_config(config, *backend);
  Instance instance = load_instance_file(instance_path);

  if (!export_out.empty()) {
    CutGraph graph = enumerate(instance, config.rules(), config.enum_options());
    ModelIR model = config.enhanced ? build_enhanced_model(graph, instance)
                                    : build_faithful_model(graph, instance);
    std::ofstream f(export_out);
    if (!f) throw std::runtime_error("cannot write " + export_out);
    f << export_model(model,
                      export_format == "mps" ? ExportFormat::MpsText : ExportFormat::LpText);
  }

  SolveOutcome out = run_one(instance, config, *backend, backend_config);
  std::string name = fs::path(instance_path).filename().string();

  std::cout << "instance: " << name << '\n'
            << "config: " << config.label() << '\n'
            << "status: " << status_name(out.status) << '\n'
            << "objective: " << out.lb << '\n'
            << "bound: " << format_bound(out.ub) << '\n'
            << "variables: " << out.n_vars << '\n'
            << "plates: " << out.n_plates << '\n';
  if (!out.message.empty()) std::cout << "note: " << out.message << '\n';

  if (verify && out.graph) {
    Verdict verdict = verify_solution(out.solution, *out.graph, instance);
    std::cout << "verification: " << (verdict.ok ? "pass" : "FAIL " + verdict.detail) << '\n';
    if (!verdict.ok) return 4;
  }
  if (!solution_out.empty()) write_solution_file(solution_out, out, instance);
  if (!stats_out.empty()) append_csv(stats_out, kStatsHeader, stats_row(name, config, out));
  if (!phase_out.empty()) {
    std::string rows = phase_csv_rows(name, out.timings);
    rows.pop_back();  // drop the trailing newline, append_csv adds one
    append_csv(phase_out, phase_csv_header(), rows);
  }
  return exit_code_for(out.status);
}

int cmd_bench(const std::string& dir, const std::vector<std::string>& config_tokens,
              const std::string& backend_spec, const BackendConfig& backend_config,
              const std::string& out_path, int jobs) {
  std::vector<RunConfig> configs;
  for (const std::string& token : config_tokens) configs.push_back(parse_config_token(token));
  if (configs.empty()) configs.push_back(parse_config_token("enhanced+normalize"));

  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());

  struct Job {
    std::string file;
    RunConfig config;
  };
  std::vector<Job> jobs_list;
  for (const std::string& f : files)
    for (const RunConfig& c : configs) jobs_list.push_back({f, c});

  std::vector<std::string> rows(jobs_list.size());
  std::vector<SolveOutcome> outcomes(jobs_list.size());
  std::atomic<std::size_t> next{0};
  // each worker owns an isolated backend; instances stay independent
  auto worker = [&] {
    auto backend = make_backend(backend_spec);
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= jobs_list.size()) break;
      const Job& job = jobs_list[i];
      std::string name = fs::path(job.file).filename().string();
      try {
        check_config(job.config, *backend);
        Instance instance = load_instance_file(job.file);
        outcomes[i] = run_one(instance, job.config, *backend, backend_config);
      } catch (const std::exception&) {
        outcomes[i] = SolveOutcome{};  // status Error; the run continues
      }
      rows[i] = stats_row(name, job.config, outcomes[i]);
    }
  };
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::ostringstream table;
  table << kStatsHeader << '\n';
  for (const std::string& row : rows) table << row << '\n';
  std::size_t sum_vars = 0, sum_plates = 0;
  double sum_total = 0.0;
  PhaseTimings sum_phase;
  for (const SolveOutcome& o : outcomes) {
    sum_vars += o.n_vars;
    sum_plates += o.n_plates;
    sum_total += o.total_seconds;
    for (int p = 0; p < kPhaseCount; ++p) sum_phase.seconds[p] += o.timings.seconds[p];
  }
  table << "TOTAL,,,,,,,," << sum_vars << ',' << sum_plates << ",,,," << sum_total;
  for (int p = 0; p < kPhaseCount; ++p) table << ',' << sum_phase.seconds[p];
  table << '\n';

  if (out_path.empty()) {
    std::cout << table.str();
  } else {
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot write " + out_path);
    f << table.str();
  }
  bool any_error = false;
  for (const SolveOutcome& o : outcomes) any_error = any_error || o.status == SolveStatus::Error;
  return any_error ? 4 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact MILP models for the guillotine 2D knapsack problem"};
  app.require_subcommand(1);

  RunConfig config;
  std::string backend_spec = "external";
  BackendConfig backend_config;
  std::string lp_algorithm = "auto";
  bool faithful_flag = false;

  auto add_config_flags = [&](CLI::App* cmd) {
    auto* enhanced = cmd->add_flag("--enhanced", "enhanced formulation (default)");
    auto* faithful = cmd->add_flag("--faithful", faithful_flag, "faithful formulation");
    enhanced->excludes(faithful);
    cmd->add_flag("--normalize", config.normalize, "plate-size normalization");
    cmd->add_flag("--cut-position", config.cut_position, "Cut-Position reduction pass");
    cmd->add_flag("--redundant-cut", config.redundant_cut,
                  "Redundant-Cut reduction pass (faithful only)");
  };
  auto add_backend_flags = [&](CLI::App* cmd) {
    cmd->add_option("--backend", backend_spec, "solver backend spec (see README)");
    cmd->add_option("--time-limit", backend_config.time_limit_seconds, "seconds");
    cmd->add_option("--threads", backend_config.threads, "solver threads");
    cmd->add_option("--seed", backend_config.seed, "solver random seed");
    cmd->add_option("--lp-algorithm", lp_algorithm, "auto|dual-simplex|barrier")
        ->check(CLI::IsMember({"auto", "dual-simplex", "barrier"}));
  };

  auto* solve = app.add_subcommand("solve", "solve one instance");
  std::string instance_path, solution_out, stats_out, phase_out, export_out;
  std::string export_format = "lp";
  bool no_verify = false, no_purge = false;
  solve->add_option("instance", instance_path, "instance file")->required();
  add_config_flags(solve);
  solve->add_flag("--warm-start", config.warm, "MIP-start from the greedy heuristic");
  solve->add_flag("--pricing", config.pricing, "run the priced pipeline");
  solve->add_flag("--no-purge", no_purge, "keep unreachable structure after pricing");
  solve->add_flag("--no-verify", no_verify, "skip the post-solve verification");
  solve->add_option("--solution", solution_out, "write the solution (name value lines)");
  solve->add_option("--stats", stats_out, "append a stats CSV row");
  solve->add_option("--phase-csv", phase_out, "append per-phase timing rows");
  solve->add_option("--export", export_out, "also write the model file");
  solve->add_option("--export-format", export_format, "lp|mps")
      ->check(CLI::IsMember({"lp", "mps"}));
  add_backend_flags(solve);

  auto* bench = app.add_subcommand("bench", "run a directory of instances");
  std::string bench_dir, bench_out;
  std::vector<std::string> bench_configs;
  int bench_jobs = 1;
  bench->add_option("dir", bench_dir, "directory of canonical instances")->required();
  bench->add_option("--config", bench_configs,
                    "variant token, e.g. enhanced+normalize+warm+pricing (repeatable)");
  bench->add_option("--out", bench_out, "CSV output path (default stdout)");
  bench->add_option("--jobs", bench_jobs, "parallel workers");
  add_backend_flags(bench);

  auto* stats = app.add_subcommand("stats", "enumeration statistics CSV");
  std::string stats_instance;
  std::string stats_rules = "enhanced";
  bool stats_normalize = false, stats_cp = false, stats_rc = false;
  stats->add_option("instance", stats_instance, "instance file")->required();
  stats->add_option("--rules", stats_rules, "enhanced|faithful|restricted")
      ->check(CLI::IsMember({"enhanced", "faithful", "restricted"}));
  stats->add_flag("--normalize", stats_normalize, "plate-size normalization");
  stats->add_flag("--cut-position", stats_cp, "Cut-Position pass");
  stats->add_flag("--redundant-cut", stats_rc, "Redundant-Cut pass");

  auto* generate = app.add_subcommand("generate", "emit a random instance");
  GeneratorBounds bounds;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  int gen_min_plate = 0, gen_max_plate = 0;
  bool unweighted = false;
  generate->add_option("--seed", gen_seed, "generator seed");
  generate->add_option("--min-plate", gen_min_plate, "min plate side");
  generate->add_option("--max-plate", gen_max_plate, "max plate side");
  generate->add_option("--min-pieces", bounds.min_pieces, "");
  generate->add_option("--max-pieces", bounds.max_pieces, "");
  generate->add_option("--max-demand", bounds.max_demand, "");
  generate->add_option("--max-profit", bounds.max_profit, "");
  generate->add_flag("--unweighted", unweighted, "profit = area");
  generate->add_option("--out", gen_out, "output path (default stdout)");

  auto* verify = app.add_subcommand("verify", "check a solution file against an instance");
  std::string verify_instance, verify_values;
  verify->add_option("instance", verify_instance, "instance file")->required();
  verify->add_option("values", verify_values, "solution file (name value lines)")->required();
  add_config_flags(verify);

  CLI11_PARSE(app, argc, argv);
  config.enhanced = !faithful_flag;
  if (lp_algorithm == "dual-simplex") backend_config.lp_algorithm = LpAlgorithm::DualSimplex;
  if (lp_algorithm == "barrier") backend_config.lp_algorithm = LpAlgorithm::Barrier;

  try {
    if (solve->parsed()) {
      config.purge = !no_purge;
      return cmd_solve(instance_path, config, backend_spec, backend_config, !no_verify,
                       solution_out, stats_out, phase_out, export_out, export_format);
    }
    if (bench->parsed())
      return cmd_bench(bench_dir, bench_configs, backend_spec, backend_config, bench_out,
                       bench_jobs);
    if (stats->parsed()) {
      Instance instance = load_instance_file(stats_instance);
      RuleSet rules = stats_rules == "enhanced"   ? RuleSet::Enhanced
                      : stats_rules == "faithful" ? RuleSet::Faithful
                                                  : RuleSet::Restricted;
      CutGraph graph = enumerate(instance, rules, EnumOptions{stats_normalize, stats_cp, stats_rc});
      std::cout << stats_csv_header() << '\n' << stats_csv_row(graph) << '\n';
      return 0;
    }
    if (generate->parsed()) {
      if (gen_min_plate > 0)
        bounds.min_plate_length = bounds.min_plate_width = gen_min_plate;
      if (gen_max_plate > 0)
        bounds.max_plate_length = bounds.max_plate_width = gen_max_plate;
      bounds.unweighted = unweighted;
      Instance instance = generate_random_instance(gen_seed, bounds);
      if (gen_out.empty()) {
        std::cout << render_instance(instance);
      } else {
        std::ofstream f(gen_out);
        if (!f) throw std::runtime_error("cannot write " + gen_out);
        f << render_instance(instance);
      }
      return 0;
    }
    if (verify->parsed()) {
      Instance instance = load_instance_file(verify_instance);
      CutGraph graph = enumerate(instance, config.rules(), config.enum_options());
      ModelIR model = config.enhanced ? build_enhanced_model(graph, instance)
                                      : build_faithful_model(graph, instance);
      std::ifstream f(verify_values);
      if (!f) throw std::runtime_error("cannot open " + verify_values);
      auto values = parse_values(f);
      Solution solution = extract_solution(model, values, graph);
      Verdict verdict = verify_solution(solution, graph, instance);
      std::cout << (verdict.ok ? "pass" : "FAIL " + verdict.detail) << '\n'
                << "objective " << solution.objective << '\n';
      return verdict.ok ? 0 : 3;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 1;
}
