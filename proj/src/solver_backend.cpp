#include "g2kp/solver_backend.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace g2kp {

const char* status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::Error: return "error";
  }
  return "?";
}

const char* lp_algorithm_tag(LpAlgorithm a) {
  switch (a) {
    case LpAlgorithm::Automatic: return "auto";
    case LpAlgorithm::DualSimplex: return "dual-simplex";
    case LpAlgorithm::Barrier: return "barrier";
  }
  return "auto";
}

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

SolveStatus status_from_text(const std::string& text) {
  if (text == "optimal") return SolveStatus::Optimal;
  if (text == "feasible") return SolveStatus::Feasible;
  if (text == "infeasible") return SolveStatus::Infeasible;
  if (text == "time_limit") return SolveStatus::TimeLimit;
  return SolveStatus::Error;
}

// Solution-file grammar (one item per line):
//   status <optimal|feasible|infeasible|time_limit|error>
//   objective <value>            (when a feasible point exists)
//   bound <value>
//   message <free text>
//   columns <n>   followed by n `name value` lines (nonzeros)
//   duals <n>     followed by n `rowname value` lines (LP only)
//   rcosts <n>    followed by n `colname value` lines (LP only)
//   end
SolveReport parse_solution_file(const std::string& text) {
  SolveReport report;
  report.dual_bound = std::numeric_limits<double>::infinity();
  std::istringstream in(text);
  std::string line;
  bool saw_status = false;
  auto read_section = [&](std::map<std::string, double>& target, long long count) {
    for (long long i = 0; i < count; ++i) {
      if (!std::getline(in, line)) throw std::runtime_error("truncated solution section");
      std::istringstream ss(line);
      std::string name;
      double value = 0.0;
      if (!(ss >> name >> value)) throw std::runtime_error("malformed section line: " + line);
      target[name] = value;
    }
  };
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key) || key[0] == '#') continue;
    if (key == "status") {
      std::string value;
      ss >> value;
      report.status = status_from_text(value);
      saw_status = true;
    } else if (key == "objective") {
      ss >> report.primal;
      report.has_primal = true;
    } else if (key == "bound") {
      ss >> report.dual_bound;
    } else if (key == "message") {
      std::getline(ss, report.message);
    } else if (key == "columns") {
      long long n = 0;
      ss >> n;
      read_section(report.values, n);
    } else if (key == "duals") {
      long long n = 0;
      ss >> n;
      read_section(report.row_duals, n);
    } else if (key == "rcosts") {
      long long n = 0;
      ss >> n;
      read_section(report.reduced_costs, n);
    } else if (key == "end") {
      break;
    }
  }
  if (!saw_status) throw std::runtime_error("solution file has no status line");
  return report;
}

// A row with no terms is not expressible in LP text and cannot carry the
// model anyway; if its empty left-hand side already violates the
// relation, the whole model is infeasible.
bool trivially_infeasible_row(const Row& row, std::string* which) {
  if (!row.terms.empty()) return false;
  bool violated = (row.relation == Relation::LessEqual && row.rhs < 0) ||
                  (row.relation == Relation::GreaterEqual && row.rhs > 0) ||
                  (row.relation == Relation::Equal && row.rhs != 0);
  if (violated && which) *which = row.name;
  return violated;
}

class ExternalProcessBackend;

// One driver process kept alive across solves; jobs go over stdin, one
// tab-separated line each, answered by a single `ok` / `error ...` line.
class DriverProcess {
 public:
  ~DriverProcess() { stop(); }

  bool running() const { return pid_ > 0; }

  bool start(const std::string& driver_path, std::string* error) {
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) {
      if (error) *error = "pipe() failed";
      return false;
    }
    pid_ = fork();
    if (pid_ < 0) {
      if (error) *error = "fork() failed";
      return false;
    }
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execlp("python3", "python3", driver_path.c_str(), "--serve", static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    to_child_ = fdopen(to_child[1], "w");
    from_child_ = fdopen(from_child[0], "r");
    if (!to_child_ || !from_child_) {
      if (error) *error = "fdopen() failed";
      stop();
      return false;
    }
    return true;
  }

  void stop() {
    if (to_child_) {
      fclose(to_child_);
      to_child_ = nullptr;
    }
    if (from_child_) {
      fclose(from_child_);
      from_child_ = nullptr;
    }
    if (pid_ > 0) {
      int status = 0;
      waitpid(pid_, &status, 0);
      pid_ = -1;
    }
  }

  bool roundtrip(const std::string& request, std::string& reply) {
    if (!running()) return false;
    if (fprintf(to_child_, "%s\n", request.c_str()) < 0 || fflush(to_child_) != 0) return false;
    char* line = nullptr;
    std::size_t cap = 0;
    ssize_t n = getline(&line, &cap, from_child_);
    if (n < 0) {
      free(line);
      return false;
    }
    reply.assign(line, static_cast<std::size_t>(n));
    free(line);
    while (!reply.empty() && (reply.back() == '\n' || reply.back() == '\r')) reply.pop_back();
    return true;
  }

 private:
  pid_t pid_ = -1;
  FILE* to_child_ = nullptr;
  FILE* from_child_ = nullptr;
};

class ExternalProcessBackend : public SolverBackend {
 public:
  explicit ExternalProcessBackend(ExternalBackendOptions options) : options_(std::move(options)) {
    if (const char* cmd = std::getenv("G2KP_SOLVER_CMD"); cmd && *cmd &&
                                                          options_.command_template.empty()) {
      options_.command_template = cmd;
      options_.persistent = false;
    }
    if (options_.command_template.empty() && !options_.persistent) {
      options_.command_template =
          "python3 " + default_driver_path() +
          " --model {model} --solution {solution} --time-limit {timelimit}"
          " --threads {threads} --seed {seed} --lp-hint {lphint} --warm {warmstart}";
    }
    if (options_.work_dir.empty()) {
      char tmpl[] = "/tmp/g2kp.XXXXXX";
      if (!mkdtemp(tmpl)) throw std::runtime_error("mkdtemp failed");
      options_.work_dir = tmpl;
      owns_work_dir_ = true;
    }
  }

  ~ExternalProcessBackend() override {
    driver_.stop();
    if (owns_work_dir_ && !std::getenv("G2KP_KEEP_TMP")) {
      for (const std::string& f : temp_files_) ::remove(f.c_str());
      ::rmdir(options_.work_dir.c_str());
    }
  }

  SolveReport solve_lp(const ModelIR& model, const BackendConfig& config) override {
    SolveReport report = run(relax(model), config, /*integral=*/false);
    if (!options_.provides_duals) {
      report.row_duals.clear();
      report.reduced_costs.clear();
    }
    return report;
  }

  SolveReport solve_milp(const ModelIR& model, const BackendConfig& config) override {
    SolveReport report = run(model, config, /*integral=*/true);
    report.row_duals.clear();
    report.reduced_costs.clear();
    // Warm-start contract: a feasible start is a valid primal bound even
    // when the underlying solver ignores it.
    if (!model.warm_start.empty()) {
      double warm_obj = 0.0;
      std::string why;
      if (values_feasible(model, model.warm_start, 1e-6, &warm_obj, &why)) {
        if (report.status == SolveStatus::Infeasible) {
          report.status = SolveStatus::Error;
          report.message = "solver reported infeasible but the warm start is feasible";
        } else if (!report.has_primal || report.primal < warm_obj - 1e-9) {
          report.primal = warm_obj;
          report.has_primal = true;
          if (report.status == SolveStatus::Error) report.status = SolveStatus::Feasible;
        }
      }
    }
    return report;
  }

  bool supports_duals() const override { return options_.provides_duals; }

 private:
  SolveReport run(const ModelIR& model, const BackendConfig& config, bool integral) {
    auto started = std::chrono::steady_clock::now();
    SolveReport report;
    try {
      report = run_inner(model, config, integral);
    } catch (const std::exception& ex) {
      report.status = SolveStatus::Error;
      report.message = ex.what();
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
  }

  SolveReport run_inner(const ModelIR& model, const BackendConfig& config, bool integral) {
    SolveReport report;
    std::string violated;
    for (const Row& row : model.rows) {
      if (trivially_infeasible_row(row, &violated)) {
        report.status = SolveStatus::Infeasible;
        report.dual_bound = -std::numeric_limits<double>::infinity();
        report.message = "row " + violated + " is unsatisfiable";
        return report;
      }
    }
    if (model.columns.empty()) {
      report.status = SolveStatus::Optimal;
      report.primal = 0.0;
      report.has_primal = true;
      report.dual_bound = 0.0;
      if (!integral)
        for (const Row& row : model.rows) report.row_duals[row.name] = 0.0;
      return report;
    }

    ++solve_index_;
    std::string stem = options_.work_dir + "/m" + std::to_string(solve_index_);
    std::string model_path =
        stem + (options_.format == ExportFormat::LpText ? ".lp" : ".mps");
    std::string solution_path = stem + ".sol";
    write_file(model_path, export_model(model, options_.format));
    remember(model_path);
    remember(solution_path);

    std::string warm_path = "-";
    if (integral && !model.warm_start.empty()) {
      std::ostringstream warm;
      for (const auto& [name, value] : model.warm_start) warm << name << ' ' << value << '\n';
      warm_path = stem + ".wstart";
      write_file(warm_path, warm.str());
      remember(warm_path);
    }

    std::ostringstream tl;
    tl << config.time_limit_seconds;
    if (!options_.command_template.empty()) {
      invoke_template(model_path, solution_path, tl.str(), config, warm_path, stem);
    } else {
      invoke_persistent(model_path, solution_path, tl.str(), config, warm_path);
    }
    SolveReport parsed = parse_solution_file(read_file(solution_path));
    return parsed;
  }

  void invoke_template(const std::string& model_path, const std::string& solution_path,
                       const std::string& timelimit, const BackendConfig& config,
                       const std::string& warm_path, const std::string& stem) {
    std::string cmd = options_.command_template;
    cmd = replace_all(cmd, "{model}", model_path);
    cmd = replace_all(cmd, "{solution}", solution_path);
    cmd = replace_all(cmd, "{timelimit}", timelimit);
    cmd = replace_all(cmd, "{threads}", std::to_string(config.threads));
    cmd = replace_all(cmd, "{seed}", std::to_string(config.seed));
    cmd = replace_all(cmd, "{lphint}", lp_algorithm_tag(config.lp_algorithm));
    cmd = replace_all(cmd, "{warmstart}", warm_path);
    std::string log_path = stem + ".log";
    remember(log_path);
    std::string full = cmd + " > " + log_path + " 2>&1";
    int rc = std::system(full.c_str());
    if (rc != 0) {
      std::string log;
      try {
        log = read_file(log_path);
      } catch (...) {
      }
      if (log.size() > 400) log = "..." + log.substr(log.size() - 400);
      throw std::runtime_error("solver command failed (exit " + std::to_string(rc) +
                               "): " + cmd + (log.empty() ? "" : "\n" + log));
    }
  }

  void invoke_persistent(const std::string& model_path, const std::string& solution_path,
                         const std::string& timelimit, const BackendConfig& config,
                         const std::string& warm_path) {
    std::string request = model_path + "\t" + solution_path + "\t" + timelimit + "\t" +
                          std::to_string(config.threads) + "\t" + std::to_string(config.seed) +
                          "\t" + lp_algorithm_tag(config.lp_algorithm) + "\t" + warm_path;
    std::string reply;
    for (int attempt = 0; attempt < 2; ++attempt) {
      if (!driver_.running()) {
        std::string error;
        if (!driver_.start(default_driver_path(), &error))
          throw std::runtime_error("cannot start solver driver: " + error);
      }
      if (driver_.roundtrip(request, reply)) break;
      driver_.stop();  // process died; one restart attempt
      reply.clear();
    }
    if (reply.empty()) throw std::runtime_error("solver driver did not answer");
    if (reply.rfind("ok", 0) != 0)
      throw std::runtime_error("solver driver: " + reply);
  }

  void remember(const std::string& path) {
    if (owns_work_dir_) temp_files_.push_back(path);
  }

  ExternalBackendOptions options_;
  DriverProcess driver_;
  bool owns_work_dir_ = false;
  long long solve_index_ = 0;
  std::vector<std::string> temp_files_;
};

std::mutex g_registry_mutex;
std::map<std::string, BackendFactory>& registry() {
  static std::map<std::string, BackendFactory> factories;
  return factories;
}

}  // namespace

std::string default_driver_path() {
  if (const char* env = std::getenv("G2KP_SOLVER_DRIVER"); env && *env) return env;
#ifdef G2KP_DEFAULT_DRIVER
  return G2KP_DEFAULT_DRIVER;
#else
  // Fall back to a copy next to the executable.
  char buf[4096];
  ssize_t n = readlink("/proc/self/exe", buf, sizeof(buf) - 1);
  if (n > 0) {
    buf[n] = '\0';
    std::string dir(buf);
    std::size_t slash = dir.find_last_of('/');
    if (slash != std::string::npos) return dir.substr(0, slash) + "/solve_model.py";
  }
  return "solve_model.py";
#endif
}

std::unique_ptr<SolverBackend> make_external_backend(ExternalBackendOptions options) {
  // EPIPE from a dead driver is reported through the normal error path.
  static std::once_flag ignore_sigpipe;
  std::call_once(ignore_sigpipe, [] { std::signal(SIGPIPE, SIG_IGN); });
  return std::make_unique<ExternalProcessBackend>(std::move(options));
}

void register_backend_factory(const std::string& scheme, BackendFactory factory) {
  std::lock_guard<std::mutex> lock(g_registry_mutex);
  registry()[scheme] = std::move(factory);
}

std::unique_ptr<SolverBackend> make_backend(const std::string& spec) {
  std::string scheme = spec;
  std::string rest;
  if (std::size_t colon = spec.find(':'); colon != std::string::npos) {
    scheme = spec.substr(0, colon);
    rest = spec.substr(colon + 1);
  }
  {
    std::lock_guard<std::mutex> lock(g_registry_mutex);
    auto it = registry().find(scheme);
    if (it != registry().end()) return it->second(rest);
  }
  if (scheme == "external") {
    ExternalBackendOptions options;
    std::istringstream ss(rest);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (part == "noduals")
        options.provides_duals = false;
      else if (part == "mps")
        options.format = ExportFormat::MpsText;
      else if (part == "oneshot")
        options.persistent = false;
      else if (part.rfind("cmd=", 0) == 0) {
        options.command_template = part.substr(4);
        options.persistent = false;
      } else if (!part.empty())
        throw std::invalid_argument("unknown backend option: " + part);
    }
    return make_external_backend(std::move(options));
  }
  throw std::invalid_argument("unknown backend: " + spec);
}

bool values_feasible(const ModelIR& model, const std::map<std::string, double>& values,
                     double tolerance, double* objective, std::string* why) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < model.columns.size(); ++i) index[model.columns[i].name] =
      static_cast<int>(i);
  std::vector<double> x(model.columns.size(), 0.0);
  for (const auto& [name, value] : values) {
    auto it = index.find(name);
    if (it == index.end()) {
      if (why) *why = "unknown column " + name;
      return false;
    }
    x[static_cast<std::size_t>(it->second)] = value;
  }
  double obj = 0.0;
  for (std::size_t i = 0; i < model.columns.size(); ++i) {
    const Column& col = model.columns[i];
    if (x[i] < col.lower - tolerance || x[i] > col.upper + tolerance) {
      if (why) *why = "bound violated on " + col.name;
      return false;
    }
    if (col.integer && std::abs(x[i] - std::nearbyint(x[i])) > tolerance) {
      if (why) *why = "integrality violated on " + col.name;
      return false;
    }
    obj += static_cast<double>(col.objective) * x[i];
  }
  for (const Row& row : model.rows) {
    double lhs = 0.0;
    for (const RowTerm& t : row.terms)
      lhs += static_cast<double>(t.coeff) * x[static_cast<std::size_t>(t.column)];
    bool ok = true;
    double rhs = static_cast<double>(row.rhs);
    if (row.relation == Relation::LessEqual) ok = lhs <= rhs + tolerance;
    if (row.relation == Relation::GreaterEqual) ok = lhs >= rhs - tolerance;
    if (row.relation == Relation::Equal) ok = std::abs(lhs - rhs) <= tolerance;
    if (!ok) {
      if (why) *why = "row " + row.name + " violated";
      return false;
    }
  }
  if (objective) *objective = obj;
  return true;
}

}  // namespace g2kp
