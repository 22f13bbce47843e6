// iegs: frequency-constrained scheduling of an integrated electricity-gas
// system under wind uncertainty.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "iegs/drcc.hpp"
#include "iegs/error.hpp"
#include "iegs/eval.hpp"
#include "iegs/freq.hpp"
#include "iegs/instance.hpp"
#include "iegs/optmodel.hpp"
#include "iegs/scheduler.hpp"

namespace fs = std::filesystem;
using namespace iegs;

namespace {

enum Exit { kOk = 0, kError = 1, kLimit = 2, kInfeasible = 3 };

struct RunConfig {
  std::string instance;
  std::string variant = "dr-m";
  std::optional<double> epsilon;
  std::optional<double> epsilon_individual;
  std::size_t sample_size = 0;
  std::optional<std::size_t> in_sample;
  std::optional<std::size_t> out_of_sample;
  std::optional<std::uint64_t> seed;
  PccpParams pccp;
  double mip_gap = 0.01;
  std::optional<double> time_limit;
  std::string out_dir = ".";
};

// Keys mirror the long flag names.
void apply_config_file(const std::string& path, RunConfig& rc) {
  std::ifstream in(path);
  if (!in) throw ParseError("config not found: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed config " + path + ": " + e.what());
  }
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "instance") rc.instance = v.get<std::string>();
      else if (key == "variant") rc.variant = v.get<std::string>();
      else if (key == "epsilon") rc.epsilon = v.get<double>();
      else if (key == "epsilon-individual") rc.epsilon_individual = v.get<double>();
      else if (key == "sample-size") rc.sample_size = v.get<std::size_t>();
      else if (key == "in-sample") rc.in_sample = v.get<std::size_t>();
      else if (key == "out-of-sample") rc.out_of_sample = v.get<std::size_t>();
      else if (key == "seed") rc.seed = v.get<std::uint64_t>();
      else if (key == "eps-gap") rc.pccp.eps_gap = v.get<double>();
      else if (key == "rho0") rc.pccp.rho0 = v.get<double>();
      else if (key == "rho-max") rc.pccp.rho_max = v.get<double>();
      else if (key == "kappa") rc.pccp.kappa = v.get<double>();
      else if (key == "max-iter") rc.pccp.max_iter = v.get<int>();
      else if (key == "mip-gap") rc.mip_gap = v.get<double>();
      else if (key == "time-limit") rc.time_limit = v.get<double>();
      else if (key == "out") rc.out_dir = v.get<std::string>();
      else throw ValidationError("config " + path + ": unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config " + path + ": " + e.what());
  }
}

IegsInstance load(const RunConfig& rc) {
  if (rc.instance.empty()) throw ValidationError("no instance given (--instance)");
  IegsInstance inst = load_instance(rc.instance);
  auto& u = inst.uncertainty;
  if (rc.in_sample) u.in_sample = *rc.in_sample;
  if (rc.out_of_sample) u.out_of_sample = *rc.out_of_sample;
  if (rc.seed) u.seed = *rc.seed;
  if (rc.epsilon) u.epsilon = *rc.epsilon;
  if (rc.epsilon_individual) u.epsilon_individual = *rc.epsilon_individual;
  for (const auto& w : inst.warnings) std::cerr << "warning: " << w << '\n';
  return inst;
}

VariantConfig variant_config(const RunConfig& rc) {
  VariantConfig vc;
  vc.variant = parse_variant(rc.variant);
  vc.sample_size = rc.sample_size;
  vc.epsilon = rc.epsilon;
  vc.epsilon_individual = rc.epsilon_individual;
  return vc;
}

SolverOptions solver_options(const RunConfig& rc) {
  SolverOptions o;
  o.set_mip_gap(rc.mip_gap);
  if (rc.time_limit) o.set_time_limit(*rc.time_limit);
  return o;
}

fs::path out_path(const RunConfig& rc, const std::string& name) {
  fs::create_directories(rc.out_dir);
  return fs::path(rc.out_dir) / name;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

int exit_for(const ScheduleSolution& sol) {
  if (sol.status == SolveStatus::Infeasible) return kInfeasible;
  if (sol.status == SolveStatus::Limit) return kLimit;
  return kOk;
}

int cmd_solve(const RunConfig& rc) {
  const IegsInstance inst = load(rc);
  const ScheduleSolution sol = run_algorithm1(inst, variant_config(rc), rc.pccp, solver_options(rc));
  for (const auto& w : sol.warnings) std::cerr << "warning: " << w << '\n';
  const fs::path sol_path = out_path(rc, "solution.json");
  save_solution(sol, sol_path);
  {
    std::ofstream trace(out_path(rc, "pccp_trace.csv"));
    sol.pccp.write_trace_csv(trace);
  }
  std::cout << "variant " << variant_name(sol.variant.variant) << ": " << to_string(sol.status) << " ("
            << sol.exit_condition << ")\n";
  if (!sol.message.empty()) std::cerr << sol.message << '\n';
  if (sol.x.size() == inst.generators.size()) {
    std::cout << "total cost " << std::fixed << std::setprecision(2) << sol.cost.total << ", iterations "
              << sol.iterations << ", relaxation gap " << std::scientific << sol.pccp.gap << '\n';
  }
  std::cout << "wrote " << sol_path.string() << '\n';
  return exit_for(sol);
}

int cmd_evaluate(const RunConfig& rc, const std::string& solution_path, bool audit_gas) {
  const IegsInstance inst = load(rc);
  const ScheduleSolution sol = load_solution(solution_path);
  const ScenarioSplit split = generate_split(inst);
  const EvalReport report = evaluate_solution(sol, inst, split.out_of_sample, audit_gas);
  const std::vector<EvalReport> rows{report};
  write_text(out_path(rc, "evaluation.json"), reports_to_json(rows));
  const std::string table = reports_to_table(rows);
  write_text(out_path(rc, "evaluation.txt"), table);
  std::ofstream freq(out_path(rc, "frequency_by_hour.csv"));
  audit_frequency(sol, inst).write_csv(freq);
  std::cout << table;
  return report.error.empty() ? kOk : kError;
}

int cmd_compare(const RunConfig& rc, const std::vector<std::string>& variant_names,
                const std::vector<std::size_t>& sizes, std::size_t threads, bool audit_gas) {
  const IegsInstance inst = load(rc);
  std::vector<Variant> variants;
  for (const auto& n : variant_names) variants.push_back(parse_variant(n));
  CompareOptions opt;
  opt.pccp = rc.pccp;
  opt.solver = solver_options(rc);
  opt.threads = threads;
  opt.audit_gas = audit_gas;
  const auto rows = compare_variants(inst, variants, sizes, opt);
  write_text(out_path(rc, "compare.json"), reports_to_json(rows));
  const std::string table = reports_to_table(rows);
  write_text(out_path(rc, "compare.txt"), table);
  {
    std::ofstream r(out_path(rc, "rocof_by_hour.csv"));
    write_hourly_csv(r, rows, "rocof");
    std::ofstream n(out_path(rc, "nadir_by_hour.csv"));
    write_hourly_csv(n, rows, "nadir");
  }
  std::cout << table;
  return kOk;
}

int cmd_simulate(const RunConfig& rc, const std::string& solution_path, int hour) {
  const IegsInstance inst = load(rc);
  const ScheduleSolution sol = load_solution(solution_path);
  const FrequencyAudit audit = audit_frequency(sol, inst);
  const fs::path csv = out_path(rc, "frequency_by_hour.csv");
  {
    std::ofstream out(csv);
    audit.write_csv(out);
  }
  audit.write_csv(std::cout);
  if (hour > 0) {
    const auto t = static_cast<std::size_t>(hour - 1);
    if (t >= inst.horizon) throw ValidationError("--hour outside the horizon");
    std::vector<double> x, y, rg, rw;
    for (const auto& r : sol.x) x.push_back(r.at(t));
    for (const auto& r : sol.y) y.push_back(r.at(t));
    for (const auto& r : sol.rg) rg.push_back(r.at(t));
    for (const auto& r : sol.rw) rw.push_back(r.at(t));
    const auto snap = make_snapshot(inst, t, x, y, rg, rw);
    std::ofstream traj(out_path(rc, "trajectory_hour" + std::to_string(hour) + ".csv"));
    simulate_swing(snap, inst.frequency).write_csv(traj, 10);
  }
  std::cerr << audit.failing_hours() << " of " << audit.hours.size() << " hours violate a frequency limit\n";
  return kOk;
}

int cmd_export(const RunConfig& rc, const std::string& output) {
  const IegsInstance inst = load(rc);
  const ScenarioSplit split = generate_split(inst);
  AssembleOptions opt;
  opt.tightening = 0.0;
  const Assembly a = assemble(inst, variant_config(rc), split.in_sample, opt);
  const fs::path path = output.empty() ? out_path(rc, rc.variant + ".conic") : fs::path(output);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  export_conic(a.model, path);
  const OptModel back = import_conic(path);
  if (back.checksum() != a.model.checksum()) throw Error("exported model does not re-import identically");
  std::cout << "wrote " << path.string() << " (" << a.model.num_vars() << " variables, " << a.model.rows().size()
            << " linear rows, " << a.model.socs().size() << " cones)\n";
  return kOk;
}

void add_instance_flags(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--instance", rc.instance, "Instance JSON file");
  cmd->add_option("--out", rc.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--in-sample", rc.in_sample, "In-sample scenario count [samples] (default: instance)");
  cmd->add_option("--out-of-sample", rc.out_of_sample, "Out-of-sample scenario count [samples] (default: instance)");
  cmd->add_option("--seed", rc.seed, "Scenario generator seed (default: instance)");
  cmd->add_option("--epsilon", rc.epsilon, "Joint violation probability [fraction, 0-1]");
  cmd->add_option("--epsilon-individual", rc.epsilon_individual,
                  "Per-constraint violation probability of the individual variants [fraction, 0-1]");
}

void add_solve_flags(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--variant", rc.variant, "saa | dr-m | dr-u | dr-m-i | dr-u-i | no-fc | no-ngs | no-vi")
      ->capture_default_str();
  cmd->add_option("--sample-size", rc.sample_size,
                  "Scenarios for SAA / samples for moment estimation [samples] (0: instance default)")
      ->capture_default_str();
  cmd->add_option("--eps-gap", rc.pccp.eps_gap, "Weymouth relaxation gap tolerance [relative]")
      ->capture_default_str();
  cmd->add_option("--rho0", rc.pccp.rho0, "Initial slack penalty [$ per bar^2]")->capture_default_str();
  cmd->add_option("--rho-max", rc.pccp.rho_max, "Slack penalty cap [$ per bar^2]")->capture_default_str();
  cmd->add_option("--kappa", rc.pccp.kappa, "Penalty growth factor [-]")->capture_default_str();
  cmd->add_option("--max-iter", rc.pccp.max_iter, "Convex-concave iteration limit [iterations]")
      ->capture_default_str();
  cmd->add_option("--mip-gap", rc.mip_gap, "Relative MIP gap [fraction]")->capture_default_str();
  cmd->add_option("--time-limit", rc.time_limit, "Wall-clock limit per MILP solve [s]");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-constrained unit commitment of integrated electricity-gas systems"};
  app.require_subcommand(1);
  RunConfig rc;
  std::string config_path;
  app.add_option("--config", config_path, "JSON run configuration; keys are long flag names, flags override");

  auto* solve = app.add_subcommand("solve", "Schedule one variant and write solution.json and pccp_trace.csv");
  add_instance_flags(solve, rc);
  add_solve_flags(solve, rc);

  std::string solution_path;
  bool no_gas_audit = false;
  auto* evaluate = app.add_subcommand("evaluate", "EJVP, frequency and gas audits of a solution");
  add_instance_flags(evaluate, rc);
  evaluate->add_option("--solution", solution_path, "Solution JSON")->required();
  evaluate->add_flag("--no-gas-audit", no_gas_audit, "Skip the gas-network feasibility audit");

  std::vector<std::string> variants{"saa", "dr-m", "dr-u"};
  std::vector<std::size_t> sizes;
  std::size_t threads = 1;
  auto* compare = app.add_subcommand("compare", "Run a grid of variants and sample sizes on shared scenarios");
  add_instance_flags(compare, rc);
  add_solve_flags(compare, rc);
  compare->add_option("--variants", variants, "Comma-separated variants")->delimiter(',')->capture_default_str();
  compare->add_option("--sizes", sizes, "Comma-separated sample sizes [samples]")->delimiter(',');
  compare->add_option("--threads", threads, "Parallel variant runs (0: all cores)")->capture_default_str();
  compare->add_flag("--no-gas-audit", no_gas_audit, "Skip the gas-network feasibility audit");

  int hour = 0;
  auto* simulate = app.add_subcommand("simulate-frequency", "Per-hour RoCoF, nadir and QSS of a solution");
  add_instance_flags(simulate, rc);
  simulate->add_option("--solution", solution_path, "Solution JSON")->required();
  simulate->add_option("--hour", hour, "Also write the trajectory of this hour (1-based) [h]");

  std::string conic_out;
  auto* exporter = app.add_subcommand("export-conic", "Write the first-stage model in the conic text format");
  add_instance_flags(exporter, rc);
  add_solve_flags(exporter, rc);
  exporter->add_option("--output", conic_out, "Target file (default: <out>/<variant>.conic)");

  // A config file fills defaults; explicit flags parsed afterwards win.
  try {
    app.parse(argc, argv);
    if (!config_path.empty()) {
      RunConfig from_file;
      apply_config_file(config_path, from_file);
      // Re-parse so command-line values override the file.
      rc = from_file;
      app.parse(argc, argv);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }

  try {
    if (*solve) return cmd_solve(rc);
    if (*evaluate) return cmd_evaluate(rc, solution_path, !no_gas_audit);
    if (*compare) return cmd_compare(rc, variants, sizes, threads, !no_gas_audit);
    if (*simulate) return cmd_simulate(rc, solution_path, hour);
    if (*exporter) return cmd_export(rc, conic_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
