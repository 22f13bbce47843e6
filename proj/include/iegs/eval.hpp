#pragma once

// Out-of-sample validation and audits of schedules: empirical joint violation
// probability, simulated frequency response per hour, gas-network feasibility
// of schedules computed without the gas network, and variant comparison
// tables.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "iegs/drcc.hpp"
#include "iegs/gasnet.hpp"
#include "iegs/instance.hpp"
#include "iegs/scheduler.hpp"

namespace iegs {

/// Tolerance [MW] below which P^W + R^W above a sample is not a violation.
inline constexpr double kEjvpTolerance = 1e-7;

/// Percentage of out-of-sample scenarios in which P^W + R^W exceeds the
/// available wind at some (farm, hour). `scheduled` is [farm][hour].
/// Requires an out-of-sample set; `threads` = 0 uses the hardware count.
double compute_ejvp(const std::vector<std::vector<double>>& scheduled, const ScenarioSet& out_samples,
                    std::size_t threads = 0);
double compute_ejvp(const ScheduleSolution& sol, const ScenarioSet& out_samples, std::size_t threads = 0);

/// Violation percentage of each hour taken separately.
std::vector<double> compute_ejvp_per_hour(const ScheduleSolution& sol, const ScenarioSet& out_samples);

struct HourFrequency {
  std::size_t hour = 0;
  double inertia = 0.0;  // MW s/Hz
  double pfr = 0.0;      // MW
  double loss = 0.0;     // MW
  double rocof = 0.0;    // Hz/s
  double nadir = 0.0;    // |deviation| Hz
  double qss = 0.0;      // Hz
  bool rocof_ok = true;
  bool nadir_ok = true;
  bool qss_ok = true;
  bool catastrophic = false;  // no inertia online

  bool pass() const { return rocof_ok && nadir_ok && qss_ok && !catastrophic; }
};

struct FrequencyAudit {
  std::vector<HourFrequency> hours;

  bool all_pass() const;
  std::size_t failing_hours() const;
  void write_csv(std::ostream& out) const;
};

/// Simulates every hour with the schedule's commitment and reserves and
/// checks RoCoF, nadir and quasi-steady-state limits with tolerance `tol`.
FrequencyAudit audit_frequency(const ScheduleSolution& sol, const IegsInstance& inst, double tol = 1e-3);

enum class GasVerdict { Feasible, Infeasible, Undetermined };
std::string_view to_string(GasVerdict v);

struct GasAudit {
  GasVerdict verdict = GasVerdict::Undetermined;
  double total_slack = 0.0;  // sum of balance slacks over nodes and hours
  double threshold = 0.0;    // 1e-6 x total gas demand
  std::vector<std::string> slack_nodes;
  std::vector<std::vector<double>> node_slack;  // [node][hour]
  PccpState trace;
  std::string message;
};

/// Fixes GFU gas use to phi (P + R^G), then minimizes the total balance slack
/// of the gas network with the convex-concave loop.
GasAudit audit_gas_feasibility(const ScheduleSolution& sol, const IegsInstance& inst, const PccpParams& params = {},
                               const SolverOptions& options = {});

/// Independent re-check of a schedule against the instance: commitment
/// logic, limits, ramps, balance, line flows, wind caps, frequency rows and
/// (when present) gas balances. Lists every violation above `tol`.
struct ScheduleCheck {
  double max_violation = 0.0;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};
ScheduleCheck verify_schedule(const ScheduleSolution& sol, const IegsInstance& inst, double tol = 1e-5);

struct EvalReport {
  std::string variant;
  std::size_t sample_size = 0;
  std::string status;
  std::string exit_condition;
  std::string error;  // empty when the run produced a schedule
  CostBreakdown cost;
  double ejvp = 0.0;  // percent
  std::vector<double> rocof;
  std::vector<double> nadir;
  std::size_t frequency_failures = 0;
  std::string gas_verdict = "n/a";
  int iterations = 0;
  double wall_time = 0.0;
};

EvalReport evaluate_solution(const ScheduleSolution& sol, const IegsInstance& inst, const ScenarioSet& out_samples,
                             bool audit_gas = true);

struct CompareOptions {
  PccpParams pccp;
  SolverOptions solver;
  bool audit_gas = true;
  std::size_t threads = 1;  // variant runs in parallel
};

/// Runs every (variant, sample size) pair against one shared out-of-sample
/// set. Failures are recorded in their row. Sorted by variant, then size.
std::vector<EvalReport> compare_variants(const IegsInstance& inst, const std::vector<Variant>& variants,
                                         const std::vector<std::size_t>& sizes, const CompareOptions& options = {});
std::vector<EvalReport> compare_variants(const IegsInstance& inst, const ScenarioSplit& split,
                                         const std::vector<Variant>& variants, const std::vector<std::size_t>& sizes,
                                         const CompareOptions& options = {});

std::string reports_to_json(const std::vector<EvalReport>& rows);
std::string reports_to_table(const std::vector<EvalReport>& rows);
/// One row per hour, one column per report: `metric` is "rocof" or "nadir".
void write_hourly_csv(std::ostream& out, const std::vector<EvalReport>& rows, const std::string& metric);

}  // namespace iegs
