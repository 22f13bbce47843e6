#pragma once

// Frequency-constrained unit commitment for the coupled electricity-gas
// system: variable layout, unit-commitment rows, objective, model assembly
// per variant, and the sequential penalty convex-concave solve.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iegs/drcc.hpp"
#include "iegs/freq.hpp"
#include "iegs/gasnet.hpp"
#include "iegs/instance.hpp"
#include "iegs/optmodel.hpp"

namespace iegs {

enum class Variant { SaaFcuc, DrFcucM, DrFcucU, DrFcucMI, DrFcucUI, NoFc, NoNgs, NoVi };

/// CLI spelling: saa, dr-m, dr-u, dr-m-i, dr-u-i, no-fc, no-ngs, no-vi.
std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);
const std::vector<Variant>& all_variants();

struct VariantConfig {
  Variant variant = Variant::DrFcucM;
  /// Scenarios used by SAA, and samples used to estimate moments when the
  /// instance does not carry them. 0 selects the instance's moment_samples.
  std::size_t sample_size = 0;
  std::optional<double> epsilon;             // overrides the instance
  std::optional<double> epsilon_individual;  // individual variants
};

/// Effective settings after merging the config with the instance.
struct ResolvedVariant {
  Variant variant;
  std::size_t sample_size;
  double epsilon;
  double epsilon_individual;
  bool frequency;  // frequency rows present
  bool gas;        // gas network present
  bool vi;         // virtual inertia and wind PFR allowed
};

/// Throws ValidationError on incompatible settings (e.g. unimodal variants
/// with epsilon above 1/6).
ResolvedVariant resolve_variant(const IegsInstance& inst, const VariantConfig& config);

/// Unit-commitment handles indexed [unit][hour].
struct UcVars {
  std::vector<std::vector<int>> x, zu, zd, p, rg;  // generators
  std::vector<std::vector<int>> y, pw, rw;         // wind farms

  FreqVars freq(std::size_t t) const;
  WindVars wind(std::size_t t) const;
  GasCoupling coupling(std::size_t t) const;
};

UcVars add_uc_vars(OptModel& model, const IegsInstance& inst, bool allow_vi = true);

/// Commitment logic, minimum up/down, output and reserve limits, ramping,
/// wind reserve limits, line limits and the power balance.
/// `line_slack` (optional) receives elastic slack handles per line-hour.
void build_uc_core(OptModel& model, const IegsInstance& inst, const UcVars& vars,
                   std::vector<std::vector<int>>* line_slack = nullptr);

/// Total operating cost: start-up, shut-down, no-load, energy and PFR of the
/// generators, plus virtual inertia and PFR of the wind farms.
LinExpr build_objective(const IegsInstance& inst, const UcVars& vars);

/// kappa per hour (0 when damping alone holds the nadir or the contingency is
/// absorbed in the dead band).
std::vector<double> kappa_schedule(const IegsInstance& inst);

struct AssembleOptions {
  /// Linearization state for the second-stage problem; null builds the
  /// relaxed first problem.
  const PccpState* pccp = nullptr;
  double tightening = 0.0;  // weight of sum(pi_m - pi_n) in the first problem
  bool elastic = false;     // elastic gas balance and line limits
  double elastic_penalty = 1e6;
};

struct Assembly {
  OptModel model;
  ResolvedVariant variant;
  UcVars uc;
  std::optional<GasVars> gas;
  std::vector<std::vector<int>> weymouth_slack;  // [pipe][hour], second stage only
  std::vector<std::vector<int>> line_slack;      // [line][hour], elastic only
  std::vector<double> kappa;
  AmbiguitySpec ambiguity;
  std::vector<std::string> warnings;
};

Assembly assemble(const IegsInstance& inst, const VariantConfig& config, const ScenarioSet& in_sample,
                  const AssembleOptions& options = {});

struct CostBreakdown {
  double startup = 0.0;
  double shutdown = 0.0;
  double no_load = 0.0;
  double generation = 0.0;
  double pfr_generators = 0.0;
  double virtual_inertia = 0.0;
  double pfr_wind = 0.0;
  double total = 0.0;
};

struct GasState {
  std::vector<std::vector<double>> pressure, flow, flow_in, flow_out, linepack;
  std::vector<std::vector<double>> comp_flow, comp_use, source, gfu;
};

struct ScheduleSolution {
  std::string instance;
  ResolvedVariant variant{};
  SolveStatus status = SolveStatus::Infeasible;
  std::string exit_condition;  // converged | exhausted | infeasible | solver-limit
  std::string message;
  std::vector<std::vector<double>> x, zu, zd, p, rg;  // [generator][hour]
  std::vector<std::vector<double>> y, pw, rw;         // [farm][hour]
  std::optional<GasState> gas;
  CostBreakdown cost;
  std::vector<double> kappa;
  PccpState pccp;
  int iterations = 0;  // number of MISOCP solves
  double mip_gap = 0.0;
  int cuts = 0;
  double wall_time = 0.0;
  std::vector<std::string> warnings;

  bool ok() const { return status == SolveStatus::Optimal || status == SolveStatus::Feasible; }
};

/// Cost terms recomputed from solution values.
CostBreakdown compute_costs(const IegsInstance& inst, const ScheduleSolution& sol);

ScheduleSolution run_algorithm1(const IegsInstance& inst, const VariantConfig& config, const ScenarioSet& in_sample,
                                const PccpParams& params = {}, const SolverOptions& options = {});

/// Convenience overload generating the instance's scenario split.
ScheduleSolution run_algorithm1(const IegsInstance& inst, const VariantConfig& config,
                                const PccpParams& params = {}, const SolverOptions& options = {});

std::string solution_to_json(const ScheduleSolution& sol);
ScheduleSolution solution_from_json(const std::string& text);
void save_solution(const ScheduleSolution& sol, const std::filesystem::path& path);
ScheduleSolution load_solution(const std::filesystem::path& path);

}  // namespace iegs
