#pragma once

// Gas network rows (balances, linepack, compressors, sources, pressures, GFU
// coupling), the two convex halves of the Weymouth equation, and the state of
// the penalty convex-concave iteration that closes the relaxation gap.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "iegs/instance.hpp"
#include "iegs/optmodel.hpp"

namespace iegs {

/// Variable handles indexed [element][hour].
struct GasVars {
  std::vector<std::vector<int>> pressure;   // nodes
  std::vector<std::vector<int>> flow;       // pipelines, average
  std::vector<std::vector<int>> flow_in;    // pipelines
  std::vector<std::vector<int>> flow_out;   // pipelines
  std::vector<std::vector<int>> linepack;   // pipelines
  std::vector<std::vector<int>> comp_flow;  // compressors
  std::vector<std::vector<int>> comp_use;   // compressors, tau = nu F^C
  std::vector<std::vector<int>> source;     // sources
  std::vector<std::vector<int>> gfu;        // per generator; -1 for non-GFUs
  // Elastic balance slacks (only when requested): supply and withdrawal.
  std::vector<std::vector<int>> slack_pos;
  std::vector<std::vector<int>> slack_neg;

  bool elastic() const { return !slack_pos.empty(); }
};

/// Declares every gas variable for all hours with the bounds of the instance.
GasVars add_gas_vars(OptModel& model, const IegsInstance& inst, bool elastic = false);

/// GFU output handles P_{g,t} and R^G_{g,t} (per generator) for the coupling
/// rows; omit to leave GFU consumption as a free bounded variable.
struct GasCoupling {
  std::vector<int> power;
  std::vector<int> reserve;
};

/// Rows of one hour: nodal balance, average flow, linepack definition and
/// dynamics, compressor consumption and ratio, coupling, and (for the last
/// hour) terminal linepack.
void build_gas_block(OptModel& model, const IegsInstance& inst, const GasVars& vars, std::size_t hour,
                     const GasCoupling* coupling);

/// ||(F / C, pi_n)|| <= pi_m.
int build_weymouth_soc(OptModel& model, const IegsInstance& inst, const GasVars& vars, std::size_t pipe,
                       std::size_t hour);

/// pi_m^2 <= (2 F^r F - F^r^2) / C^2 + 2 pi_n^r pi_n - pi_n^r^2 + s, with the
/// square bounded through a rotated cone. Returns the cone index.
int build_weymouth_concave_linearized(OptModel& model, const IegsInstance& inst, const GasVars& vars,
                                      std::size_t pipe, std::size_t hour, double flow_point,
                                      double pressure_point, int slack);

/// Affine right-hand side of the linearized concave row (without slack).
double weymouth_tangent(double C, double flow_point, double pressure_point, double flow, double pressure_to);

/// Pressures [node][hour] and average flows [pipe][hour] read from a solution.
struct GasValues {
  std::vector<std::vector<double>> pressure;
  std::vector<std::vector<double>> flow;
};

GasValues extract_gas_values(const GasVars& vars, const std::vector<double>& x);

/// max (pi_m^2 - pi_n^2 - F^2 / C^2) / pi_m^2 over pipelines and hours.
double measure_relaxation_gap(const IegsInstance& inst, const GasValues& values);

/// max |F^2 - C^2 (pi_m^2 - pi_n^2)| / (C^2 pi_m^2).
double weymouth_residual(const IegsInstance& inst, const GasValues& values);

struct PccpParams {
  double eps_gap = 1e-3;
  double rho0 = 0.02;
  double rho_max = 1000.0;
  double kappa = 1.5;
  int max_iter = 50;
  /// Weight of the pressure-drop tightening term in the first solve; negative
  /// selects 0.1 x the cheapest generator energy price.
  double tightening = -1.0;

  void validate() const;
};

struct PccpRecord {
  int iteration = 0;
  double gap = 0.0;
  double penalty = 0.0;
  double objective = 0.0;
  double slack_sum = 0.0;
};

struct PccpState {
  int r = 0;
  double penalty = 0.0;
  double gap = 0.0;
  std::vector<std::vector<double>> flow_point;      // [pipe][hour]
  std::vector<std::vector<double>> pressure_point;  // [node][hour]
  std::vector<PccpRecord> history;
  bool converged = false;
  bool exhausted = false;

  void write_trace_csv(std::ostream& out) const;
};

/// State after the relaxed first solve.
PccpState pccp_start(const IegsInstance& inst, const PccpParams& params, const GasValues& values,
                     double objective);

/// Moves the linearization point to `values`, records the gap, raises the
/// penalty to min(kappa * rho, rho_max), increments r, and flags convergence
/// or exhaustion.
void pccp_step(PccpState& state, const IegsInstance& inst, const PccpParams& params, const GasValues& values,
               double objective, double slack_sum);

}  // namespace iegs
