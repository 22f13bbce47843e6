#include "iegs/gasnet.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "iegs/error.hpp"

namespace iegs {

namespace {

std::string at(const std::string& id, std::size_t t) { return "[" + id + "," + std::to_string(t) + "]"; }

std::vector<std::vector<int>> grid(std::size_t n, std::size_t T) {
  return std::vector<std::vector<int>>(n, std::vector<int>(T, -1));
}

}  // namespace

GasVars add_gas_vars(OptModel& model, const IegsInstance& inst, bool elastic) {
  const auto& gas = inst.gas;
  const std::size_t T = inst.horizon;
  GasVars v;
  v.pressure = grid(gas.nodes.size(), T);
  v.flow = grid(gas.pipelines.size(), T);
  v.flow_in = grid(gas.pipelines.size(), T);
  v.flow_out = grid(gas.pipelines.size(), T);
  v.linepack = grid(gas.pipelines.size(), T);
  v.comp_flow = grid(gas.compressors.size(), T);
  v.comp_use = grid(gas.compressors.size(), T);
  v.source = grid(gas.sources.size(), T);
  v.gfu = grid(inst.generators.size(), T);
  if (elastic) {
    v.slack_pos = grid(gas.nodes.size(), T);
    v.slack_neg = grid(gas.nodes.size(), T);
  }
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t m = 0; m < gas.nodes.size(); ++m) {
      const auto& n = gas.nodes[m];
      v.pressure[m][t] = model.add_continuous("gas_pi" + at(n.id, t), n.pressure_min, n.pressure_max);
      if (elastic) {
        v.slack_pos[m][t] = model.add_continuous("gas_slack_pos" + at(n.id, t));
        v.slack_neg[m][t] = model.add_continuous("gas_slack_neg" + at(n.id, t));
      }
    }
    for (std::size_t p = 0; p < gas.pipelines.size(); ++p) {
      const auto& id = gas.pipelines[p].id;
      v.flow[p][t] = model.add_continuous("gas_F" + at(id, t));
      v.flow_in[p][t] = model.add_continuous("gas_Fin" + at(id, t));
      v.flow_out[p][t] = model.add_continuous("gas_Fout" + at(id, t));
      v.linepack[p][t] = model.add_continuous("gas_LP" + at(id, t));
    }
    for (std::size_t k = 0; k < gas.compressors.size(); ++k) {
      const auto& c = gas.compressors[k];
      v.comp_flow[k][t] = model.add_continuous("gas_FC" + at(c.id, t), 0.0, c.flow_max);
      v.comp_use[k][t] = model.add_continuous("gas_tau" + at(c.id, t));
    }
    for (std::size_t s = 0; s < gas.sources.size(); ++s) {
      const auto& src = gas.sources[s];
      v.source[s][t] = model.add_continuous("gas_FS" + at(src.id, t), src.output_min, src.output_max);
    }
    for (std::size_t g = 0; g < inst.generators.size(); ++g) {
      if (inst.generators[g].is_gfu()) v.gfu[g][t] = model.add_continuous("gas_FG" + at(inst.generators[g].id, t));
    }
  }
  return v;
}

void build_gas_block(OptModel& model, const IegsInstance& inst, const GasVars& v, std::size_t t,
                     const GasCoupling* coupling) {
  const auto& gas = inst.gas;
  const std::size_t N = gas.nodes.size();
  std::vector<LinExpr> balance(N);  // supply - withdrawal = 0
  std::vector<double> demand(N, 0.0);

  for (std::size_t s = 0; s < gas.sources.size(); ++s) {
    balance[gas.node_index(gas.sources[s].node)].add(v.source[s][t]);
  }
  for (const auto& d : gas.loads) demand[gas.node_index(d.node)] += series_at(d.demand, t, "gas load '" + d.id + "'");
  for (std::size_t g = 0; g < inst.generators.size(); ++g) {
    const auto& gen = inst.generators[g];
    if (!gen.is_gfu()) continue;
    balance[gas.node_index(*gen.gas_node)].add(v.gfu[g][t], -1.0);
    if (coupling != nullptr) {
      model.add_row(LinExpr::var(v.gfu[g][t])
                        .add(coupling->power.at(g), -gen.gas_rate)
                        .add(coupling->reserve.at(g), -gen.gas_rate),
                    Sense::Equal, 0.0, "gas_coupling" + at(gen.id, t));
    }
  }

  for (std::size_t p = 0; p < gas.pipelines.size(); ++p) {
    const auto& pipe = gas.pipelines[p];
    if (!pipe.initial_linepack) throw ValidationError("pipeline '" + pipe.id + "': missing initial linepack");
    const std::size_t m = gas.node_index(pipe.from);
    const std::size_t n = gas.node_index(pipe.to);
    balance[m].add(v.flow_in[p][t], -1.0);
    balance[n].add(v.flow_out[p][t], 1.0);
    model.add_row(LinExpr::var(v.flow[p][t], 2.0).add(v.flow_in[p][t], -1.0).add(v.flow_out[p][t], -1.0),
                  Sense::Equal, 0.0, "gas_avgflow" + at(pipe.id, t));
    model.add_row(LinExpr::var(v.linepack[p][t])
                      .add(v.pressure[m][t], -0.5 * pipe.linepack)
                      .add(v.pressure[n][t], -0.5 * pipe.linepack),
                  Sense::Equal, 0.0, "gas_lpdef" + at(pipe.id, t));
    LinExpr dyn = LinExpr::var(v.flow_in[p][t]).add(v.flow_out[p][t], -1.0).add(v.linepack[p][t], -1.0);
    double rhs = 0.0;
    if (t == 0) {
      rhs = -*pipe.initial_linepack;
    } else {
      dyn.add(v.linepack[p][t - 1]);
    }
    model.add_row(dyn, Sense::Equal, rhs, "gas_lpdyn" + at(pipe.id, t));
  }

  for (std::size_t k = 0; k < gas.compressors.size(); ++k) {
    const auto& c = gas.compressors[k];
    if (c.inlet == c.outlet) throw ValidationError("compressor '" + c.id + "': identical inlet and outlet node");
    const std::size_t in = gas.node_index(c.inlet);
    const std::size_t out = gas.node_index(c.outlet);
    balance[in].add(v.comp_flow[k][t], -1.0).add(v.comp_use[k][t], -1.0);
    balance[out].add(v.comp_flow[k][t], 1.0);
    model.add_row(LinExpr::var(v.comp_use[k][t]).add(v.comp_flow[k][t], -c.consumption), Sense::Equal, 0.0,
                  "gas_comp_use" + at(c.id, t));
    model.add_row(LinExpr::var(v.pressure[out][t]).add(v.pressure[in][t], -c.ratio_min), Sense::GreaterEqual, 0.0,
                  "gas_comp_ratio_lo" + at(c.id, t));
    model.add_row(LinExpr::var(v.pressure[out][t]).add(v.pressure[in][t], -c.ratio_max), Sense::LessEqual, 0.0,
                  "gas_comp_ratio_hi" + at(c.id, t));
  }

  for (std::size_t m = 0; m < N; ++m) {
    if (v.elastic()) balance[m].add(v.slack_pos[m][t]).add(v.slack_neg[m][t], -1.0);
    model.add_row(balance[m], Sense::Equal, demand[m], "gas_balance" + at(gas.nodes[m].id, t));
  }

  if (t + 1 == inst.horizon && !gas.pipelines.empty()) {
    LinExpr final_lp;
    double initial = 0.0;
    for (std::size_t p = 0; p < gas.pipelines.size(); ++p) {
      final_lp.add(v.linepack[p][t]);
      initial += *gas.pipelines[p].initial_linepack;
    }
    model.add_row(final_lp, Sense::GreaterEqual, initial, "gas_lpfinal");
  }
}

int build_weymouth_soc(OptModel& model, const IegsInstance& inst, const GasVars& v, std::size_t p, std::size_t t) {
  const auto& pipe = inst.gas.pipelines.at(p);
  const std::size_t m = inst.gas.node_index(pipe.from);
  const std::size_t n = inst.gas.node_index(pipe.to);
  return model.add_soc({LinExpr::var(v.flow[p][t], 1.0 / pipe.weymouth), LinExpr::var(v.pressure[n][t])},
                       LinExpr::var(v.pressure[m][t]), "gas_weymouth_soc" + at(pipe.id, t));
}

double weymouth_tangent(double C, double Fr, double pr, double F, double pn) {
  return (2.0 * Fr * F - Fr * Fr) / (C * C) + 2.0 * pr * pn - pr * pr;
}

int build_weymouth_concave_linearized(OptModel& model, const IegsInstance& inst, const GasVars& v, std::size_t p,
                                      std::size_t t, double Fr, double pr, int slack) {
  if (!std::isfinite(Fr) || !std::isfinite(pr)) throw NumericError("non-finite linearization point");
  const auto& pipe = inst.gas.pipelines.at(p);
  const std::size_t m = inst.gas.node_index(pipe.from);
  const std::size_t n = inst.gas.node_index(pipe.to);
  const double C2 = pipe.weymouth * pipe.weymouth;
  LinExpr q = LinExpr::var(v.flow[p][t], 2.0 * Fr / C2).add(v.pressure[n][t], 2.0 * pr).add(slack);
  q.constant = -Fr * Fr / C2 - pr * pr;
  // pi_m^2 <= q  <=>  ||(pi_m, (1 - q) / 2)|| <= (1 + q) / 2
  LinExpr half_minus = 0.5 * (LinExpr(1.0) - q);
  LinExpr half_plus = 0.5 * (LinExpr(1.0) + q);
  return model.add_soc({LinExpr::var(v.pressure[m][t]), half_minus}, half_plus, "gas_weymouth_cc" + at(pipe.id, t));
}

GasValues extract_gas_values(const GasVars& v, const std::vector<double>& x) {
  GasValues out;
  auto read = [&](const std::vector<std::vector<int>>& ids) {
    std::vector<std::vector<double>> vals(ids.size());
    for (std::size_t e = 0; e < ids.size(); ++e) {
      for (int id : ids[e]) vals[e].push_back(x.at(static_cast<std::size_t>(id)));
    }
    return vals;
  };
  out.pressure = read(v.pressure);
  out.flow = read(v.flow);
  return out;
}

double measure_relaxation_gap(const IegsInstance& inst, const GasValues& values) {
  double gap = 0.0;
  bool any = false;
  for (std::size_t p = 0; p < inst.gas.pipelines.size(); ++p) {
    const auto& pipe = inst.gas.pipelines[p];
    const std::size_t m = inst.gas.node_index(pipe.from);
    const std::size_t n = inst.gas.node_index(pipe.to);
    for (std::size_t t = 0; t < values.flow.at(p).size(); ++t) {
      const double pm = values.pressure[m][t];
      const double pn = values.pressure[n][t];
      const double F = values.flow[p][t];
      if (!(pm != 0.0)) throw NumericError("relaxation gap undefined at zero inlet pressure");
      const double g = (pm * pm - pn * pn - F * F / (pipe.weymouth * pipe.weymouth)) / (pm * pm);
      gap = any ? std::max(gap, g) : g;
      any = true;
    }
  }
  return gap;
}

double weymouth_residual(const IegsInstance& inst, const GasValues& values) {
  double worst = 0.0;
  for (std::size_t p = 0; p < inst.gas.pipelines.size(); ++p) {
    const auto& pipe = inst.gas.pipelines[p];
    const std::size_t m = inst.gas.node_index(pipe.from);
    const std::size_t n = inst.gas.node_index(pipe.to);
    const double C2 = pipe.weymouth * pipe.weymouth;
    for (std::size_t t = 0; t < values.flow.at(p).size(); ++t) {
      const double pm = values.pressure[m][t];
      const double pn = values.pressure[n][t];
      const double F = values.flow[p][t];
      worst = std::max(worst, std::abs(F * F - C2 * (pm * pm - pn * pn)) / (C2 * pm * pm));
    }
  }
  return worst;
}

void PccpParams::validate() const {
  if (!(eps_gap > 0.0)) throw ValidationError("eps_gap must be positive");
  if (!(rho0 > 0.0 && rho0 <= rho_max)) throw ValidationError("penalty must satisfy 0 < rho0 <= rho_max");
  if (!(kappa >= 1.0)) throw ValidationError("penalty growth factor kappa must be >= 1");
  if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
}

void PccpState::write_trace_csv(std::ostream& out) const {
  out << "r,M_gap,rho,objective,slack_sum\n";
  out.precision(12);
  for (const auto& h : history) {
    out << h.iteration << ',' << h.gap << ',' << h.penalty << ',' << h.objective << ',' << h.slack_sum << '\n';
  }
}

namespace {

void set_point(PccpState& s, const IegsInstance& inst, const GasValues& values) {
  if (values.flow.size() != inst.gas.pipelines.size() || values.pressure.size() != inst.gas.nodes.size()) {
    throw ValidationError("gas values do not match the network");
  }
  s.flow_point = values.flow;
  s.pressure_point = values.pressure;
}

}  // namespace

PccpState pccp_start(const IegsInstance& inst, const PccpParams& params, const GasValues& values, double objective) {
  params.validate();
  PccpState s;
  s.penalty = params.rho0;
  set_point(s, inst, values);
  s.gap = inst.gas.pipelines.empty() ? 0.0 : measure_relaxation_gap(inst, values);
  s.history.push_back({0, s.gap, 0.0, objective, 0.0});
  s.converged = s.gap <= params.eps_gap;
  s.exhausted = !s.converged && params.max_iter <= 0;
  return s;
}

void pccp_step(PccpState& s, const IegsInstance& inst, const PccpParams& params, const GasValues& values,
               double objective, double slack_sum) {
  set_point(s, inst, values);
  s.gap = inst.gas.pipelines.empty() ? 0.0 : measure_relaxation_gap(inst, values);
  s.history.push_back({s.r + 1, s.gap, s.penalty, objective, slack_sum});
  s.penalty = std::min(params.kappa * s.penalty, params.rho_max);
  ++s.r;
  s.converged = s.gap <= params.eps_gap;
  s.exhausted = !s.converged && s.r >= params.max_iter;
}

}  // namespace iegs
