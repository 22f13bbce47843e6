#include "iegs/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "iegs/error.hpp"

namespace iegs {

using nlohmann::json;

namespace {

struct VariantInfo {
  Variant v;
  std::string_view name;
};

constexpr VariantInfo kVariants[] = {
    {Variant::SaaFcuc, "saa"},     {Variant::DrFcucM, "dr-m"},   {Variant::DrFcucU, "dr-u"},
    {Variant::DrFcucMI, "dr-m-i"}, {Variant::DrFcucUI, "dr-u-i"}, {Variant::NoFc, "no-fc"},
    {Variant::NoNgs, "no-ngs"},    {Variant::NoVi, "no-vi"},
};

std::string at(const std::string& id, std::size_t t) { return "[" + id + "," + std::to_string(t) + "]"; }

std::vector<std::vector<int>> grid(std::size_t n, std::size_t T) {
  return std::vector<std::vector<int>>(n, std::vector<int>(T, -1));
}

}  // namespace

std::string_view variant_name(Variant v) {
  for (const auto& info : kVariants) {
    if (info.v == v) return info.name;
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (const auto& info : kVariants) {
    if (info.name == name) return info.v;
  }
  throw ValidationError("unknown variant '" + std::string(name) +
                        "' (expected saa, dr-m, dr-u, dr-m-i, dr-u-i, no-fc, no-ngs, no-vi)");
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> all = [] {
    std::vector<Variant> v;
    for (const auto& info : kVariants) v.push_back(info.v);
    return v;
  }();
  return all;
}

ResolvedVariant resolve_variant(const IegsInstance& inst, const VariantConfig& config) {
  const auto& u = inst.uncertainty;
  ResolvedVariant r{};
  r.variant = config.variant;
  r.epsilon = config.epsilon.value_or(u.epsilon);
  r.epsilon_individual = config.epsilon_individual.value_or(u.epsilon_individual.value_or(r.epsilon));
  r.sample_size = config.sample_size != 0 ? config.sample_size : u.moment_samples;
  r.frequency = config.variant != Variant::NoFc;
  r.gas = config.variant != Variant::NoNgs;
  r.vi = config.variant != Variant::NoVi;

  if (!(r.epsilon > 0.0 && r.epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
  if (!(r.epsilon_individual > 0.0 && r.epsilon_individual < 1.0)) {
    throw ValidationError("individual epsilon must lie in (0, 1)");
  }
  const std::string hypothesis = " (the unimodal reformulation rests on the one-sided Vysochanskij-Petunin "
                                 "bound, valid only for epsilon <= 1/6)";
  if (config.variant == Variant::DrFcucU && r.epsilon > 1.0 / 6.0 + 1e-15) {
    throw ValidationError("variant dr-u requires epsilon <= 1/6, got " + std::to_string(r.epsilon) + hypothesis);
  }
  if (config.variant == Variant::DrFcucUI && r.epsilon_individual > 1.0 / 6.0 + 1e-15) {
    throw ValidationError("variant dr-u-i requires epsilon <= 1/6, got " + std::to_string(r.epsilon_individual) +
                          hypothesis);
  }
  if (config.variant == Variant::SaaFcuc) {
    if (r.sample_size < 1) throw ValidationError("SAA needs at least one scenario");
  } else if (!u.has_moments() && !inst.wind_farms.empty() && r.sample_size < 2) {
    throw ValidationError("moment estimation needs a sample size of at least 2");
  }
  return r;
}

FreqVars UcVars::freq(std::size_t t) const {
  FreqVars f;
  for (const auto& v : x) f.x.push_back(v[t]);
  for (const auto& v : rg) f.rg.push_back(v[t]);
  for (const auto& v : y) f.y.push_back(v[t]);
  for (const auto& v : rw) f.rw.push_back(v[t]);
  return f;
}

WindVars UcVars::wind(std::size_t t) const {
  WindVars w;
  for (const auto& v : pw) w.pw.push_back(v[t]);
  for (const auto& v : rw) w.rw.push_back(v[t]);
  return w;
}

GasCoupling UcVars::coupling(std::size_t t) const {
  GasCoupling c;
  for (const auto& v : p) c.power.push_back(v[t]);
  for (const auto& v : rg) c.reserve.push_back(v[t]);
  return c;
}

UcVars add_uc_vars(OptModel& model, const IegsInstance& inst, bool allow_vi) {
  const std::size_t T = inst.horizon;
  const std::size_t G = inst.generators.size();
  const std::size_t W = inst.wind_farms.size();
  UcVars v;
  v.x = grid(G, T);
  v.zu = grid(G, T);
  v.zd = grid(G, T);
  v.p = grid(G, T);
  v.rg = grid(G, T);
  v.y = grid(W, T);
  v.pw = grid(W, T);
  v.rw = grid(W, T);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < G; ++i) {
      const auto& g = inst.generators[i];
      v.x[i][t] = model.add_binary("x" + at(g.id, t));
      v.zu[i][t] = model.add_binary("zu" + at(g.id, t));
      v.zd[i][t] = model.add_binary("zd" + at(g.id, t));
      v.p[i][t] = model.add_continuous("P" + at(g.id, t), 0.0, g.p_max);
      v.rg[i][t] = model.add_continuous("RG" + at(g.id, t), 0.0, g.reserve_max);
    }
    for (std::size_t w = 0; w < W; ++w) {
      const auto& wf = inst.wind_farms[w];
      v.y[w][t] = model.add_var("y" + at(wf.id, t), VarKind::Binary, 0.0, allow_vi ? 1.0 : 0.0);
      v.pw[w][t] = model.add_continuous("PW" + at(wf.id, t), 0.0, wf.capacity);
      v.rw[w][t] = model.add_continuous("RW" + at(wf.id, t), 0.0, allow_vi ? wf.reserve_max : 0.0);
    }
  }
  return v;
}

void build_uc_core(OptModel& model, const IegsInstance& inst, const UcVars& v,
                   std::vector<std::vector<int>>* line_slack) {
  const std::size_t T = inst.horizon;
  const auto& net = inst.power;
  const std::size_t L = net.lines.size();
  if (line_slack != nullptr) *line_slack = grid(L, T);

  for (std::size_t i = 0; i < inst.generators.size(); ++i) {
    const auto& g = inst.generators[i];
    const double x0 = g.initial.on ? 1.0 : 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      LinExpr logic = LinExpr::var(v.zu[i][t]).add(v.zd[i][t], -1.0).add(v.x[i][t], -1.0);
      double rhs = 0.0;
      if (t == 0) {
        rhs = -x0;
      } else {
        logic.add(v.x[i][t - 1]);
      }
      model.add_row(logic, Sense::Equal, rhs, "uc_logic" + at(g.id, t));

      LinExpr up = LinExpr::var(v.x[i][t], -1.0);
      const std::size_t up_from = t + 1 >= static_cast<std::size_t>(g.min_up) ? t + 1 - g.min_up : 0;
      for (std::size_t k = up_from; k <= t; ++k) up.add(v.zu[i][k]);
      model.add_row(up, Sense::LessEqual, 0.0, "uc_minup" + at(g.id, t));

      LinExpr down = LinExpr::var(v.x[i][t]);
      const std::size_t down_from = t + 1 >= static_cast<std::size_t>(g.min_down) ? t + 1 - g.min_down : 0;
      for (std::size_t k = down_from; k <= t; ++k) down.add(v.zd[i][k]);
      model.add_row(down, Sense::LessEqual, 1.0, "uc_mindown" + at(g.id, t));

      model.add_row(LinExpr::var(v.p[i][t]).add(v.x[i][t], -g.p_min), Sense::GreaterEqual, 0.0,
                    "uc_pmin" + at(g.id, t));
      model.add_row(LinExpr::var(v.p[i][t]).add(v.rg[i][t]).add(v.x[i][t], -g.p_max), Sense::LessEqual, 0.0,
                    "uc_pmax" + at(g.id, t));
      model.add_row(LinExpr::var(v.rg[i][t]).add(v.x[i][t], -g.reserve_max), Sense::LessEqual, 0.0,
                    "uc_pfr" + at(g.id, t));

      LinExpr ramp = LinExpr::var(v.p[i][t]).add(v.rg[i][t]);
      if (t == 0) {
        ramp.constant = -(g.initial.power + g.initial.reserve);
      } else {
        ramp.add(v.p[i][t - 1], -1.0).add(v.rg[i][t - 1], -1.0);
      }
      model.add_row(ramp, Sense::LessEqual, g.ramp_up, "uc_rampup" + at(g.id, t));
      model.add_row(ramp, Sense::GreaterEqual, -g.ramp_down, "uc_rampdown" + at(g.id, t));
    }
  }

  for (std::size_t w = 0; w < inst.wind_farms.size(); ++w) {
    const auto& wf = inst.wind_farms[w];
    for (std::size_t t = 0; t < T; ++t) {
      model.add_row(LinExpr::var(v.rw[w][t]).add(v.y[w][t], -wf.reserve_max), Sense::LessEqual, 0.0,
                    "wind_pfr" + at(wf.id, t));
      model.add_row(LinExpr::var(v.pw[w][t]).add(v.rw[w][t]), Sense::LessEqual, wf.capacity,
                    "wind_cap" + at(wf.id, t));
    }
  }

  for (std::size_t t = 0; t < T; ++t) {
    std::vector<LinExpr> injection(net.buses.size());
    for (std::size_t i = 0; i < inst.generators.size(); ++i) {
      injection[net.bus_index(inst.generators[i].bus)].add(v.p[i][t]);
    }
    for (std::size_t w = 0; w < inst.wind_farms.size(); ++w) {
      injection[net.bus_index(inst.wind_farms[w].bus)].add(v.pw[w][t]);
    }
    for (const auto& d : net.loads) {
      injection[net.bus_index(d.bus)].constant -= series_at(d.demand, t, "load '" + d.id + "'");
    }
    for (std::size_t l = 0; l < L; ++l) {
      LinExpr flow;
      for (std::size_t b = 0; b < net.buses.size(); ++b) {
        const double psi = net.shift_factors(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(b));
        if (psi != 0.0) flow += psi * injection[b];
      }
      const auto& line = net.lines[l];
      if (line_slack != nullptr) {
        const int s = model.add_continuous("line_slack" + at(line.id, t));
        (*line_slack)[l][t] = s;
        model.add_row(flow - LinExpr::var(s), Sense::LessEqual, line.capacity, "line_max" + at(line.id, t));
        model.add_row(flow + LinExpr::var(s), Sense::GreaterEqual, -line.capacity, "line_min" + at(line.id, t));
      } else {
        model.add_row(flow, Sense::LessEqual, line.capacity, "line_max" + at(line.id, t));
        model.add_row(flow, Sense::GreaterEqual, -line.capacity, "line_min" + at(line.id, t));
      }
    }
    LinExpr balance;
    for (const auto& col : v.p) balance.add(col[t]);
    for (const auto& col : v.pw) balance.add(col[t]);
    model.add_row(balance, Sense::Equal, net.total_load(t), "power_balance[" + std::to_string(t) + "]");
  }
}

LinExpr build_objective(const IegsInstance& inst, const UcVars& v) {
  LinExpr obj;
  for (std::size_t t = 0; t < inst.horizon; ++t) {
    for (std::size_t i = 0; i < inst.generators.size(); ++i) {
      const auto& g = inst.generators[i];
      obj.add(v.zu[i][t], g.cost_startup)
          .add(v.zd[i][t], g.cost_shutdown)
          .add(v.x[i][t], g.cost_no_load)
          .add(v.p[i][t], g.cost_energy)
          .add(v.rg[i][t], g.cost_pfr);
    }
    for (std::size_t w = 0; w < inst.wind_farms.size(); ++w) {
      const auto& wf = inst.wind_farms[w];
      obj.add(v.y[w][t], wf.cost_vi).add(v.rw[w][t], wf.cost_pfr);
    }
  }
  return obj;
}

std::vector<double> kappa_schedule(const IegsInstance& inst) {
  const auto& f = inst.frequency;
  std::vector<double> kappa(inst.horizon, 0.0);
  for (std::size_t t = 0; t < inst.horizon; ++t) {
    const double dP = std::abs(series_at(f.loss, t, "dP_loss"));
    const double load = inst.load_level(t);
    if (dP <= f.damping * load * f.deadband) continue;
    kappa[t] = solve_kappa(f, dP, load);
  }
  return kappa;
}

Assembly assemble(const IegsInstance& inst, const VariantConfig& config, const ScenarioSet& in_sample,
                  const AssembleOptions& opt) {
  Assembly a;
  a.variant = resolve_variant(inst, config);
  const auto& rv = a.variant;
  const std::size_t T = inst.horizon;
  OptModel& m = a.model;

  a.uc = add_uc_vars(m, inst, rv.vi);
  build_uc_core(m, inst, a.uc, opt.elastic ? &a.line_slack : nullptr);
  LinExpr objective = build_objective(inst, a.uc);

  if (rv.frequency) {
    a.kappa = kappa_schedule(inst);
    const double big_m = frequency_big_m(inst);
    for (std::size_t t = 0; t < T; ++t) build_frequency_block(m, inst, t, a.uc.freq(t), a.kappa[t], big_m);
  } else {
    a.kappa.assign(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      LinExpr reserve;
      for (const auto& col : a.uc.rg) reserve.add(col[t]);
      for (const auto& col : a.uc.rw) reserve.add(col[t]);
      m.add_row(reserve, Sense::GreaterEqual, std::abs(inst.frequency.loss[t]),
                "reserve_capacity[" + std::to_string(t) + "]");
    }
  }

  const std::size_t W = inst.wind_farms.size();
  if (rv.variant == Variant::SaaFcuc) {
    if (in_sample.samples < rv.sample_size) {
      throw ValidationError("SAA sample size " + std::to_string(rv.sample_size) + " exceeds the " +
                            std::to_string(in_sample.samples) + " in-sample scenarios");
    }
    a.ambiguity.epsilon = rv.epsilon;
    if (W > 0) {
      const ScenarioSet scen = in_sample.head(rv.sample_size);
      std::vector<double> capacity;
      for (const auto& wf : inst.wind_farms) capacity.push_back(wf.capacity);
      for (std::size_t t = 0; t < T; ++t) {
        const auto block = build_saa_block(m, scen, capacity, a.uc.wind(t), rv.epsilon, t);
        if (!block.warning.empty() && t == 0) a.warnings.push_back(block.warning);
      }
    }
  } else {
    a.ambiguity = ambiguity_for(inst, in_sample, rv.sample_size);
    a.ambiguity.epsilon = rv.epsilon;
    const bool unimodal = rv.variant == Variant::DrFcucU || rv.variant == Variant::DrFcucUI;
    a.ambiguity.unimodal = unimodal;
    for (std::size_t t = 0; t < T; ++t) {
      switch (rv.variant) {
        case Variant::DrFcucU: build_unimodal_soc_block(m, a.ambiguity, a.uc.wind(t), t); break;
        case Variant::DrFcucMI:
        case Variant::DrFcucUI:
          build_individual_block(m, a.ambiguity, a.uc.wind(t), rv.epsilon_individual, unimodal, t);
          break;
        default: build_moment_soc_block(m, a.ambiguity, a.uc.wind(t), t); break;
      }
    }
  }

  if (rv.gas) {
    a.gas = add_gas_vars(m, inst, opt.elastic);
    const auto& gv = *a.gas;
    const auto& gas = inst.gas;
    for (std::size_t t = 0; t < T; ++t) {
      const GasCoupling coupling = a.uc.coupling(t);
      build_gas_block(m, inst, gv, t, &coupling);
      for (std::size_t p = 0; p < gas.pipelines.size(); ++p) build_weymouth_soc(m, inst, gv, p, t);
    }
    if (opt.pccp != nullptr) {
      a.weymouth_slack = grid(gas.pipelines.size(), T);
      for (std::size_t p = 0; p < gas.pipelines.size(); ++p) {
        const std::size_t n = gas.node_index(gas.pipelines[p].to);
        for (std::size_t t = 0; t < T; ++t) {
          const int s = m.add_continuous("gas_s" + at(gas.pipelines[p].id, t));
          a.weymouth_slack[p][t] = s;
          build_weymouth_concave_linearized(m, inst, gv, p, t, opt.pccp->flow_point.at(p).at(t),
                                            opt.pccp->pressure_point.at(n).at(t), s);
          objective.add(s, opt.pccp->penalty);
        }
      }
    } else if (opt.tightening > 0.0) {
      for (std::size_t p = 0; p < gas.pipelines.size(); ++p) {
        const std::size_t from = gas.node_index(gas.pipelines[p].from);
        const std::size_t to = gas.node_index(gas.pipelines[p].to);
        for (std::size_t t = 0; t < T; ++t) {
          objective.add(gv.pressure[from][t], opt.tightening).add(gv.pressure[to][t], -opt.tightening);
        }
      }
    }
    if (opt.elastic) {
      for (std::size_t n = 0; n < gas.nodes.size(); ++n) {
        for (std::size_t t = 0; t < T; ++t) {
          objective.add(gv.slack_pos[n][t], opt.elastic_penalty).add(gv.slack_neg[n][t], opt.elastic_penalty);
        }
      }
    }
  }
  if (opt.elastic) {
    for (const auto& row : a.line_slack) {
      for (int s : row) objective.add(s, opt.elastic_penalty);
    }
  }
  m.set_objective(std::move(objective));
  return a;
}

CostBreakdown compute_costs(const IegsInstance& inst, const ScheduleSolution& sol) {
  CostBreakdown c;
  for (std::size_t i = 0; i < inst.generators.size(); ++i) {
    const auto& g = inst.generators[i];
    for (std::size_t t = 0; t < inst.horizon; ++t) {
      c.startup += g.cost_startup * sol.zu[i][t];
      c.shutdown += g.cost_shutdown * sol.zd[i][t];
      c.no_load += g.cost_no_load * sol.x[i][t];
      c.generation += g.cost_energy * sol.p[i][t];
      c.pfr_generators += g.cost_pfr * sol.rg[i][t];
    }
  }
  for (std::size_t w = 0; w < inst.wind_farms.size(); ++w) {
    const auto& wf = inst.wind_farms[w];
    for (std::size_t t = 0; t < inst.horizon; ++t) {
      c.virtual_inertia += wf.cost_vi * sol.y[w][t];
      c.pfr_wind += wf.cost_pfr * sol.rw[w][t];
    }
  }
  c.total = c.startup + c.shutdown + c.no_load + c.generation + c.pfr_generators + c.virtual_inertia + c.pfr_wind;
  return c;
}

namespace {

using Clock = std::chrono::steady_clock;

std::vector<std::vector<double>> read(const std::vector<std::vector<int>>& ids, const std::vector<double>& x,
                                      bool binary = false) {
  std::vector<std::vector<double>> out(ids.size());
  for (std::size_t e = 0; e < ids.size(); ++e) {
    for (int id : ids[e]) {
      double v = id >= 0 ? x.at(static_cast<std::size_t>(id)) : 0.0;
      if (binary) v = std::round(v);
      out[e].push_back(v);
    }
  }
  return out;
}

void extract(const IegsInstance& inst, const Assembly& a, const std::vector<double>& x, ScheduleSolution& sol) {
  sol.x = read(a.uc.x, x, true);
  sol.zu = read(a.uc.zu, x, true);
  sol.zd = read(a.uc.zd, x, true);
  sol.p = read(a.uc.p, x);
  sol.rg = read(a.uc.rg, x);
  sol.y = read(a.uc.y, x, true);
  sol.pw = read(a.uc.pw, x);
  sol.rw = read(a.uc.rw, x);
  if (a.gas) {
    const auto& g = *a.gas;
    GasState s;
    s.pressure = read(g.pressure, x);
    s.flow = read(g.flow, x);
    s.flow_in = read(g.flow_in, x);
    s.flow_out = read(g.flow_out, x);
    s.linepack = read(g.linepack, x);
    s.comp_flow = read(g.comp_flow, x);
    s.comp_use = read(g.comp_use, x);
    s.source = read(g.source, x);
    s.gfu = read(g.gfu, x);
    sol.gas = std::move(s);
  } else {
    sol.gas.reset();
  }
  sol.cost = compute_costs(inst, sol);
}

double slack_sum(const Assembly& a, const std::vector<double>& x) {
  double s = 0.0;
  for (const auto& row : a.weymouth_slack) {
    for (int id : row) s += x.at(static_cast<std::size_t>(id));
  }
  return s;
}

// Re-solves with elastic gas balances and line limits to attribute an
// infeasible first problem to a subsystem.
std::string diagnose_infeasibility(const IegsInstance& inst, const VariantConfig& config,
                                   const ScenarioSet& in_sample, const SolverOptions& options, MilpBackend* backend) {
  AssembleOptions opt;
  opt.elastic = true;
  const Assembly a = assemble(inst, config, in_sample, opt);
  const SolveResult res = solve_misocp(a.model, options, backend);
  if (!res.has_solution()) {
    return "infeasible even with elastic gas balances and line limits; the conflict lies in unit limits, "
           "frequency requirements or the wind uncertainty rows";
  }
  std::set<std::string> gas_nodes;
  std::set<std::string> lines;
  const double tol = 1e-6;
  if (a.gas) {
    for (std::size_t n = 0; n < inst.gas.nodes.size(); ++n) {
      for (std::size_t t = 0; t < inst.horizon; ++t) {
        const double s = res.values[static_cast<std::size_t>(a.gas->slack_pos[n][t])] +
                         res.values[static_cast<std::size_t>(a.gas->slack_neg[n][t])];
        if (s > tol) gas_nodes.insert(inst.gas.nodes[n].id);
      }
    }
  }
  for (std::size_t l = 0; l < a.line_slack.size(); ++l) {
    for (int id : a.line_slack[l]) {
      if (res.values[static_cast<std::size_t>(id)] > tol) lines.insert(inst.power.lines[l].id);
    }
  }
  std::ostringstream msg;
  msg << "infeasible; elastic re-solve attributes it to";
  if (gas_nodes.empty() && lines.empty()) {
    msg << " no gas balance or line limit (numerical or solver tolerance issue)";
  }
  if (!gas_nodes.empty()) {
    msg << " gas balance at nodes";
    for (const auto& n : gas_nodes) msg << ' ' << n;
  }
  if (!lines.empty()) {
    msg << (gas_nodes.empty() ? "" : ";") << " transmission limits on lines";
    for (const auto& l : lines) msg << ' ' << l;
  }
  return msg.str();
}

}  // namespace

ScheduleSolution run_algorithm1(const IegsInstance& inst, const VariantConfig& config, const ScenarioSet& in_sample,
                                const PccpParams& params, const SolverOptions& options) {
  const auto start = Clock::now();
  params.validate();
  auto backend = make_backend();

  ScheduleSolution sol;
  sol.instance = inst.name;
  sol.variant = resolve_variant(inst, config);
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  double tightening = params.tightening;
  if (tightening < 0.0) {
    double cheapest = kInf;
    for (const auto& g : inst.generators) cheapest = std::min(cheapest, g.cost_energy);
    tightening = std::isfinite(cheapest) ? 0.1 * cheapest : 0.0;
  }

  AssembleOptions first;
  first.tightening = tightening;
  Assembly current = assemble(inst, config, in_sample, first);
  sol.kappa = current.kappa;
  sol.warnings = current.warnings;
  SolveResult res = solve_misocp(current.model, options, backend.get());
  sol.iterations = 1;
  sol.cuts = res.cuts;

  if (!res.has_solution()) {
    if (res.status == SolveStatus::Infeasible) {
      sol.status = SolveStatus::Infeasible;
      sol.exit_condition = "infeasible";
      sol.message = diagnose_infeasibility(inst, config, in_sample, options, backend.get());
    } else {
      sol.status = SolveStatus::Limit;
      sol.exit_condition = "solver-limit";
      sol.message = res.message;
    }
    sol.wall_time = elapsed();
    return sol;
  }

  extract(inst, current, res.values, sol);
  SolveStatus status = res.status;
  double gap = res.mip_gap;

  if (current.gas && !inst.gas.pipelines.empty()) {
    PccpState state = pccp_start(inst, params, extract_gas_values(*current.gas, res.values), sol.cost.total);
    while (!state.converged && !state.exhausted) {
      AssembleOptions second;
      second.pccp = &state;
      Assembly next = assemble(inst, config, in_sample, second);
      SolveResult r2 = solve_misocp(next.model, options, backend.get());
      ++sol.iterations;
      sol.cuts += r2.cuts;
      if (!r2.has_solution()) {
        sol.status = r2.status == SolveStatus::Infeasible ? SolveStatus::Infeasible : SolveStatus::Limit;
        sol.exit_condition = "solver-limit";
        sol.message = "penalized subproblem failed at iteration " + std::to_string(state.r + 1) + ": " + r2.message;
        sol.pccp = state;
        sol.wall_time = elapsed();
        return sol;
      }
      extract(inst, next, r2.values, sol);
      pccp_step(state, inst, params, extract_gas_values(*next.gas, r2.values), sol.cost.total,
                slack_sum(next, r2.values));
      status = r2.status == SolveStatus::Optimal && status == SolveStatus::Optimal ? SolveStatus::Optimal
                                                                                    : SolveStatus::Feasible;
      gap = r2.mip_gap;
      current = std::move(next);
    }
    sol.pccp = state;
    if (state.converged) {
      sol.status = status;
      sol.exit_condition = "converged";
    } else {
      sol.status = SolveStatus::Limit;
      sol.exit_condition = "exhausted";
      sol.message = "iteration limit reached with relaxation gap " + std::to_string(state.gap);
    }
  } else {
    sol.pccp.history.push_back({0, 0.0, 0.0, sol.cost.total, 0.0});
    sol.pccp.converged = true;
    sol.status = status;
    sol.exit_condition = "converged";
  }
  sol.mip_gap = gap;
  sol.wall_time = elapsed();
  return sol;
}

ScheduleSolution run_algorithm1(const IegsInstance& inst, const VariantConfig& config, const PccpParams& params,
                                const SolverOptions& options) {
  const ScenarioSplit split = generate_split(inst);
  return run_algorithm1(inst, config, split.in_sample, params, options);
}

namespace {

json matrix_json(const std::vector<std::vector<double>>& m) { return m; }

std::vector<std::vector<double>> matrix_from(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("solution: missing '") + key + "'");
  return j.at(key).get<std::vector<std::vector<double>>>();
}

SolveStatus status_from(const std::string& s) {
  if (s == "optimal") return SolveStatus::Optimal;
  if (s == "feasible") return SolveStatus::Feasible;
  if (s == "infeasible") return SolveStatus::Infeasible;
  if (s == "limit") return SolveStatus::Limit;
  throw ParseError("solution: unknown status '" + s + "'");
}

}  // namespace

std::string solution_to_json(const ScheduleSolution& sol) {
  json j;
  j["instance"] = sol.instance;
  const auto& rv = sol.variant;
  j["variant"] = {{"name", std::string(variant_name(rv.variant))},
                  {"epsilon", rv.epsilon},
                  {"epsilon_individual", rv.epsilon_individual},
                  {"sample_size", rv.sample_size},
                  {"frequency_constraints", rv.frequency},
                  {"gas_network", rv.gas},
                  {"virtual_inertia", rv.vi}};
  j["status"] = std::string(to_string(sol.status));
  j["exit_condition"] = sol.exit_condition;
  j["message"] = sol.message;
  j["commitment"] = {{"x", matrix_json(sol.x)}, {"zu", matrix_json(sol.zu)}, {"zd", matrix_json(sol.zd)},
                     {"y", matrix_json(sol.y)}};
  j["dispatch"] = {{"P", matrix_json(sol.p)}, {"RG", matrix_json(sol.rg)}, {"PW", matrix_json(sol.pw)},
                   {"RW", matrix_json(sol.rw)}};
  if (sol.gas) {
    const auto& g = *sol.gas;
    j["gas"] = {{"pressure", g.pressure}, {"flow", g.flow},         {"flow_in", g.flow_in},
                {"flow_out", g.flow_out}, {"linepack", g.linepack}, {"compressor_flow", g.comp_flow},
                {"compressor_use", g.comp_use}, {"source", g.source}, {"gfu_consumption", g.gfu}};
  } else {
    j["gas"] = nullptr;
  }
  const auto& c = sol.cost;
  j["cost"] = {{"total", c.total},
               {"startup", c.startup},
               {"shutdown", c.shutdown},
               {"no_load", c.no_load},
               {"generation", c.generation},
               {"pfr_generators", c.pfr_generators},
               {"virtual_inertia", c.virtual_inertia},
               {"pfr_wind", c.pfr_wind}};
  j["kappa"] = sol.kappa;
  json trace = json::array();
  for (const auto& h : sol.pccp.history) {
    trace.push_back({{"r", h.iteration},
                     {"M_gap", h.gap},
                     {"rho", h.penalty},
                     {"objective", h.objective},
                     {"slack_sum", h.slack_sum}});
  }
  j["pccp"] = {{"trace", trace}, {"converged", sol.pccp.converged}, {"exhausted", sol.pccp.exhausted}};
  j["solver"] = {{"iterations", sol.iterations},
                 {"mip_gap", sol.mip_gap},
                 {"cuts", sol.cuts},
                 {"wall_time_s", sol.wall_time}};
  j["warnings"] = sol.warnings;
  return j.dump(2);
}

ScheduleSolution solution_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed solution document: ") + e.what());
  }
  try {
    ScheduleSolution sol;
    sol.instance = j.value("instance", "");
    const auto& v = j.at("variant");
    sol.variant.variant = parse_variant(v.at("name").get<std::string>());
    sol.variant.epsilon = v.at("epsilon").get<double>();
    sol.variant.epsilon_individual = v.at("epsilon_individual").get<double>();
    sol.variant.sample_size = v.at("sample_size").get<std::size_t>();
    sol.variant.frequency = v.at("frequency_constraints").get<bool>();
    sol.variant.gas = v.at("gas_network").get<bool>();
    sol.variant.vi = v.at("virtual_inertia").get<bool>();
    sol.status = status_from(j.at("status").get<std::string>());
    sol.exit_condition = j.value("exit_condition", "");
    sol.message = j.value("message", "");
    const auto& cm = j.at("commitment");
    sol.x = matrix_from(cm, "x");
    sol.zu = matrix_from(cm, "zu");
    sol.zd = matrix_from(cm, "zd");
    sol.y = matrix_from(cm, "y");
    const auto& d = j.at("dispatch");
    sol.p = matrix_from(d, "P");
    sol.rg = matrix_from(d, "RG");
    sol.pw = matrix_from(d, "PW");
    sol.rw = matrix_from(d, "RW");
    if (!j.at("gas").is_null()) {
      const auto& g = j.at("gas");
      GasState s;
      s.pressure = matrix_from(g, "pressure");
      s.flow = matrix_from(g, "flow");
      s.flow_in = matrix_from(g, "flow_in");
      s.flow_out = matrix_from(g, "flow_out");
      s.linepack = matrix_from(g, "linepack");
      s.comp_flow = matrix_from(g, "compressor_flow");
      s.comp_use = matrix_from(g, "compressor_use");
      s.source = matrix_from(g, "source");
      s.gfu = matrix_from(g, "gfu_consumption");
      sol.gas = std::move(s);
    }
    const auto& c = j.at("cost");
    sol.cost.total = c.at("total").get<double>();
    sol.cost.startup = c.at("startup").get<double>();
    sol.cost.shutdown = c.at("shutdown").get<double>();
    sol.cost.no_load = c.at("no_load").get<double>();
    sol.cost.generation = c.at("generation").get<double>();
    sol.cost.pfr_generators = c.at("pfr_generators").get<double>();
    sol.cost.virtual_inertia = c.at("virtual_inertia").get<double>();
    sol.cost.pfr_wind = c.at("pfr_wind").get<double>();
    sol.kappa = j.at("kappa").get<std::vector<double>>();
    for (const auto& h : j.at("pccp").at("trace")) {
      sol.pccp.history.push_back({h.at("r").get<int>(), h.at("M_gap").get<double>(), h.at("rho").get<double>(),
                                  h.at("objective").get<double>(), h.at("slack_sum").get<double>()});
    }
    sol.pccp.converged = j.at("pccp").at("converged").get<bool>();
    sol.pccp.exhausted = j.at("pccp").at("exhausted").get<bool>();
    if (!sol.pccp.history.empty()) {
      sol.pccp.gap = sol.pccp.history.back().gap;
      sol.pccp.r = sol.pccp.history.back().iteration;
    }
    const auto& s = j.at("solver");
    sol.iterations = s.at("iterations").get<int>();
    sol.mip_gap = s.at("mip_gap").get<double>();
    sol.cuts = s.at("cuts").get<int>();
    sol.wall_time = s.at("wall_time_s").get<double>();
    sol.warnings = j.value("warnings", std::vector<std::string>{});
    return sol;
  } catch (const json::exception& e) {
    throw ParseError(std::string("solution document: ") + e.what());
  }
}

void save_solution(const ScheduleSolution& sol, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write solution file: " + path.string());
  out << solution_to_json(sol) << '\n';
}

ScheduleSolution load_solution(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("solution not found: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return solution_from_json(buffer.str());
}

}  // namespace iegs
