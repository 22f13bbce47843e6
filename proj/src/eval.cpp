#include "iegs/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "iegs/error.hpp"
#include "iegs/freq.hpp"

namespace iegs {

using nlohmann::json;

namespace {

std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(n, jobs));
}

// Runs body(i) for i in [0, n) on up to `threads` workers.
template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& body) {
  const std::size_t workers = worker_count(threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < workers; ++k) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::vector<std::vector<double>> scheduled_wind(const ScheduleSolution& sol) {
  std::vector<std::vector<double>> s = sol.pw;
  for (std::size_t w = 0; w < s.size(); ++w) {
    for (std::size_t t = 0; t < s[w].size(); ++t) s[w][t] += sol.rw.at(w).at(t);
  }
  return s;
}

void check_out_of_sample(const std::vector<std::vector<double>>& scheduled, const ScenarioSet& out) {
  if (out.provenance != Provenance::OutOfSample) {
    throw ValidationError("EJVP must be measured on out-of-sample scenarios; got an in-sample set");
  }
  if (out.samples == 0) throw ValidationError("EJVP needs a non-empty sample set");
  if (scheduled.size() != out.farms) throw ValidationError("schedule and scenario set disagree on farm count");
  for (const auto& row : scheduled) {
    if (row.size() != out.hours) throw ValidationError("schedule and scenario set disagree on horizon");
  }
}

}  // namespace

double compute_ejvp(const std::vector<std::vector<double>>& scheduled, const ScenarioSet& out, std::size_t threads) {
  check_out_of_sample(scheduled, out);
  const std::size_t chunks = std::min<std::size_t>(out.samples, 64);
  std::vector<std::size_t> counts(chunks, 0);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t begin = out.samples * c / chunks;
    const std::size_t end = out.samples * (c + 1) / chunks;
    for (std::size_t s = begin; s < end; ++s) {
      bool violated = false;
      for (std::size_t w = 0; w < out.farms && !violated; ++w) {
        for (std::size_t t = 0; t < out.hours; ++t) {
          if (scheduled[w][t] > out.at(s, w, t) + kEjvpTolerance) {
            violated = true;
            break;
          }
        }
      }
      if (violated) ++counts[c];
    }
  });
  std::size_t total = 0;
  for (auto c : counts) total += c;
  return 100.0 * static_cast<double>(total) / static_cast<double>(out.samples);
}

double compute_ejvp(const ScheduleSolution& sol, const ScenarioSet& out, std::size_t threads) {
  return compute_ejvp(scheduled_wind(sol), out, threads);
}

std::vector<double> compute_ejvp_per_hour(const ScheduleSolution& sol, const ScenarioSet& out) {
  const auto scheduled = scheduled_wind(sol);
  check_out_of_sample(scheduled, out);
  std::vector<double> pct(out.hours, 0.0);
  for (std::size_t t = 0; t < out.hours; ++t) {
    std::size_t count = 0;
    for (std::size_t s = 0; s < out.samples; ++s) {
      for (std::size_t w = 0; w < out.farms; ++w) {
        if (scheduled[w][t] > out.at(s, w, t) + kEjvpTolerance) {
          ++count;
          break;
        }
      }
    }
    pct[t] = 100.0 * static_cast<double>(count) / static_cast<double>(out.samples);
  }
  return pct;
}

bool FrequencyAudit::all_pass() const { return failing_hours() == 0; }

std::size_t FrequencyAudit::failing_hours() const {
  return static_cast<std::size_t>(std::count_if(hours.begin(), hours.end(), [](const auto& h) { return !h.pass(); }));
}

void FrequencyAudit::write_csv(std::ostream& out) const {
  out << "hour,inertia_MWs_per_Hz,pfr_MW,loss_MW,rocof_Hz_per_s,nadir_Hz,qss_Hz,rocof_ok,nadir_ok,qss_ok\n";
  for (const auto& h : hours) {
    out << h.hour + 1 << ',' << h.inertia << ',' << h.pfr << ',' << h.loss << ',' << h.rocof << ',' << h.nadir << ','
        << h.qss << ',' << h.rocof_ok << ',' << h.nadir_ok << ',' << h.qss_ok << '\n';
  }
}

namespace {

std::vector<double> column(const std::vector<std::vector<double>>& m, std::size_t t) {
  std::vector<double> c;
  c.reserve(m.size());
  for (const auto& row : m) c.push_back(row.at(t));
  return c;
}

}  // namespace

FrequencyAudit audit_frequency(const ScheduleSolution& sol, const IegsInstance& inst, double tol) {
  if (sol.x.size() != inst.generators.size()) throw ValidationError("solution carries no schedule to audit");
  const auto& f = inst.frequency;
  FrequencyAudit audit;
  for (std::size_t t = 0; t < inst.horizon; ++t) {
    const FrequencySnapshot snap =
        make_snapshot(inst, t, column(sol.x, t), column(sol.y, t), column(sol.rg, t), column(sol.rw, t));
    HourFrequency h;
    h.hour = t;
    h.inertia = snap.inertia;
    h.pfr = snap.total_pfr();
    h.loss = snap.loss;
    if (snap.loss == 0.0) {
      audit.hours.push_back(h);
      continue;
    }
    if (!(snap.inertia > 0.0)) {
      h.catastrophic = true;
      h.rocof = h.nadir = h.qss = kInf;
      h.rocof_ok = h.nadir_ok = h.qss_ok = false;
      audit.hours.push_back(h);
      continue;
    }
    const SwingResult sim = simulate_swing(snap, f);
    h.rocof = sim.rocof;
    h.nadir = sim.nadir;
    h.qss = sim.qss;
    h.rocof_ok = sim.rocof <= f.rocof_max + tol;
    h.nadir_ok = sim.nadir <= f.nadir_max() + tol;
    h.qss_ok = sim.qss <= f.qss_max + tol;
    audit.hours.push_back(h);
  }
  return audit;
}

std::string_view to_string(GasVerdict v) {
  switch (v) {
    case GasVerdict::Feasible: return "feasible";
    case GasVerdict::Infeasible: return "infeasible";
    case GasVerdict::Undetermined: return "undetermined";
  }
  return "undetermined";
}

namespace {

struct GasOnly {
  OptModel model;
  GasVars vars;
  std::vector<std::vector<int>> cc_slack;
};

GasOnly build_gas_only(const IegsInstance& inst, const ScheduleSolution& sol, const PccpState* state,
                       double tightening) {
  GasOnly g;
  g.vars = add_gas_vars(g.model, inst, true);
  const std::size_t T = inst.horizon;
  const auto& gas = inst.gas;
  LinExpr objective;
  for (std::size_t t = 0; t < T; ++t) {
    build_gas_block(g.model, inst, g.vars, t, nullptr);
    for (std::size_t p = 0; p < gas.pipelines.size(); ++p) build_weymouth_soc(g.model, inst, g.vars, p, t);
    for (std::size_t i = 0; i < inst.generators.size(); ++i) {
      const auto& gen = inst.generators[i];
      if (!gen.is_gfu()) continue;
      const double use = gen.gas_rate * (sol.p.at(i).at(t) + sol.rg.at(i).at(t));
      g.model.set_bounds(g.vars.gfu[i][t], use, use);
    }
    for (std::size_t n = 0; n < gas.nodes.size(); ++n) {
      objective.add(g.vars.slack_pos[n][t]).add(g.vars.slack_neg[n][t]);
    }
  }
  if (state != nullptr) {
    g.cc_slack.assign(gas.pipelines.size(), std::vector<int>(T, -1));
    for (std::size_t p = 0; p < gas.pipelines.size(); ++p) {
      const std::size_t n = gas.node_index(gas.pipelines[p].to);
      for (std::size_t t = 0; t < T; ++t) {
        const int s = g.model.add_continuous("gas_s[" + gas.pipelines[p].id + "," + std::to_string(t) + "]");
        g.cc_slack[p][t] = s;
        build_weymouth_concave_linearized(g.model, inst, g.vars, p, t, state->flow_point.at(p).at(t),
                                          state->pressure_point.at(n).at(t), s);
        objective.add(s, state->penalty);
      }
    }
  } else {
    for (const auto& pipe : gas.pipelines) {
      const std::size_t m = gas.node_index(pipe.from);
      const std::size_t n = gas.node_index(pipe.to);
      for (std::size_t t = 0; t < T; ++t) {
        objective.add(g.vars.pressure[m][t], tightening).add(g.vars.pressure[n][t], -tightening);
      }
    }
  }
  g.model.set_objective(std::move(objective));
  return g;
}

double sum_ids(const std::vector<std::vector<int>>& ids, const std::vector<double>& x) {
  double s = 0.0;
  for (const auto& row : ids) {
    for (int id : row) s += x.at(static_cast<std::size_t>(id));
  }
  return s;
}

}  // namespace

GasAudit audit_gas_feasibility(const ScheduleSolution& sol, const IegsInstance& inst, const PccpParams& params,
                               const SolverOptions& options) {
  params.validate();
  if (sol.p.size() != inst.generators.size()) throw ValidationError("solution carries no schedule to audit");
  GasAudit audit;
  const auto& gas = inst.gas;
  double demand = 0.0;
  for (std::size_t t = 0; t < inst.horizon; ++t) {
    demand += gas.total_load(t);
    for (std::size_t i = 0; i < inst.generators.size(); ++i) {
      const auto& gen = inst.generators[i];
      if (gen.is_gfu()) demand += gen.gas_rate * (sol.p[i][t] + sol.rg[i][t]);
    }
  }
  audit.threshold = 1e-6 * demand;

  auto backend = make_backend();
  // The slack objective has unit weight, so the pressure-drop term stays a
  // tie-breaker.
  const double tightening = params.tightening >= 0.0 ? params.tightening : 1e-4;
  GasOnly current = build_gas_only(inst, sol, nullptr, tightening);
  SolveResult res = solve_misocp(current.model, options, backend.get());
  if (res.status == SolveStatus::Infeasible) {
    audit.verdict = GasVerdict::Infeasible;
    audit.message = "pressure limits and compressor ratios admit no operating point even with elastic balances";
    return audit;
  }
  if (!res.has_solution()) {
    audit.verdict = GasVerdict::Undetermined;
    audit.message = "relaxed gas problem hit a solver limit: " + res.message;
    return audit;
  }

  auto slack_of = [&](const std::vector<double>& x) {
    return sum_ids(current.vars.slack_pos, x) + sum_ids(current.vars.slack_neg, x);
  };
  auto record_slacks = [&](const std::vector<double>& x) {
    audit.node_slack.assign(gas.nodes.size(), std::vector<double>(inst.horizon, 0.0));
    audit.slack_nodes.clear();
    audit.total_slack = 0.0;
    for (std::size_t n = 0; n < gas.nodes.size(); ++n) {
      double node_total = 0.0;
      for (std::size_t t = 0; t < inst.horizon; ++t) {
        const double s = x[static_cast<std::size_t>(current.vars.slack_pos[n][t])] +
                         x[static_cast<std::size_t>(current.vars.slack_neg[n][t])];
        audit.node_slack[n][t] = s;
        node_total += s;
      }
      audit.total_slack += node_total;
      if (node_total > audit.threshold) audit.slack_nodes.push_back(gas.nodes[n].id);
    }
  };
  auto infeasible_message = [&](const char* how) {
    std::ostringstream msg;
    msg << how << ": balance slack " << audit.total_slack << " needed at nodes";
    for (const auto& n : audit.slack_nodes) msg << ' ' << n;
    return msg.str();
  };

  // The relaxation bounds the slack from below, so a positive value is a
  // certificate that no gas flow can serve the fixed GFU demand.
  record_slacks(res.values);
  if (audit.total_slack > audit.threshold) {
    audit.verdict = GasVerdict::Infeasible;
    audit.message = infeasible_message("convex relaxation already infeasible");
    return audit;
  }

  // Start from the schedule's own gas state when it carries one.
  GasValues start = extract_gas_values(current.vars, res.values);
  if (sol.gas && sol.gas->pressure.size() == gas.nodes.size() && sol.gas->flow.size() == gas.pipelines.size()) {
    start.pressure = sol.gas->pressure;
    start.flow = sol.gas->flow;
  }
  PccpState state = pccp_start(inst, params, start, slack_of(res.values));
  if (state.converged && sol.gas) {
    // The schedule's point is already on the Weymouth surface; verify it
    // with one penalized solve anchored there.
    state.converged = false;
  }
  while (!state.converged && !state.exhausted) {
    GasOnly next = build_gas_only(inst, sol, &state, tightening);
    SolveResult r2 = solve_misocp(next.model, options, backend.get());
    if (!r2.has_solution()) {
      audit.verdict = GasVerdict::Undetermined;
      audit.message = "penalized gas problem failed: " + r2.message;
      audit.trace = state;
      return audit;
    }
    current = std::move(next);
    res = std::move(r2);
    pccp_step(state, inst, params, extract_gas_values(current.vars, res.values), slack_of(res.values),
              sum_ids(current.cc_slack, res.values));
  }
  audit.trace = state;
  record_slacks(res.values);

  if (!state.converged) {
    audit.verdict = GasVerdict::Undetermined;
    audit.message = "convex-concave loop stopped with relaxation gap " + std::to_string(state.gap);
  } else if (audit.total_slack <= audit.threshold) {
    audit.verdict = GasVerdict::Feasible;
  } else {
    audit.verdict = GasVerdict::Infeasible;
    audit.message = infeasible_message("convex-concave search");
  }
  return audit;
}

namespace {

class Checker {
 public:
  explicit Checker(double tol) : tol_(tol) {}

  // Records a violation of `amount` (positive = violated) scaled by `scale`.
  void need(double amount, double scale, const std::string& what) {
    const double v = amount / std::max(1.0, std::abs(scale));
    if (v > tol_) {
      result.max_violation = std::max(result.max_violation, v);
      std::ostringstream s;
      s << what << " violated by " << amount;
      result.violations.push_back(s.str());
    }
  }

  ScheduleCheck result;

 private:
  double tol_;
};

std::string tag(const std::string& what, const std::string& id, std::size_t t) {
  return what + " " + id + " hour " + std::to_string(t + 1);
}

}  // namespace

ScheduleCheck verify_schedule(const ScheduleSolution& sol, const IegsInstance& inst, double tol) {
  Checker c(tol);
  const std::size_t T = inst.horizon;
  const std::size_t G = inst.generators.size();
  const std::size_t W = inst.wind_farms.size();
  if (sol.x.size() != G || sol.pw.size() != W) throw ValidationError("solution does not match the instance");

  for (std::size_t i = 0; i < G; ++i) {
    const auto& g = inst.generators[i];
    for (std::size_t t = 0; t < T; ++t) {
      const double x = sol.x[i][t];
      const double prev = t == 0 ? (g.initial.on ? 1.0 : 0.0) : sol.x[i][t - 1];
      for (double b : {x, sol.zu[i][t], sol.zd[i][t]}) c.need(std::abs(b - std::round(b)), 1.0, tag("integrality", g.id, t));
      c.need(std::abs(sol.zu[i][t] - sol.zd[i][t] - (x - prev)), 1.0, tag("commitment logic", g.id, t));
      double started = 0.0;
      for (std::size_t k = t + 1 >= static_cast<std::size_t>(g.min_up) ? t + 1 - g.min_up : 0; k <= t; ++k) {
        started += sol.zu[i][k];
      }
      c.need(started - x, 1.0, tag("minimum up time", g.id, t));
      double stopped = 0.0;
      for (std::size_t k = t + 1 >= static_cast<std::size_t>(g.min_down) ? t + 1 - g.min_down : 0; k <= t; ++k) {
        stopped += sol.zd[i][k];
      }
      c.need(stopped - (1.0 - x), 1.0, tag("minimum down time", g.id, t));
      const double p = sol.p[i][t];
      const double r = sol.rg[i][t];
      c.need(g.p_min * x - p, g.p_min, tag("minimum output", g.id, t));
      c.need(p + r - g.p_max * x, g.p_max, tag("maximum output", g.id, t));
      c.need(r - g.reserve_max * x, g.reserve_max, tag("reserve limit", g.id, t));
      c.need(-r, 1.0, tag("reserve sign", g.id, t));
      const double before = t == 0 ? g.initial.power + g.initial.reserve : sol.p[i][t - 1] + sol.rg[i][t - 1];
      c.need(p + r - before - g.ramp_up, g.ramp_up, tag("ramp up", g.id, t));
      c.need(before - (p + r) - g.ramp_down, g.ramp_down, tag("ramp down", g.id, t));
    }
  }
  for (std::size_t w = 0; w < W; ++w) {
    const auto& wf = inst.wind_farms[w];
    for (std::size_t t = 0; t < T; ++t) {
      c.need(sol.rw[w][t] - wf.reserve_max * sol.y[w][t], wf.reserve_max, tag("wind reserve", wf.id, t));
      c.need(sol.pw[w][t] + sol.rw[w][t] - wf.capacity, wf.capacity, tag("wind capacity", wf.id, t));
      c.need(-sol.pw[w][t], 1.0, tag("wind output sign", wf.id, t));
      if (!sol.variant.vi) c.need(sol.y[w][t] + sol.rw[w][t], 1.0, tag("virtual inertia disabled", wf.id, t));
    }
  }

  const auto& net = inst.power;
  const auto& f = inst.frequency;
  for (std::size_t t = 0; t < T; ++t) {
    Eigen::VectorXd inj = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.buses.size()));
    double supply = 0.0;
    for (std::size_t i = 0; i < G; ++i) {
      inj(static_cast<Eigen::Index>(net.bus_index(inst.generators[i].bus))) += sol.p[i][t];
      supply += sol.p[i][t];
    }
    for (std::size_t w = 0; w < W; ++w) {
      inj(static_cast<Eigen::Index>(net.bus_index(inst.wind_farms[w].bus))) += sol.pw[w][t];
      supply += sol.pw[w][t];
    }
    for (const auto& d : net.loads) inj(static_cast<Eigen::Index>(net.bus_index(d.bus))) -= d.demand.at(t);
    const double load = net.total_load(t);
    c.need(std::abs(supply - load), load, "power balance hour " + std::to_string(t + 1));
    const Eigen::VectorXd flows = dc_line_flows(net, inj);
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
      const auto& line = net.lines[l];
      c.need(std::abs(flows(static_cast<Eigen::Index>(l))) - line.capacity, line.capacity,
             tag("line limit", line.id, t));
    }

    const double dP = std::abs(f.loss.at(t));
    double reserve = 0.0;
    for (std::size_t i = 0; i < G; ++i) reserve += sol.rg[i][t];
    for (std::size_t w = 0; w < W; ++w) reserve += sol.rw[w][t];
    const std::string hour = " hour " + std::to_string(t + 1);
    if (!sol.variant.frequency) {
      c.need(dP - reserve, dP, "reserve requirement" + hour);
      continue;
    }
    if (dP == 0.0) continue;
    const double H = system_inertia(inst, column(sol.x, t), column(sol.y, t));
    c.need(dP / (2.0 * f.rocof_max) - H, H, "RoCoF inertia floor" + hour);
    const double Dp = f.damping * load;
    c.need(dP - Dp * f.qss_max - reserve, dP, "quasi-steady-state reserve" + hour);
    if (t < sol.kappa.size() && sol.kappa[t] > 0.0) {
      c.need(sol.kappa[t] - H * reserve, sol.kappa[t], "nadir product" + hour);
    }
  }

  if (sol.gas) {
    const auto& gas = inst.gas;
    const auto& s = *sol.gas;
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<double> net_in(gas.nodes.size(), 0.0);
      for (std::size_t k = 0; k < gas.sources.size(); ++k) net_in[gas.node_index(gas.sources[k].node)] += s.source[k][t];
      for (const auto& l : gas.loads) net_in[gas.node_index(l.node)] -= l.demand.at(t);
      for (std::size_t p = 0; p < gas.pipelines.size(); ++p) {
        net_in[gas.node_index(gas.pipelines[p].from)] -= s.flow_in[p][t];
        net_in[gas.node_index(gas.pipelines[p].to)] += s.flow_out[p][t];
      }
      for (std::size_t k = 0; k < gas.compressors.size(); ++k) {
        net_in[gas.node_index(gas.compressors[k].inlet)] -= s.comp_flow[k][t] + s.comp_use[k][t];
        net_in[gas.node_index(gas.compressors[k].outlet)] += s.comp_flow[k][t];
      }
      for (std::size_t i = 0; i < G; ++i) {
        const auto& g = inst.generators[i];
        if (!g.is_gfu()) continue;
        const double use = g.gas_rate * (sol.p[i][t] + sol.rg[i][t]);
        c.need(std::abs(s.gfu[i][t] - use), use, tag("gas coupling", g.id, t));
        net_in[gas.node_index(*g.gas_node)] -= s.gfu[i][t];
      }
      for (std::size_t n = 0; n < gas.nodes.size(); ++n) {
        const auto& node = gas.nodes[n];
        c.need(std::abs(net_in[n]), gas.total_load(t), tag("gas balance", node.id, t));
        c.need(node.pressure_min - s.pressure[n][t], node.pressure_min, tag("pressure floor", node.id, t));
        c.need(s.pressure[n][t] - node.pressure_max, node.pressure_max, tag("pressure cap", node.id, t));
      }
      for (std::size_t p = 0; p < gas.pipelines.size(); ++p) {
        const auto& pipe = gas.pipelines[p];
        const double pm = s.pressure[gas.node_index(pipe.from)][t];
        const double pn = s.pressure[gas.node_index(pipe.to)][t];
        const double F = s.flow[p][t] / pipe.weymouth;
        c.need(F * F + pn * pn - pm * pm, pm * pm, tag("Weymouth relaxation", pipe.id, t));
      }
    }
  }
  return c.result;
}

EvalReport evaluate_solution(const ScheduleSolution& sol, const IegsInstance& inst, const ScenarioSet& out,
                             bool audit_gas) {
  EvalReport r;
  r.variant = std::string(variant_name(sol.variant.variant));
  r.sample_size = sol.variant.sample_size;
  r.status = std::string(to_string(sol.status));
  r.exit_condition = sol.exit_condition;
  r.iterations = sol.iterations;
  r.wall_time = sol.wall_time;
  if (sol.x.size() != inst.generators.size()) {
    r.error = sol.message.empty() ? "no schedule" : sol.message;
    return r;
  }
  r.cost = compute_costs(inst, sol);
  r.ejvp = inst.wind_farms.empty() ? 0.0 : compute_ejvp(sol, out);
  const FrequencyAudit fa = audit_frequency(sol, inst);
  for (const auto& h : fa.hours) {
    r.rocof.push_back(h.rocof);
    r.nadir.push_back(h.nadir);
  }
  r.frequency_failures = fa.failing_hours();
  if (audit_gas && !inst.gas.nodes.empty()) {
    r.gas_verdict = std::string(to_string(audit_gas_feasibility(sol, inst).verdict));
  }
  return r;
}

std::vector<EvalReport> compare_variants(const IegsInstance& inst, const std::vector<Variant>& variants,
                                         const std::vector<std::size_t>& sizes, const CompareOptions& options) {
  return compare_variants(inst, generate_split(inst), variants, sizes, options);
}

std::vector<EvalReport> compare_variants(const IegsInstance& inst, const ScenarioSplit& split,
                                         const std::vector<Variant>& variants, const std::vector<std::size_t>& sizes,
                                         const CompareOptions& options) {
  std::vector<Variant> order = variants;
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  std::vector<std::size_t> ns = sizes.empty() ? std::vector<std::size_t>{0} : sizes;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());

  std::vector<std::pair<Variant, std::size_t>> jobs;
  for (Variant v : order) {
    for (std::size_t n : ns) jobs.emplace_back(v, n);
  }
  std::vector<EvalReport> rows(jobs.size());
  parallel_for(jobs.size(), options.threads, [&](std::size_t k) {
    const auto [variant, n] = jobs[k];
    EvalReport& row = rows[k];
    row.variant = std::string(variant_name(variant));
    row.sample_size = n != 0 ? n : inst.uncertainty.moment_samples;
    try {
      VariantConfig cfg;
      cfg.variant = variant;
      cfg.sample_size = n;
      const ScheduleSolution sol = run_algorithm1(inst, cfg, split.in_sample, options.pccp, options.solver);
      row = evaluate_solution(sol, inst, split.out_of_sample, options.audit_gas);
    } catch (const std::exception& e) {
      row.status = "error";
      row.error = e.what();
    }
  });
  return rows;
}

namespace {

constexpr const char* kFooter =
    "EJVP values depend on the wind data; only the relations to the risk level are meaningful.";

}  // namespace

std::string reports_to_json(const std::vector<EvalReport>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json j;
    j["variant"] = r.variant;
    j["sample_size"] = r.sample_size;
    j["status"] = r.status;
    j["exit_condition"] = r.exit_condition;
    j["error"] = r.error;
    j["cost"] = {{"total", r.cost.total},
                 {"startup", r.cost.startup},
                 {"shutdown", r.cost.shutdown},
                 {"no_load", r.cost.no_load},
                 {"generation", r.cost.generation},
                 {"pfr_generators", r.cost.pfr_generators},
                 {"virtual_inertia", r.cost.virtual_inertia},
                 {"pfr_wind", r.cost.pfr_wind}};
    j["ejvp_percent"] = r.ejvp;
    j["rocof_Hz_per_s"] = r.rocof;
    j["nadir_Hz"] = r.nadir;
    j["frequency_failing_hours"] = r.frequency_failures;
    j["gas_verdict"] = r.gas_verdict;
    j["iterations"] = r.iterations;
    j["wall_time_s"] = r.wall_time;
    arr.push_back(std::move(j));
  }
  return json{{"rows", arr}, {"note", kFooter}}.dump(2);
}

std::string reports_to_table(const std::vector<EvalReport>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(8) << "variant" << std::right << std::setw(6) << "N" << std::setw(12) << "status"
      << std::setw(14) << "cost($)" << std::setw(9) << "EJVP(%)" << std::setw(11) << "freq-fail" << std::setw(14)
      << "gas" << std::setw(7) << "iter" << std::setw(10) << "time(s)" << '\n';
  out << std::fixed;
  for (const auto& r : rows) {
    out << std::left << std::setw(8) << r.variant << std::right << std::setw(6) << r.sample_size << std::setw(12)
        << r.status;
    if (!r.error.empty() && r.cost.total == 0.0) {
      out << "  error: " << r.error << '\n';
      continue;
    }
    out << std::setw(14) << std::setprecision(0) << r.cost.total << std::setw(9) << std::setprecision(2) << r.ejvp
        << std::setw(11) << r.frequency_failures << std::setw(14) << r.gas_verdict << std::setw(7) << r.iterations
        << std::setw(10) << std::setprecision(1) << r.wall_time << '\n';
  }
  out << kFooter << '\n';
  return out.str();
}

void write_hourly_csv(std::ostream& out, const std::vector<EvalReport>& rows, const std::string& metric) {
  if (metric != "rocof" && metric != "nadir") throw ValidationError("hourly metric must be rocof or nadir");
  std::size_t hours = 0;
  out << "hour";
  for (const auto& r : rows) {
    out << ',' << r.variant << "@N=" << r.sample_size;
    hours = std::max(hours, r.rocof.size());
  }
  out << '\n';
  for (std::size_t t = 0; t < hours; ++t) {
    out << t + 1;
    for (const auto& r : rows) {
      const auto& v = metric == "rocof" ? r.rocof : r.nadir;
      out << ',';
      if (t < v.size()) out << v[t];
    }
    out << '\n';
  }
}

}  // namespace iegs
