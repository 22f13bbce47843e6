// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "iegs/drcc.hpp"
#include "iegs/eval.hpp"
#include "iegs/freq.hpp"
#include "iegs/gasnet.hpp"
#include "iegs/instance.hpp"
#include "iegs/optmodel.hpp"
#include "iegs/scheduler.hpp"
#include "misocp_oracle.hpp"
#include "support.hpp"

using namespace iegs;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Bundled-case solutions shared by criteria 4 to 8, solved concurrently once.
struct Bundle {
  IegsInstance base;
  IegsInstance w6;
  ScenarioSplit base_split;
  ScenarioSplit w6_split;
  std::map<Variant, ScheduleSolution> base_sol;
  ScheduleSolution w6_drmi;
};

Bundle& bundle() {
  static Bundle b = [] {
    Bundle out;
    out.base = load_instance(iegs::test::data_path("iegs5_7.json"));
    out.w6 = load_instance(iegs::test::data_path("iegs5_7_w6.json"));
    out.base_split = generate_split(out.base);
    out.w6_split = generate_split(out.w6);
    const std::vector<Variant> variants{Variant::SaaFcuc, Variant::DrFcucM, Variant::DrFcucU,
                                        Variant::NoFc,    Variant::NoNgs,   Variant::NoVi};
    std::vector<std::future<ScheduleSolution>> jobs;
    for (Variant v : variants) {
      jobs.push_back(std::async(std::launch::async, [&out, v] {
        return run_algorithm1(out.base, VariantConfig{v, 20, {}, {}}, out.base_split.in_sample);
      }));
    }
    auto w6_job = std::async(std::launch::async, [&out] {
      return run_algorithm1(out.w6, VariantConfig{Variant::DrFcucMI, 20, {}, {}}, out.w6_split.in_sample);
    });
    for (std::size_t k = 0; k < variants.size(); ++k) out.base_sol.emplace(variants[k], jobs[k].get());
    out.w6_drmi = w6_job.get();
    return out;
  }();
  return b;
}

const ScheduleSolution& solved(Variant v) { return bundle().base_sol.at(v); }

double ejvp(const ScheduleSolution& s) { return compute_ejvp(s, bundle().base_split.out_of_sample); }

// 1. Big-M rows reproduce H * R >= kappa exactly.
Outcome bigm_exactness() {
  const auto t0 = Clock::now();
  const auto inst = iegs::test::toy_instance(1);
  const auto& f = inst.frequency;
  const double dP = f.loss[0];
  const double kappa = kappa_schedule(inst)[0];
  const double Dp = f.damping * inst.load_level(0);
  const double big_m = frequency_big_m(inst);
  const std::vector<double> g1{0.0, 3.0, 5.0, 10.0, 20.0}, g2{0.0, 2.5, 7.5, 15.0}, w{0.0, 4.0, 10.0};
  int cases = 0, mismatches = 0, nadir_decisive = 0;
  for (int b = 0; b < 8; ++b) {
    const std::vector<double> x{double(b & 1), double((b >> 1) & 1)};
    const std::vector<double> y{double((b >> 2) & 1)};
    const double H = system_inertia(inst, x, y);
    for (double r1 : g1) {
      for (double r2 : g2) {
        for (double rw : w) {
          const double R = r1 + r2 + rw;
          if (std::abs(H * R - kappa) <= 1e-6 * kappa) continue;
          const bool nadir = H * R >= kappa;
          const bool rocof = H >= dP / (2.0 * f.rocof_max);
          const bool qss = R >= dP - Dp * f.qss_max;
          if (rocof && qss && !nadir) ++nadir_decisive;

          OptModel m;
          FreqVars v;
          v.x = {m.add_var("x1", VarKind::Binary, x[0], x[0]), m.add_var("x2", VarKind::Binary, x[1], x[1])};
          v.y = {m.add_var("y", VarKind::Binary, y[0], y[0])};
          v.rg = {m.add_continuous("r1", r1, r1), m.add_continuous("r2", r2, r2)};
          v.rw = {m.add_continuous("rw", rw, rw)};
          build_frequency_block(m, inst, 0, v, kappa, big_m);
          const bool model_ok = solve_misocp(m, {}).has_solution();
          ++cases;
          if (model_ok != (nadir && rocof && qss)) ++mismatches;
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << cases << " assignments over 8 binary patterns, " << mismatches << " mismatches, " << nadir_decisive
    << " decided by the nadir row alone, " << secs << " s";
  return {mismatches == 0 && nadir_decisive > 0 && secs < 5.0, d.str()};
}

// 2. Closed-form nadir and swing simulation at the kappa point.
Outcome kappa_nadir_consistency() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2021);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  double worst_closed = 0.0, worst_sim = 0.0;
  int draws = 0, attempts = 0;
  while (draws < 50 && attempts < 100000) {
    ++attempts;
    FrequencyParams p;
    p.damping = uni(0.005, 0.02);
    p.nominal = 50.0;
    p.deadband = uni(0.01, 0.03);
    p.dead_time = uni(0.05, 0.5);
    p.delivery_time = uni(5.0, 15.0);
    p.rocof_max = 0.5;
    p.f_min = uni(49.0, 49.6);
    p.qss_max = 0.2;
    const double load = uni(200.0, 5000.0);
    const double dP = load * uni(0.02, 0.1);
    const double Dp = p.damping * load;
    const double X = dP - Dp * p.deadband;
    if (X <= 0.0) continue;
    const double kappa = solve_kappa(p, dP, load);
    if (kappa <= 0.0) continue;
    // The closed form assumes the ramp starts at the dead-band crossing and
    // the nadir is reached before the ramp completes.
    const double H_lo = p.dead_time * Dp / (-2.0 * std::log1p(-Dp * p.deadband / dP));
    const double H_hi =
        p.delivery_time * Dp / (2.0 * std::log((p.delivery_time * Dp * X + 2.0 * kappa) / (2.0 * kappa)));
    if (!(H_hi > 1.05 * H_lo)) continue;
    const double H = uni(1.02 * H_lo, 0.98 * H_hi);
    const double R = kappa / H;
    const double closed = nadir_closed_form(R, H, p, dP, load);
    FrequencySnapshot s;
    s.inertia = H;
    s.rg = {R};
    s.load = load;
    s.loss = dP;
    const auto sim = simulate_swing(s, p);
    worst_closed = std::max(worst_closed, std::abs(closed - p.nadir_max()));
    worst_sim = std::max(worst_sim, std::abs(sim.nadir - p.nadir_max()));
    ++draws;
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << draws << " draws, max |closed form - limit| = " << worst_closed << " Hz, max |simulated - limit| = "
    << worst_sim << " Hz, " << secs << " s";
  return {draws == 50 && worst_closed <= 1e-6 && worst_sim <= 1e-3 && secs < 30.0, d.str()};
}

double solved_min_r(double eps, bool unimodal) {
  OptModel m;
  WindVars v{{m.add_continuous("pw", 0.0, 0.0)}, {m.add_continuous("rw", 0.0, 0.0)}};
  AmbiguitySpec spec;
  spec.mean = {{100.0}};
  spec.variance = {{1.0}};
  spec.epsilon = eps;
  spec.unimodal = unimodal;
  const auto block = unimodal ? build_unimodal_soc_block(m, spec, v, 0) : build_moment_soc_block(m, spec, v, 0);
  m.set_objective(LinExpr::var(block.r[0]));
  SolverOptions opt;
  opt.tol_soc = 1e-9;
  const auto res = solve_misocp(m, opt);
  return res.has_solution() ? res.values[block.r[0]] : kInf;
}

// 3. Minimal r of both conic blocks against the exact one-sided factors.
Outcome safety_constants() {
  const double m05 = solved_min_r(0.05, false);
  const double u05 = solved_min_r(0.05, true);
  bool ok = std::abs(m05 - 4.3644) <= 1e-4 && std::abs(u05 - 2.8267) <= 1e-4;
  ok = ok && std::abs(cantelli_factor(0.05) - 4.3589) <= 1e-4 && std::abs(vp_factor(0.05) - 2.8087) <= 1e-4;
  int grid_fail = 0;
  double worst_fit = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double e = (1.0 / 6.0) * k / 100.0;
    const double rm = solved_min_r(e, false);
    const double ru = solved_min_r(e, true);
    worst_fit = std::max({worst_fit, std::abs(rm - moment_soc_min_r(e)), std::abs(ru - unimodal_soc_min_r(e))});
    if (!(rm >= cantelli_factor(e) - 1e-6 && ru >= vp_factor(e) - 1e-6 && ru < rm)) ++grid_fail;
  }
  std::ostringstream d;
  d.precision(6);
  d << "r(0.05) = " << m05 << " / " << u05 << ", factors " << cantelli_factor(0.05) << " / " << vp_factor(0.05)
    << ", grid violations " << grid_fail << "/100, max |solved - closed form| = " << worst_fit;
  return {ok && grid_fail == 0 && worst_fit <= 1e-4, d.str()};
}

// 4. Out-of-sample joint violation of the moment-based schedule.
Outcome distribution_free_guarantee(double solve_secs) {
  const auto& s = solved(Variant::DrFcucM);
  if (!s.ok()) return {false, "DR-M solve failed: " + s.message};
  const double e = ejvp(s);
  std::ostringstream d;
  d << "EJVP(dr-m) = " << e << "% over " << bundle().base_split.out_of_sample.samples
    << " out-of-sample draws (limit 5.7%), solve " << s.wall_time << " s";
  return {e <= 5.7 && solve_secs < 600.0, d.str()};
}

// 5. Orderings between variants.
Outcome orderings() {
  const auto& saa = solved(Variant::SaaFcuc);
  const auto& dru = solved(Variant::DrFcucU);
  const auto& drm = solved(Variant::DrFcucM);
  const auto& nongs = solved(Variant::NoNgs);
  const auto& novi = solved(Variant::NoVi);
  const auto& drmi = bundle().w6_drmi;
  for (const auto* s : {&saa, &dru, &drm, &nongs, &novi, &drmi}) {
    if (!s->ok()) return {false, std::string(variant_name(s->variant.variant)) + " failed: " + s->message};
  }
  const double eps = bundle().base.uncertainty.epsilon * 100.0;
  const double eps_w6 = bundle().w6.uncertainty.epsilon_individual.value_or(bundle().w6.uncertainty.epsilon) * 100.0;
  const double e_saa = ejvp(saa), e_drm = ejvp(drm);
  const double e_drmi = compute_ejvp(drmi, bundle().w6_split.out_of_sample);
  int held = 0;
  std::ostringstream d;
  auto rel = [&](bool ok, const std::string& text) {
    held += ok ? 1 : 0;
    d << (ok ? "" : "NOT ") << text << "; ";
  };
  rel(saa.cost.total <= dru.cost.total && dru.cost.total <= drm.cost.total,
      "cost saa " + std::to_string(saa.cost.total) + " <= dr-u " + std::to_string(dru.cost.total) + " <= dr-m " +
          std::to_string(drm.cost.total));
  rel(e_saa > eps, "EJVP saa " + std::to_string(e_saa) + "% > eps");
  rel(e_drm <= eps + 0.7, "EJVP dr-m " + std::to_string(e_drm) + "% within guarantee");
  rel(nongs.cost.total < drm.cost.total, "cost no-ngs " + std::to_string(nongs.cost.total) + " < with gas");
  rel(drm.cost.total <= novi.cost.total, "cost with VI <= no-vi " + std::to_string(novi.cost.total));
  rel(e_drmi > eps_w6, "EJVP dr-m-i " + std::to_string(e_drmi) + "% > eps (6-farm case)");
  return {held == 6, std::to_string(held) + "/6 hold: " + d.str()};
}

// 6. Convex-concave loop convergence and restored Weymouth equality.
Outcome pccp_convergence() {
  const auto& s = solved(Variant::DrFcucM);
  if (!s.ok() || !s.gas) return {false, "DR-M solve failed: " + s.message};
  const auto& inst = bundle().base;
  const GasValues gv{s.gas->pressure, s.gas->flow};
  const double residual = weymouth_residual(inst, gv);
  const double gap = measure_relaxation_gap(inst, gv);
  std::ostringstream d;
  d << "exit " << s.exit_condition << " after " << s.iterations << " solves, M_gap = " << gap
    << ", max Weymouth residual = " << residual;
  return {s.exit_condition == "converged" && s.iterations <= 10 && gap <= 1e-3 && residual <= 1e-3, d.str()};
}

// 7. Gas audit of the schedule computed without the gas network.
Outcome gas_infeasibility() {
  const auto& s = solved(Variant::NoNgs);
  if (!s.ok()) return {false, "no-ngs solve failed: " + s.message};
  const auto audit = audit_gas_feasibility(s, bundle().base);
  std::ostringstream d;
  d << "verdict " << to_string(audit.verdict) << ", total slack " << audit.total_slack << " (threshold "
    << audit.threshold << ") at nodes";
  for (const auto& n : audit.slack_nodes) d << ' ' << n;
  return {audit.verdict == GasVerdict::Infeasible && !audit.slack_nodes.empty(), d.str()};
}

// 8. Simulation-based frequency audit.
Outcome frequency_audit() {
  std::ostringstream d;
  bool ok = true;
  auto check_fc = [&](const ScheduleSolution& s, const IegsInstance& inst) {
    const auto a = audit_frequency(s, inst);
    d << variant_name(s.variant.variant) << ' ' << (24 - a.failing_hours()) << "/24; ";
    ok = ok && s.ok() && a.all_pass();
  };
  for (Variant v : {Variant::SaaFcuc, Variant::DrFcucM, Variant::DrFcucU, Variant::NoNgs, Variant::NoVi}) {
    check_fc(solved(v), bundle().base);
  }
  check_fc(bundle().w6_drmi, bundle().w6);
  const auto& nofc = solved(Variant::NoFc);
  const auto a = audit_frequency(nofc, bundle().base);
  d << "no-fc fails " << a.failing_hours() << " hours";
  return {ok && nofc.ok() && a.failing_hours() >= 1, d.str()};
}

// 9. Outer approximation against the analytic cone and brute force.
Outcome misocp_correctness() {
  OptModel m;
  const int x = m.add_continuous("x", -kInf, kInf);
  m.add_soc({LinExpr(1.0), LinExpr::var(x)}, LinExpr(2.0), "disk");
  m.set_objective(LinExpr::var(x));
  const auto r = solve_misocp(m, {});
  const double err = r.has_solution() ? std::abs(r.values[x] + std::sqrt(3.0)) : kInf;

  std::mt19937_64 rng(20211);
  SolverOptions opt;
  opt.set_mip_gap(1e-9);
  int agree = 0;
  for (int k = 0; k < 20; ++k) {
    const auto p = iegs::test::random_misocp(rng);
    const auto expected = p.brute_force();
    const auto res = solve_misocp(p.model(), opt);
    if (!expected) {
      agree += res.status == SolveStatus::Infeasible ? 1 : 0;
    } else if (res.has_solution() && std::abs(res.objective - *expected) <= 1e-4) {
      ++agree;
    }
  }
  std::ostringstream d;
  d << "|x + sqrt(3)| = " << err << ", " << agree << "/20 random instances agree with enumeration";
  return {err <= 1e-6 && agree == 20, d.str()};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
    std::fflush(stdout);
  };
  report(1, bigm_exactness);
  report(2, kappa_nadir_consistency);
  report(3, safety_constants);
  report(9, misocp_correctness);

  const auto t0 = Clock::now();
  try {
    bundle();
  } catch (const std::exception& e) {
    std::printf("bundled solves failed: %s\n", e.what());
  }
  const double solve_secs = seconds_since(t0);
  report(4, [&] { return distribution_free_guarantee(solve_secs); });
  report(5, orderings);
  report(6, pccp_convergence);
  report(7, gas_infeasibility);
  report(8, frequency_audit);
  return failed == 0 ? 0 : 1;
}
