#include <doctest.h>

#include <cmath>

#include "iegs/error.hpp"
#include "iegs/freq.hpp"
#include "iegs/optmodel.hpp"
#include "support.hpp"

using namespace iegs;

namespace {

FrequencyParams params() {
  FrequencyParams p;
  p.damping = 0.01;
  p.nominal = 50.0;
  p.deadband = 0.015;
  p.dead_time = 0.1;
  p.delivery_time = 10.0;
  p.rocof_max = 0.5;
  p.f_min = 49.2;
  p.qss_max = 0.2;
  return p;
}

FrequencySnapshot snapshot(double H, double R, double load, double loss) {
  FrequencySnapshot s;
  s.inertia = H;
  s.rg = {R};
  s.load = load;
  s.loss = loss;
  return s;
}

// Solves the model with x, y, rg, rw fixed and reports feasibility.
bool feasible_with(const IegsInstance& inst, const std::vector<double>& x, const std::vector<double>& y,
                   double kappa) {
  OptModel m;
  FreqVars v;
  for (std::size_t i = 0; i < x.size(); ++i) {
    v.x.push_back(m.add_var("x" + std::to_string(i), VarKind::Binary, x[i], x[i]));
    v.rg.push_back(m.add_continuous("rg" + std::to_string(i), 0.0, 20.0));
  }
  for (std::size_t w = 0; w < y.size(); ++w) {
    v.y.push_back(m.add_var("y" + std::to_string(w), VarKind::Binary, y[w], y[w]));
    v.rw.push_back(m.add_continuous("rw" + std::to_string(w), 0.0, 10.0));
  }
  build_frequency_block(m, inst, 0, v, kappa, frequency_big_m(inst));
  return solve_misocp(m, {}).has_solution();
}

}  // namespace

TEST_CASE("system inertia follows the aggregate definition") {
  const auto inst = iegs::test::toy_instance();
  // (5*100 + 4*80*0 + 6*50) / 50
  CHECK(system_inertia(inst, {1, 0}, {1}) == doctest::Approx(16.0));
  CHECK(system_inertia(inst, {0, 0}, {0}) == 0.0);
}

TEST_CASE("no disturbance keeps the frequency flat") {
  const auto r = simulate_swing(snapshot(10.0, 5.0, 300.0, 0.0), params());
  for (double d : r.deviation) CHECK(d == 0.0);
  CHECK(r.nadir == 0.0);
}

TEST_CASE("initial slope is -dP/2H") {
  const double H = 12.0, dP = 15.0;
  const auto r = simulate_swing(snapshot(H, 8.0, 300.0, dP), params());
  CHECK(r.initial_rocof == doctest::Approx(dP / (2.0 * H)).epsilon(1e-3));
  const double first_step = (r.deviation[1] - r.deviation[0]) / r.dt;
  CHECK(-first_step == doctest::Approx(dP / (2.0 * H)).epsilon(1e-3));
}

TEST_CASE("simulated nadir matches the closed form at the kappa point") {
  // The closed form starts the ramp at the dead-band crossing and needs the
  // nadir inside the ramp; H = 20 with a 10 ms dead time satisfies both.
  auto p = params();
  p.dead_time = 0.01;
  const double dP = 15.0, load = 300.0;
  const double kappa = solve_kappa(p, dP, load);
  const double H = 20.0;
  const double R = kappa / H;
  CHECK(nadir_closed_form(R, H, p, dP, load) == doctest::Approx(p.nadir_max()).epsilon(1e-9));
  const auto r = simulate_swing(snapshot(H, R, load, dP), p);
  CHECK(std::abs(r.nadir - p.nadir_max()) <= 1e-3);
}

TEST_CASE("closed-form nadir tends to the dead band as dP approaches D' df_DB") {
  const auto p = params();
  const double load = 300.0;
  const double dP = 0.01 * load * p.deadband * (1.0 + 1e-9);
  CHECK(nadir_closed_form(5.0, 10.0, p, dP, load) == doctest::Approx(p.deadband).epsilon(1e-6));
}

TEST_CASE("closed-form nadir shrinks with more inertia") {
  const auto p = params();
  double prev = nadir_closed_form(5.0, 1.0, p, 15.0, 300.0);
  for (double H = 2.0; H <= 40.0; H += 1.0) {
    const double n = nadir_closed_form(5.0, H, p, 15.0, 300.0);
    CHECK(n < prev);
    prev = n;
  }
}

TEST_CASE("solve_kappa matches an independent root finder") {
  // Frozen from scipy.optimize.brentq on the same equation.
  const auto p = params();
  CHECK(solve_kappa(p, 15.0, 300.0) == doctest::Approx(566.8167830186784).epsilon(1e-8));
  CHECK(solve_kappa(p, 10.0, 250.0) == doctest::Approx(235.9457229783366).epsilon(1e-8));
  CHECK(solve_kappa(p, 16.8, 420.0) == doctest::Approx(665.933208534057).epsilon(1e-8));
  CHECK(solve_kappa(p, 805.2, 4000.0) == doctest::Approx(1955148.5751807753).epsilon(1e-8));
}

TEST_CASE("solve_kappa residual, determinism and monotonicity") {
  const auto p = params();
  const double k = solve_kappa(p, 15.0, 300.0);
  CHECK(std::abs(kappa_residual(k, p, 15.0, 300.0)) <= 1e-9 * 3.0 * 15.0);
  CHECK(solve_kappa(p, 15.0, 300.0) == k);
  double prev = 0.0;
  for (double dP = 8.0; dP <= 30.0; dP += 2.0) {
    const double kk = solve_kappa(p, dP, 300.0);
    CHECK(kk > prev);
    prev = kk;
  }
}

TEST_CASE("solve_kappa edge cases") {
  const auto p = params();
  // Damping alone holds the nadir.
  CHECK(solve_kappa(p, 1.0, 300.0) == 0.0);
  // Disturbance absorbed inside the dead band.
  CHECK_THROWS_AS(solve_kappa(p, 0.01, 300.0), NumericError);
}

TEST_CASE("RoCoF row right-hand side") {
  auto j = iegs::test::toy_json(1, 4000.0, 805.2);
  j["generators"][0]["p_max"] = 5000.0;
  j["generators"][0]["ramp_up"] = 5000.0;
  j["generators"][0]["ramp_down"] = 5000.0;
  j["wind_farms"][0]["capacity"] = 5000.0;
  j["power_network"]["lines"][0]["capacity"] = 10000.0;
  auto inst = parse_instance(j.dump());
  OptModel m;
  FreqVars v{{m.add_binary("x1"), m.add_binary("x2")}, {m.add_binary("y")},
             {m.add_continuous("r1"), m.add_continuous("r2")}, {m.add_continuous("rw")}};
  build_frequency_block(m, inst, 0, v, 1.0, frequency_big_m(inst));
  bool found = false;
  for (const auto& row : m.rows()) {
    if (row.name.rfind("freq_rocof", 0) == 0) {
      CHECK(row.rhs == doctest::Approx(805.2).epsilon(1e-12));
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("frequency block row counts") {
  const auto inst = iegs::test::toy_instance();
  OptModel m;
  FreqVars v{{m.add_binary("x1"), m.add_binary("x2")}, {m.add_binary("y")},
             {m.add_continuous("r1"), m.add_continuous("r2")}, {m.add_continuous("rw")}};
  const auto info = build_frequency_block(m, inst, 0, v, 100.0, frequency_big_m(inst));
  CHECK(info.big_m_rows == 4 * 3);
  CHECK(m.count_rows("freq_bigm") == 12);
  CHECK(m.count_rows("freq_nadir") == 1);
  CHECK(m.count_rows("freq_rocof") == 1);
  CHECK(m.count_rows("freq_qss") == 1);
  CHECK(frequency_big_m(inst) == doctest::Approx(20.0 + 15.0 + 10.0 + 1.0));
}

TEST_CASE("all units off makes the RoCoF row infeasible") {
  const auto inst = iegs::test::toy_instance();
  CHECK_FALSE(feasible_with(inst, {0, 0}, {0}, 10.0));
  CHECK(feasible_with(inst, {1, 1}, {1}, 10.0));
}

TEST_CASE("zero inertia cannot be simulated") {
  CHECK_THROWS_AS(simulate_swing(snapshot(0.0, 5.0, 300.0, 10.0), params()), NumericError);
}
