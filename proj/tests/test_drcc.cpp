#include <doctest.h>

#include <cmath>
#include <random>

#include "iegs/drcc.hpp"
#include "iegs/error.hpp"
#include "iegs/optmodel.hpp"

using namespace iegs;

namespace {

AmbiguitySpec one_farm(double mu, double var, double eps, bool unimodal = false) {
  AmbiguitySpec spec;
  spec.mean = {{mu}};
  spec.variance = {{var}};
  spec.epsilon = eps;
  spec.unimodal = unimodal;
  return spec;
}

// Smallest r the block admits with the budget fully spent on one farm.
double solved_min_r(double eps, bool unimodal) {
  OptModel m;
  WindVars v{{m.add_continuous("pw", 0.0, 0.0)}, {m.add_continuous("rw", 0.0, 0.0)}};
  const auto spec = one_farm(100.0, 1.0, eps, unimodal);
  const auto block = unimodal ? build_unimodal_soc_block(m, spec, v, 0) : build_moment_soc_block(m, spec, v, 0);
  m.set_objective(LinExpr::var(block.r[0]));
  SolverOptions opt;
  opt.tol_soc = 1e-9;
  const auto res = solve_misocp(m, opt);
  REQUIRE(res.has_solution());
  return res.values[block.r[0]];
}

bool saa_feasible(const ScenarioSet& sc, double q, double eps) {
  OptModel m;
  WindVars v{{m.add_continuous("pw", q, q)}, {m.add_continuous("rw", 0.0, 0.0)}};
  build_saa_block(m, sc, {100.0}, v, eps, 0);
  return solve_misocp(m, {}).has_solution();
}

}  // namespace

TEST_CASE("moments of constant samples") {
  ScenarioSet s;
  s.samples = 4;
  s.farms = 1;
  s.hours = 1;
  s.values = {7.0, 7.0, 7.0, 7.0};
  const auto spec = estimate_moments(s, 4);
  CHECK(spec.mean[0][0] == 7.0);
  CHECK(spec.variance[0][0] == 0.0);
}

TEST_CASE("moments of {1, 2, 3}") {
  ScenarioSet s;
  s.samples = 3;
  s.farms = 1;
  s.hours = 1;
  s.values = {1.0, 2.0, 3.0};
  const auto spec = estimate_moments(s, 3);
  CHECK(spec.mean[0][0] == doctest::Approx(2.0));
  CHECK(spec.variance[0][0] == doctest::Approx(1.0));
}

TEST_CASE("moment estimates agree with a streaming computation") {
  const auto sc = generate_scenarios({{80.0, 40.0}, {20.0, 60.0}}, {{8.0, 4.0}, {2.0, 6.0}}, {100.0, 100.0}, 20, 99);
  const auto spec = estimate_moments(sc, 20);
  for (std::size_t w = 0; w < 2; ++w) {
    for (std::size_t t = 0; t < 2; ++t) {
      double mean = 0.0, m2 = 0.0;
      for (std::size_t k = 0; k < 20; ++k) {
        const double x = sc.at(k, w, t);
        const double d = x - mean;
        mean += d / static_cast<double>(k + 1);
        m2 += d * (x - mean);
      }
      CHECK(spec.mean[w][t] == doctest::Approx(mean).epsilon(1e-12));
      CHECK(spec.variance[w][t] == doctest::Approx(m2 / 19.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("moment estimation needs two samples") {
  ScenarioSet s;
  s.samples = 1;
  s.farms = 1;
  s.hours = 1;
  s.values = {1.0};
  CHECK_THROWS_AS(estimate_moments(s, 1), ValidationError);
}

TEST_CASE("safety factors") {
  CHECK(moment_soc_min_r(0.05) == doctest::Approx(4.3644).epsilon(1e-4 / 4.3644));
  CHECK(unimodal_soc_min_r(0.05) == doctest::Approx(2.8267).epsilon(1e-4 / 2.8267));
  CHECK(cantelli_factor(0.05) == doctest::Approx(4.3589).epsilon(1e-4 / 4.3589));
  CHECK(vp_factor(0.05) == doctest::Approx(2.8087).epsilon(1e-4 / 2.8087));
  CHECK(cantelli_factor(0.10) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(vp_factor(1.0 / 6.0) == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("conservativeness chain over an epsilon grid") {
  for (int k = 1; k <= 100; ++k) {
    const double e = (1.0 / 6.0) * k / 100.0;
    CHECK(unimodal_soc_min_r(e) < moment_soc_min_r(e));
    CHECK(moment_soc_min_r(e) >= cantelli_factor(e));
    CHECK(unimodal_soc_min_r(e) >= vp_factor(e));
  }
}

TEST_CASE("solved minimal r matches the closed forms") {
  CHECK(std::abs(solved_min_r(0.05, false) - 4.3644) <= 1e-4);
  CHECK(std::abs(solved_min_r(0.05, true) - 2.8267) <= 1e-4);
}

TEST_CASE("zero variance reduces the margin row to P + R <= mu") {
  OptModel m;
  WindVars v{{m.add_continuous("pw")}, {m.add_continuous("rw")}};
  build_moment_soc_block(m, one_farm(42.0, 0.0, 0.05), v, 0);
  m.set_objective(LinExpr::var(v.pw[0], -1.0).add(v.rw[0], -1.0));
  const auto res = solve_misocp(m, {});
  REQUIRE(res.has_solution());
  CHECK(res.values[v.pw[0]] + res.values[v.rw[0]] == doctest::Approx(42.0).epsilon(1e-9));
}

TEST_CASE("block structure: one budget row, three auxiliaries per farm") {
  OptModel m;
  WindVars v{{m.add_continuous("pw1"), m.add_continuous("pw2")}, {m.add_continuous("rw1"), m.add_continuous("rw2")}};
  AmbiguitySpec spec;
  spec.mean = {{50.0}, {50.0}};
  spec.variance = {{4.0}, {9.0}};
  const auto b = build_moment_soc_block(m, spec, v, 0);
  CHECK(b.eps.size() == 2);
  CHECK(b.r.size() == 2);
  CHECK(b.s.size() == 2);
  CHECK(m.count_rows("drcc_budget") == 1);
  CHECK(m.socs().size() == 4);
}

TEST_CASE("unimodal block rejects epsilon above 1/6") {
  OptModel m;
  WindVars v{{m.add_continuous("pw")}, {m.add_continuous("rw")}};
  CHECK_THROWS_AS(build_unimodal_soc_block(m, one_farm(10.0, 1.0, 0.2, true), v, 0), ValidationError);
  CHECK_THROWS_AS(build_individual_block(m, one_farm(10.0, 1.0, 0.2), v, 0.2, true, 0), ValidationError);
}

TEST_CASE("Bonferroni split is respected in solutions") {
  OptModel m;
  WindVars v{{m.add_continuous("pw1"), m.add_continuous("pw2")}, {m.add_continuous("rw1"), m.add_continuous("rw2")}};
  AmbiguitySpec spec;
  spec.mean = {{50.0}, {40.0}};
  spec.variance = {{25.0}, {4.0}};
  const auto b = build_moment_soc_block(m, spec, v, 0);
  m.set_objective(LinExpr::var(v.pw[0], -1.0).add(v.pw[1], -1.0));
  const auto res = solve_misocp(m, {});
  REQUIRE(res.has_solution());
  CHECK(res.values[b.eps[0]] + res.values[b.eps[1]] <= 0.05 + 1e-7);
}

TEST_CASE("distribution-free spot check with Gaussian wind") {
  const double eps = 0.05;
  const double mu[2] = {50.0, 40.0};
  const double sd[2] = {5.0, 2.0};
  // Equal split of the budget; scheduled output at the block's margin.
  const double r = moment_soc_min_r(eps / 2.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  const int draws = 100000;
  int violated = 0;
  for (int k = 0; k < draws; ++k) {
    bool bad = false;
    for (int w = 0; w < 2; ++w) bad |= mu[w] + sd[w] * n(rng) < mu[w] - r * sd[w];
    violated += bad ? 1 : 0;
  }
  CHECK(static_cast<double>(violated) / draws <= eps + 3.0 * std::sqrt(eps / draws));
}

TEST_CASE("individual rows are implied by the joint block") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double eps = 0.05;
  for (int k = 0; k < 1000; ++k) {
    const double e1 = eps * u(rng);
    const double e2 = (eps - e1) * u(rng);
    const double sigma[2] = {1.0 + 9.0 * u(rng), 1.0 + 9.0 * u(rng)};
    const double e[2] = {e1, e2};
    for (int w = 0; w < 2; ++w) {
      if (e[w] <= 0.0) continue;
      const double q = 100.0 - moment_soc_min_r(e[w]) * sigma[w] - 5.0 * u(rng);
      CHECK(q <= 100.0 - cantelli_factor(eps) * sigma[w] + 1e-12);
    }
  }
}

TEST_CASE("SAA budgets") {
  ScenarioSet one;
  one.samples = 1;
  one.farms = 1;
  one.hours = 1;
  one.values = {30.0};
  OptModel m;
  WindVars v{{m.add_continuous("pw")}, {m.add_continuous("rw")}};
  const auto b1 = build_saa_block(m, one, {100.0}, v, 0.05, 0);
  CHECK(b1.budget == 0);
  CHECK_FALSE(b1.warning.empty());
  CHECK_FALSE(saa_feasible(one, 31.0, 0.05));
  CHECK(saa_feasible(one, 29.0, 0.05));

  const auto twenty = generate_scenarios({{50.0}}, {{5.0}}, {100.0}, 20, 1);
  OptModel m2;
  WindVars v2{{m2.add_continuous("pw")}, {m2.add_continuous("rw")}};
  const auto b20 = build_saa_block(m2, twenty, {100.0}, v2, 0.05, 0);
  CHECK(b20.budget == 1);
  CHECK(b20.z.size() == 20);
}

TEST_CASE("SAA block equals the empirical chance constraint on a 5-scenario toy") {
  ScenarioSet sc;
  sc.samples = 5;
  sc.farms = 1;
  sc.hours = 1;
  sc.values = {31.0, 24.0, 37.0, 28.0, 33.0};
  const double eps = 0.2;  // one scenario may be violated
  for (double q = 20.0; q <= 40.0; q += 0.5) {
    bool oracle = false;
    for (unsigned z = 0; z < 32 && !oracle; ++z) {
      if (__builtin_popcount(z) > 1) continue;
      bool ok = true;
      for (unsigned s = 0; s < 5; ++s) {
        if (!(z & (1u << s)) && q > sc.values[s]) ok = false;
      }
      oracle = ok;
    }
    CHECK_MESSAGE(saa_feasible(sc, q, eps) == oracle, "q = " << q);
  }
}

TEST_CASE("scenario generation is reproducible and truncated") {
  const auto a = generate_scenarios({{30.0}}, {{3.0}}, {50.0}, 100, 17);
  const auto b = generate_scenarios({{30.0}}, {{3.0}}, {50.0}, 100, 17);
  CHECK(a.values == b.values);
  const auto c = generate_scenarios({{50.0}}, {{5.0}}, {50.0}, 1000, 17);
  for (double x : c.values) CHECK(x <= 50.0);
}

TEST_CASE("scenario statistics are within standard-error bounds") {
  const auto sc = generate_scenarios({{100.0}}, {{5.0}}, {1000.0}, 20000, 2021);
  const auto spec = estimate_moments(sc, 20000);
  CHECK(std::abs(spec.mean[0][0] - 100.0) <= 0.12);
  CHECK(std::abs(std::sqrt(spec.variance[0][0]) - 5.0) <= 0.1);
}

TEST_CASE("sampling sigma modes") {
  CHECK(sampling_sigma(100.0, 0.05, VarianceMode::StdFraction) == doctest::Approx(5.0));
  CHECK(sampling_sigma(100.0, 0.05, VarianceMode::VarFraction) == doctest::Approx(std::sqrt(5.0)));
}
