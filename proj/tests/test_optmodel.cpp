#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "iegs/error.hpp"
#include "iegs/optmodel.hpp"
#include "misocp_oracle.hpp"

using namespace iegs;

namespace {

OptModel cone_example() {
  OptModel m;
  const int x = m.add_continuous("x", -kInf, kInf);
  m.add_soc({LinExpr(1.0), LinExpr::var(x)}, LinExpr(2.0), "disk");
  m.set_objective(LinExpr::var(x));
  return m;
}

}  // namespace

TEST_CASE("pure MILP takes one backend call and no cuts") {
  OptModel m;
  const int a = m.add_binary("a");
  const int b = m.add_binary("b");
  const int x = m.add_continuous("x", 0.0, 10.0);
  m.add_row(LinExpr::var(a).add(b), Sense::LessEqual, 1.0, "pick");
  m.add_row(LinExpr::var(x).add(a, -4.0).add(b, -6.0), Sense::LessEqual, 0.0, "cap");
  m.set_objective(LinExpr::var(x, -1.0));
  const auto r = solve_misocp(m, {});
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.backend_calls == 1);
  CHECK(r.cuts == 0);
  CHECK(r.objective == doctest::Approx(-6.0));
}

TEST_CASE("analytic cone boundary") {
  const auto r = solve_misocp(cone_example(), {});
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(std::abs(r.values[0] + std::sqrt(3.0)) <= 1e-6);
  CHECK(r.max_soc_violation <= 1e-6);
}

TEST_CASE("infeasible model reports no values") {
  OptModel m;
  const int x = m.add_continuous("x", 0.0, 1.0);
  m.add_row(LinExpr::var(x), Sense::GreaterEqual, 2.0, "impossible");
  const auto r = solve_misocp(m, {});
  CHECK(r.status == SolveStatus::Infeasible);
  CHECK(r.values.empty());
}

TEST_CASE("small mixed-integer cone programs agree with enumeration") {
  std::mt19937_64 rng(20211);
  SolverOptions opt;
  opt.set_mip_gap(1e-9);
  for (int k = 0; k < 20; ++k) {
    const auto p = iegs::test::random_misocp(rng);
    const auto expected = p.brute_force();
    const auto r = solve_misocp(p.model(), opt);
    if (!expected) {
      CHECK(r.status == SolveStatus::Infeasible);
      continue;
    }
    REQUIRE(r.has_solution());
    CHECK_MESSAGE(std::abs(r.objective - *expected) <= 1e-4, "instance " << k);
  }
}

TEST_CASE("gradient cuts never cut off cone-feasible points") {
  // ||(x0 - 1, 2 x1)|| <= x2 + 0.5
  OptModel m;
  for (int i = 0; i < 3; ++i) m.add_continuous("x" + std::to_string(i), -kInf, kInf);
  m.add_soc({LinExpr::var(0) + LinExpr(-1.0), LinExpr::var(1, 2.0)}, LinExpr::var(2) + LinExpr(0.5), "k");
  const auto& row = m.socs()[0];
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-10.0, 10.0), pos(0.0, 5.0);
  for (int c = 0; c < 20; ++c) {
    const std::vector<double> hat{u(rng), u(rng), u(rng)};
    LinExpr cut;
    REQUIRE(soc_gradient_cut(row, hat, cut));
    for (int k = 0; k < 1000; ++k) {
      std::vector<double> p{u(rng), u(rng), 0.0};
      p[2] = std::hypot(p[0] - 1.0, 2.0 * p[1]) - 0.5 + pos(rng);
      REQUIRE(row.violation(p) <= 1e-12);
      CHECK(cut.evaluate(p) <= 1e-9 * (1.0 + std::abs(p[2])));
    }
  }
}

TEST_CASE("cut at the cone apex is skipped") {
  OptModel m;
  m.add_continuous("x", -kInf, kInf);
  m.add_continuous("t", 0.0, kInf);
  m.add_soc({LinExpr::var(0)}, LinExpr::var(1), "k");
  LinExpr cut;
  CHECK_FALSE(soc_gradient_cut(m.socs()[0], {0.0, 0.0}, cut));
}

TEST_CASE("identical inputs give identical cut sequences") {
  std::mt19937_64 rng(77);
  const auto p = iegs::test::random_misocp(rng);
  const auto a = solve_misocp(p.model(), {});
  const auto b = solve_misocp(p.model(), {});
  CHECK(a.violation_history == b.violation_history);
  CHECK(a.cuts == b.cuts);
  CHECK(a.values == b.values);
}

TEST_CASE("solver options validation") {
  SolverOptions o;
  CHECK(o.mip_gap == 0.01);
  CHECK_THROWS_AS(o.set_mip_gap(1.5), ValidationError);
  CHECK_THROWS_AS(o.set_mip_gap(-0.1), ValidationError);
  CHECK_THROWS_AS(o.set_time_limit(0.0), ValidationError);
  CHECK_THROWS_AS(make_backend("cplex-please"), Error);
}

TEST_CASE("model validation catches dangling references and bad binaries") {
  OptModel m;
  m.add_continuous("x");
  m.add_row(LinExpr::var(3), Sense::LessEqual, 1.0, "dangling");
  CHECK_THROWS_AS(m.validate(), ValidationError);

  OptModel b;
  b.add_var("z", VarKind::Binary, 0.0, 2.0);
  CHECK_THROWS_AS(b.validate(), ValidationError);

  OptModel c;
  c.add_continuous("x");
  c.add_soc({}, LinExpr::var(0), "empty");
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("conic round trip") {
  SUBCASE("empty model") {
    std::stringstream s;
    write_conic(OptModel{}, s);
    const auto back = read_conic(s);
    CHECK(back.num_vars() == 0);
    CHECK(back.rows().empty());
    CHECK(back.socs().empty());
  }
  SUBCASE("cone example") {
    const auto m = cone_example();
    std::stringstream s;
    write_conic(m, s);
    const auto back = read_conic(s);
    CHECK(back.num_vars() == m.num_vars());
    CHECK(back.rows().size() == m.rows().size());
    CHECK(back.socs().size() == m.socs().size());
    CHECK(back.checksum() == m.checksum());
  }
  SUBCASE("mixed model keeps coefficients bit-exact") {
    std::mt19937_64 rng(9);
    const auto m = iegs::test::random_misocp(rng).model();
    std::stringstream s;
    write_conic(m, s);
    const auto back = read_conic(s);
    CHECK(back.checksum() == m.checksum());
    CHECK(back.num_binaries() == 2);
  }
}

TEST_CASE("truncated conic file is a parse error") {
  std::stringstream s("CONIC 1\nVARS 2\nx C 0 1\n");
  CHECK_THROWS_AS(read_conic(s), ParseError);
}
