#include <doctest.h>

#include <sstream>

#include "iegs/error.hpp"
#include "iegs/eval.hpp"
#include "support.hpp"

using namespace iegs;

namespace {

using Grid = std::vector<std::vector<double>>;

ScenarioSet out_samples(std::vector<double> values, std::size_t farms = 1, std::size_t hours = 1) {
  ScenarioSet s;
  s.farms = farms;
  s.hours = hours;
  s.samples = values.size() / (farms * hours);
  s.values = std::move(values);
  s.provenance = Provenance::OutOfSample;
  return s;
}

// Commitment-only schedule for the two-unit toy: everything idle except x.
ScheduleSolution idle_schedule(const IegsInstance& inst, double on) {
  const std::size_t T = inst.horizon;
  ScheduleSolution s;
  s.status = SolveStatus::Optimal;
  s.variant = resolve_variant(inst, VariantConfig{Variant::NoNgs, 0, {}, {}});
  auto grid = [&](std::size_t n, double v) { return std::vector<std::vector<double>>(n, std::vector<double>(T, v)); };
  s.x = grid(2, on);
  s.zu = s.zd = s.p = s.rg = grid(2, 0.0);
  s.y = s.pw = s.rw = grid(1, 0.0);
  return s;
}

}  // namespace

TEST_CASE("EJVP trivial cases") {
  const auto sc = out_samples({10.0, 20.0, 30.0, 40.0});
  CHECK(compute_ejvp(Grid{{0.0}}, sc) == 0.0);
  CHECK(compute_ejvp(Grid{{50.0}}, sc) == 100.0);
}

TEST_CASE("EJVP on ten hand-listed samples") {
  const auto sc = out_samples({3.1, 9.7, 4.4, 8.2, 1.0, 6.5, 7.3, 5.9, 2.8, 3.6});
  // Only the smallest sample (1.0) falls below 2.0.
  CHECK(compute_ejvp(Grid{{2.0}}, sc) == doctest::Approx(10.0));
  CHECK(compute_ejvp(Grid{{2.0}}, sc, 4) == doctest::Approx(10.0));
}

TEST_CASE("EJVP is horizon-wide, per-hour mode is available") {
  // Two samples, one farm, two hours.
  const auto sc = out_samples({5.0, 1.0, 1.0, 5.0}, 1, 2);
  CHECK(compute_ejvp(Grid{{2.0, 2.0}}, sc) == doctest::Approx(100.0));
  ScheduleSolution sol;
  sol.pw = {{2.0, 2.0}};
  sol.rw = {{0.0, 0.0}};
  const auto per_hour = compute_ejvp_per_hour(sol, sc);
  REQUIRE(per_hour.size() == 2);
  CHECK(per_hour[0] == doctest::Approx(50.0));
  CHECK(per_hour[1] == doctest::Approx(50.0));
}

TEST_CASE("EJVP refuses in-sample scenarios") {
  auto sc = out_samples({1.0, 2.0});
  sc.provenance = Provenance::InSample;
  CHECK_THROWS_AS(compute_ejvp(Grid{{0.0}}, sc), ValidationError);
}

TEST_CASE("EJVP is monotone and deterministic") {
  const auto sc = generate_scenarios({{30.0, 40.0}}, {{3.0, 4.0}}, {50.0}, 5000, 3, Provenance::OutOfSample);
  double prev = -1.0;
  for (double q = 20.0; q <= 50.0; q += 1.0) {
    const double e = compute_ejvp(Grid{{q, q + 5.0}}, sc, 3);
    CHECK(e >= prev);
    CHECK(e == compute_ejvp(Grid{{q, q + 5.0}}, sc, 1));
    prev = e;
  }
}

TEST_CASE("frequency audit: zero contingency passes, zero inertia is catastrophic") {
  const auto quiet = iegs::test::toy_instance(2, 120.0, 0.0);
  const auto audit = audit_frequency(idle_schedule(quiet, 1.0), quiet);
  CHECK(audit.all_pass());

  const auto inst = iegs::test::toy_instance(2);
  const auto dark = audit_frequency(idle_schedule(inst, 0.0), inst);
  CHECK(dark.failing_hours() == 2);
  CHECK(dark.hours[0].catastrophic);
  std::ostringstream csv;
  dark.write_csv(csv);
  CHECK(csv.str().find("hour") != std::string::npos);
}

TEST_CASE("frequency audit agrees with the scheduled frequency rows") {
  const auto inst = iegs::test::toy_instance(4);
  const auto sol = run_algorithm1(inst, VariantConfig{Variant::DrFcucM, 0, {}, {}});
  REQUIRE(sol.ok());
  const auto audit = audit_frequency(sol, inst);
  CHECK(audit.all_pass());
  for (const auto& h : audit.hours) CHECK(h.nadir <= inst.frequency.nadir_max() + 1e-3);
}

TEST_CASE("gas audit verdicts on toys") {
  const auto inst = parse_instance(iegs::test::add_gas(iegs::test::toy_json(2), 20.0, 5.0, true).dump());
  SUBCASE("idle gas-fired unit") {
    const auto a = audit_gas_feasibility(idle_schedule(inst, 1.0), inst);
    CHECK(a.verdict == GasVerdict::Feasible);
    CHECK(a.total_slack <= a.threshold);
  }
  SUBCASE("gas-fired unit above source capacity") {
    auto s = idle_schedule(inst, 1.0);
    s.p[1] = {80.0, 80.0};
    s.rg[1] = {15.0, 15.0};
    const auto a = audit_gas_feasibility(s, inst);
    CHECK(a.verdict == GasVerdict::Infeasible);
    CHECK(a.total_slack > a.threshold);
    REQUIRE_FALSE(a.slack_nodes.empty());
    CHECK(a.slack_nodes.front() == "N2");
  }
}

TEST_CASE("report rows and table") {
  const auto inst = iegs::test::toy_instance(2);
  const auto rows = compare_variants(inst, {Variant::DrFcucM, Variant::NoFc}, {20});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].variant == "dr-m");
  CHECK(rows[1].variant == "no-fc");
  for (const auto& r : rows) {
    CHECK(r.error.empty());
    CHECK(r.ejvp >= 0.0);
    CHECK(r.ejvp <= 100.0);
    CHECK(r.cost.total >= 0.0);
  }
  CHECK(reports_to_json(rows).find("\"dr-m\"") != std::string::npos);
  const auto table = reports_to_table(rows);
  CHECK(table.find("no-fc") != std::string::npos);
  std::ostringstream csv;
  write_hourly_csv(csv, rows, "nadir");
  CHECK(!csv.str().empty());
  CHECK_THROWS(write_hourly_csv(csv, rows, "voltage"));
}
