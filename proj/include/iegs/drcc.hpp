#pragma once

// Wind uncertainty: scenario generation, moment estimation, and the constraint
// blocks that keep scheduled wind output plus reserve below the uncertain
// available wind power (joint moment-based and unimodal SOC inner
// approximations, sample average approximation, individual constraints).

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "iegs/instance.hpp"
#include "iegs/optmodel.hpp"

namespace iegs {

/// Mean/variance per (farm, hour) and the joint violation budget.
struct AmbiguitySpec {
  std::vector<std::vector<double>> mean;      // [farm][hour] MW
  std::vector<std::vector<double>> variance;  // [farm][hour] MW^2
  double epsilon = 0.05;
  bool unimodal = false;

  std::size_t farms() const { return mean.size(); }
  double sigma(std::size_t w, std::size_t t) const;
  void validate(std::size_t horizon) const;
};

enum class Provenance { InSample, OutOfSample };

std::string_view to_string(Provenance p);

struct ScenarioSet {
  std::size_t samples = 0;
  std::size_t farms = 0;
  std::size_t hours = 0;
  std::vector<double> values;  // sample-major, then farm, then hour
  std::uint64_t seed = 0;
  Provenance provenance = Provenance::InSample;
  std::size_t offset = 0;  // index of the first sample within its generated stream

  double at(std::size_t s, std::size_t w, std::size_t t) const {
    return values[(s * farms + w) * hours + t];
  }
  double& at(std::size_t s, std::size_t w, std::size_t t) { return values[(s * farms + w) * hours + t]; }

  /// The first n samples.
  ScenarioSet head(std::size_t n) const;

  void write_csv(std::ostream& out) const;
  void write_sidecar(std::ostream& out, VarianceMode mode) const;
};

/// Standard deviation used for sampling from a forecast under the configured
/// mode: sigma = d * mu (std_fraction) or sigma^2 = d * mu (var_fraction).
double sampling_sigma(double mu, double dispersion, VarianceMode mode);

/// Independent Gaussian draws with the given mean/std per (farm, hour),
/// truncated to [0, capacity]. Draw order is sample, farm, hour.
ScenarioSet generate_scenarios(const std::vector<std::vector<double>>& mean,
                               const std::vector<std::vector<double>>& sigma,
                               const std::vector<double>& capacity, std::size_t samples, std::uint64_t seed,
                               Provenance provenance = Provenance::InSample);

/// One stream of in+out samples for the instance's uncertainty settings,
/// split into disjoint in-sample and out-of-sample parts.
struct ScenarioSplit {
  ScenarioSet in_sample;
  ScenarioSet out_of_sample;
};
ScenarioSplit generate_split(const IegsInstance& inst);

/// Sample mean and unbiased variance over the first n samples.
AmbiguitySpec estimate_moments(const ScenarioSet& samples, std::size_t n, double epsilon = 0.05,
                               bool unimodal = false);

/// Moments from the instance when given explicitly, otherwise estimated from
/// the first n in-sample scenarios.
AmbiguitySpec ambiguity_for(const IegsInstance& inst, const ScenarioSet& in_sample, std::size_t n);

// Safety factors: exact one-sided bounds and the minimal r admitted by the
// conic approximations at a fixed per-constraint risk e.
double cantelli_factor(double e);
double vp_factor(double e);
double moment_soc_min_r(double e);
double unimodal_soc_min_r(double e);

/// Wind dispatch and reserve handles of one hour.
struct WindVars {
  std::vector<int> pw;
  std::vector<int> rw;
};

struct DrccBlock {
  std::vector<int> eps;
  std::vector<int> r;
  std::vector<int> s;
  int budget_row = -1;
};

/// Joint constraint under mean/variance ambiguity:
///   r sigma <= mu - P^W - R^W, ||(2s, 1)|| <= 2 e + 1, ||(2, r - s)|| <= r + s,
///   sum_w e_w <= epsilon, e, r, s >= 0.
DrccBlock build_moment_soc_block(OptModel& model, const AmbiguitySpec& spec, const WindVars& vars,
                                 std::size_t hour);

/// Same shape for unimodal distributions with constants 4/9 and 4/3.
/// Requires epsilon <= 1/6.
DrccBlock build_unimodal_soc_block(OptModel& model, const AmbiguitySpec& spec, const WindVars& vars,
                                   std::size_t hour);

struct SaaBlock {
  std::vector<int> z;
  std::size_t budget = 0;
  std::string warning;
};

/// Scenario binaries z_s shared across farms: P^W + R^W <= P~(s) + Wmax z_s,
/// sum_s z_s <= floor(epsilon S).
SaaBlock build_saa_block(OptModel& model, const ScenarioSet& scenarios, const std::vector<double>& capacity,
                         const WindVars& vars, double epsilon, std::size_t hour);

/// One linear row per farm with the exact single-constraint factor at e_ind.
void build_individual_block(OptModel& model, const AmbiguitySpec& spec, const WindVars& vars, double eps_ind,
                            bool unimodal, std::size_t hour);

}  // namespace iegs
