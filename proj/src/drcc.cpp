#include "iegs/drcc.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include <json.hpp>

#include "iegs/error.hpp"

namespace iegs {

namespace {

constexpr double kUnimodalEpsMax = 1.0 / 6.0;

void require_unimodal_eps(double e) {
  if (!(e > 0.0 && e <= kUnimodalEpsMax + 1e-15)) {
    throw ValidationError("unimodal ambiguity reformulation requires 0 < epsilon <= 1/6 "
                          "(hypothesis of the one-sided Vysochanskij-Petunin bound), got " +
                          std::to_string(e));
  }
}

std::string tag(std::size_t w, std::size_t t) {
  return "[" + std::to_string(w) + "," + std::to_string(t) + "]";
}

}  // namespace

double AmbiguitySpec::sigma(std::size_t w, std::size_t t) const { return std::sqrt(variance.at(w).at(t)); }

void AmbiguitySpec::validate(std::size_t horizon) const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
  if (variance.size() != mean.size()) throw ValidationError("ambiguity set: mean/variance farm count mismatch");
  for (std::size_t w = 0; w < mean.size(); ++w) {
    if (mean[w].size() != horizon || variance[w].size() != horizon) {
      throw ValidationError("ambiguity set: series length differs from the horizon");
    }
    for (double v : variance[w]) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("ambiguity set: invalid variance");
    }
  }
  if (unimodal) require_unimodal_eps(epsilon);
}

std::string_view to_string(Provenance p) {
  return p == Provenance::InSample ? "in-sample" : "out-of-sample";
}

ScenarioSet ScenarioSet::head(std::size_t n) const {
  if (n > samples) throw ValidationError("requested more scenarios than available");
  ScenarioSet out = *this;
  out.samples = n;
  out.values.resize(n * farms * hours);
  return out;
}

void ScenarioSet::write_csv(std::ostream& out) const {
  out << "s,w,t,value\n";
  out.precision(17);
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t w = 0; w < farms; ++w) {
      for (std::size_t t = 0; t < hours; ++t) out << s << ',' << w << ',' << t << ',' << at(s, w, t) << '\n';
    }
  }
}

void ScenarioSet::write_sidecar(std::ostream& out, VarianceMode mode) const {
  nlohmann::json j{{"seed", seed},
                   {"provenance", std::string(to_string(provenance))},
                   {"offset", offset},
                   {"samples", samples},
                   {"farms", farms},
                   {"hours", hours},
                   {"variance_mode", mode == VarianceMode::StdFraction ? "std_fraction" : "var_fraction"}};
  out << j.dump(2) << '\n';
}

double sampling_sigma(double mu, double dispersion, VarianceMode mode) {
  return mode == VarianceMode::StdFraction ? dispersion * mu : std::sqrt(dispersion * std::max(mu, 0.0));
}

ScenarioSet generate_scenarios(const std::vector<std::vector<double>>& mean,
                               const std::vector<std::vector<double>>& sigma,
                               const std::vector<double>& capacity, std::size_t samples, std::uint64_t seed,
                               Provenance provenance) {
  if (samples < 1) throw ValidationError("scenario generation requires at least one sample");
  if (sigma.size() != mean.size() || capacity.size() != mean.size()) {
    throw ValidationError("scenario generation: inconsistent farm counts");
  }
  ScenarioSet set;
  set.samples = samples;
  set.farms = mean.size();
  set.hours = mean.empty() ? 0 : mean.front().size();
  set.seed = seed;
  set.provenance = provenance;
  set.values.resize(samples * set.farms * set.hours);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t w = 0; w < set.farms; ++w) {
      for (std::size_t t = 0; t < set.hours; ++t) {
        const double v = mean[w][t] + sigma[w][t] * normal(rng);
        set.at(s, w, t) = std::clamp(v, 0.0, capacity[w]);
      }
    }
  }
  return set;
}

ScenarioSplit generate_split(const IegsInstance& inst) {
  const auto& u = inst.uncertainty;
  const std::size_t W = inst.wind_farms.size();
  std::vector<std::vector<double>> mean(W), sigma(W);
  std::vector<double> capacity(W);
  for (std::size_t w = 0; w < W; ++w) {
    capacity[w] = inst.wind_farms[w].capacity;
    if (u.has_moments()) {
      mean[w] = u.mean[w];
      sigma[w].resize(inst.horizon);
      for (std::size_t t = 0; t < inst.horizon; ++t) sigma[w][t] = std::sqrt(u.variance[w][t]);
    } else {
      mean[w] = inst.wind_farms[w].forecast;
      sigma[w].resize(inst.horizon);
      for (std::size_t t = 0; t < inst.horizon; ++t) {
        sigma[w][t] = sampling_sigma(mean[w][t], u.dispersion, u.variance_mode);
      }
    }
  }
  const ScenarioSet all = generate_scenarios(mean, sigma, capacity, u.in_sample + u.out_of_sample, u.seed);
  ScenarioSplit split;
  split.in_sample = all.head(u.in_sample);
  split.out_of_sample = all;
  split.out_of_sample.samples = u.out_of_sample;
  split.out_of_sample.provenance = Provenance::OutOfSample;
  split.out_of_sample.offset = u.in_sample;
  const auto stride = all.farms * all.hours;
  split.out_of_sample.values.assign(all.values.begin() + static_cast<std::ptrdiff_t>(u.in_sample * stride),
                                    all.values.end());
  // Keep shapes meaningful when there are no farms.
  split.in_sample.hours = split.out_of_sample.hours = inst.horizon;
  return split;
}

AmbiguitySpec estimate_moments(const ScenarioSet& samples, std::size_t n, double epsilon, bool unimodal) {
  if (n < 2) throw ValidationError("moment estimation needs at least two samples (variance undefined)");
  if (n > samples.samples) throw ValidationError("moment estimation: n exceeds the number of samples");
  AmbiguitySpec spec;
  spec.epsilon = epsilon;
  spec.unimodal = unimodal;
  spec.mean.assign(samples.farms, std::vector<double>(samples.hours, 0.0));
  spec.variance.assign(samples.farms, std::vector<double>(samples.hours, 0.0));
  for (std::size_t w = 0; w < samples.farms; ++w) {
    for (std::size_t t = 0; t < samples.hours; ++t) {
      double sum = 0.0;
      for (std::size_t s = 0; s < n; ++s) sum += samples.at(s, w, t);
      const double mu = sum / static_cast<double>(n);
      double ss = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        const double d = samples.at(s, w, t) - mu;
        ss += d * d;
      }
      spec.mean[w][t] = mu;
      spec.variance[w][t] = ss / static_cast<double>(n - 1);
    }
  }
  return spec;
}

AmbiguitySpec ambiguity_for(const IegsInstance& inst, const ScenarioSet& in_sample, std::size_t n) {
  const auto& u = inst.uncertainty;
  AmbiguitySpec spec;
  if (u.has_moments()) {
    spec.mean = u.mean;
    spec.variance = u.variance;
    spec.epsilon = u.epsilon;
    spec.unimodal = u.unimodal;
  } else if (inst.wind_farms.empty()) {
    spec.epsilon = u.epsilon;
    spec.unimodal = u.unimodal;
  } else {
    spec = estimate_moments(in_sample, n, u.epsilon, u.unimodal);
  }
  return spec;
}

double cantelli_factor(double e) { return std::sqrt((1.0 - e) / e); }
double vp_factor(double e) { return std::sqrt((4.0 / 9.0 - e) / e); }
double moment_soc_min_r(double e) { return 1.0 / std::sqrt(e * (1.0 + e)); }
double unimodal_soc_min_r(double e) { return (4.0 / 9.0) / std::sqrt(e * (4.0 / 9.0 + e)); }

namespace {

DrccBlock build_soc_block(OptModel& model, const AmbiguitySpec& spec, const WindVars& vars, std::size_t hour,
                          double a, double b, const char* prefix) {
  const std::size_t W = vars.pw.size();
  if (vars.rw.size() != W || spec.farms() != W) throw ValidationError("wind handles do not match the ambiguity set");
  DrccBlock block;
  LinExpr budget;
  const std::string p(prefix);
  for (std::size_t w = 0; w < W; ++w) {
    const auto t = tag(w, hour);
    const int e = model.add_continuous(p + "_eps" + t);
    const int r = model.add_continuous(p + "_r" + t);
    const int s = model.add_continuous(p + "_s" + t);
    block.eps.push_back(e);
    block.r.push_back(r);
    block.s.push_back(s);
    budget.add(e);
    const double sigma = spec.sigma(w, hour);
    model.add_row(LinExpr::var(r, sigma).add(vars.pw[w]).add(vars.rw[w]), Sense::LessEqual, spec.mean[w][hour],
                  p + "_margin" + t);
    // ||(2s, a)|| <= 2e + a  <=>  s^2 <= e (e + a)
    model.add_soc({LinExpr::var(s, 2.0), LinExpr(a)}, LinExpr::var(e, 2.0) + LinExpr(a), p + "_cone_s" + t);
    // ||(b, r - s)|| <= r + s  <=>  r s >= b^2 / 4
    model.add_soc({LinExpr(b), LinExpr::var(r).add(s, -1.0)}, LinExpr::var(r).add(s), p + "_cone_r" + t);
  }
  block.budget_row = model.add_row(budget, Sense::LessEqual, spec.epsilon, p + "_budget[" + std::to_string(hour) + "]");
  return block;
}

}  // namespace

DrccBlock build_moment_soc_block(OptModel& model, const AmbiguitySpec& spec, const WindVars& vars,
                                 std::size_t hour) {
  if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
  return build_soc_block(model, spec, vars, hour, 1.0, 2.0, "drcc");
}

DrccBlock build_unimodal_soc_block(OptModel& model, const AmbiguitySpec& spec, const WindVars& vars,
                                   std::size_t hour) {
  require_unimodal_eps(spec.epsilon);
  return build_soc_block(model, spec, vars, hour, 4.0 / 9.0, 4.0 / 3.0, "drcc");
}

SaaBlock build_saa_block(OptModel& model, const ScenarioSet& scenarios, const std::vector<double>& capacity,
                         const WindVars& vars, double epsilon, std::size_t hour) {
  if (scenarios.samples < 1) throw ValidationError("sample average approximation needs at least one scenario");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
  const std::size_t W = vars.pw.size();
  if (scenarios.farms != W || capacity.size() != W) throw ValidationError("scenario farms do not match wind handles");
  SaaBlock block;
  block.budget = static_cast<std::size_t>(std::floor(epsilon * static_cast<double>(scenarios.samples) + 1e-12));
  if (block.budget == 0) block.warning = "zero violation budget: every scenario must be satisfied";
  const std::string h = "[" + std::to_string(hour) + "]";
  LinExpr count;
  for (std::size_t s = 0; s < scenarios.samples; ++s) {
    const int z = model.add_binary("saa_z[" + std::to_string(s) + "," + std::to_string(hour) + "]");
    block.z.push_back(z);
    count.add(z);
    for (std::size_t w = 0; w < W; ++w) {
      model.add_row(LinExpr::var(vars.pw[w]).add(vars.rw[w]).add(z, -capacity[w]), Sense::LessEqual,
                    scenarios.at(s, w, hour), "saa_cover[" + std::to_string(s) + "," + std::to_string(w) + "," +
                                                  std::to_string(hour) + "]");
    }
  }
  model.add_row(count, Sense::LessEqual, static_cast<double>(block.budget), "saa_budget" + h);
  return block;
}

void build_individual_block(OptModel& model, const AmbiguitySpec& spec, const WindVars& vars, double eps_ind,
                            bool unimodal, std::size_t hour) {
  if (!(eps_ind > 0.0 && eps_ind < 1.0)) throw ValidationError("individual epsilon must lie in (0, 1)");
  if (unimodal) require_unimodal_eps(eps_ind);
  const double k = unimodal ? vp_factor(eps_ind) : cantelli_factor(eps_ind);
  for (std::size_t w = 0; w < vars.pw.size(); ++w) {
    model.add_row(LinExpr::var(vars.pw[w]).add(vars.rw[w]), Sense::LessEqual,
                  spec.mean.at(w).at(hour) - k * spec.sigma(w, hour), "drcc_ind" + tag(w, hour));
  }
}

}  // namespace iegs
