#include "iegs/freq.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "iegs/error.hpp"

namespace iegs {

double FrequencySnapshot::total_pfr() const {
  double r = 0.0;
  for (double v : rg) r += v;
  for (double v : rw) r += v;
  return r;
}

double system_inertia(const IegsInstance& inst, const std::vector<double>& x, const std::vector<double>& y) {
  double h = 0.0;
  for (std::size_t i = 0; i < inst.generators.size(); ++i) {
    h += inst.generators[i].inertia * inst.generators[i].p_max * x.at(i);
  }
  for (std::size_t w = 0; w < inst.wind_farms.size(); ++w) {
    h += inst.wind_farms[w].vi_inertia * inst.wind_farms[w].capacity * y.at(w);
  }
  return h / inst.frequency.nominal;
}

FrequencySnapshot make_snapshot(const IegsInstance& inst, std::size_t hour, std::vector<double> x,
                                std::vector<double> y, std::vector<double> rg, std::vector<double> rw) {
  FrequencySnapshot s;
  s.hour = hour;
  s.inertia = system_inertia(inst, x, y);
  s.x = std::move(x);
  s.y = std::move(y);
  s.rg = std::move(rg);
  s.rw = std::move(rw);
  s.load = inst.load_level(hour);
  s.loss = series_at(inst.frequency.loss, hour, "dP_loss");
  return s;
}

void SwingResult::write_csv(std::ostream& out, std::size_t stride) const {
  stride = std::max<std::size_t>(stride, 1);
  out << "time_s,deviation_hz\n";
  for (std::size_t k = 0; k < deviation.size(); k += stride) {
    out << static_cast<double>(k) * dt << ',' << deviation[k] << '\n';
  }
}

SwingResult simulate_swing(const FrequencySnapshot& snap, const FrequencyParams& p, double dt, double horizon) {
  const double H = snap.inertia;
  if (!(H > 0.0)) throw NumericError("swing simulation requires positive system inertia");
  if (!(dt > 0.0 && dt <= 1e-3 + 1e-15)) throw NumericError("swing simulation requires 0 < dt <= 1 ms");
  if (!(horizon > 0.0)) throw NumericError("swing simulation requires a positive horizon");

  const double dP = std::abs(snap.loss);
  const double Dp = snap.damping(p);
  const double R = snap.total_pfr();

  SwingResult out;
  out.dt = dt;

  // With no PFR yet the trajectory is -(dP/D')(1 - exp(-D' t / 2H)); the ramp
  // starts when it crosses the dead band, but not before the dead time.
  double activation = kInf;
  if (dP > 0.0) {
    double crossing = kInf;
    if (Dp <= 0.0) {
      crossing = 2.0 * H * p.deadband / dP;
    } else if (dP > Dp * p.deadband) {
      crossing = -(2.0 * H / Dp) * std::log1p(-Dp * p.deadband / dP);
    }
    activation = std::max(p.dead_time, crossing);
  }
  out.activation_time = activation;

  const double Td = p.delivery_time;
  auto pfr = [&](double t) {
    if (t <= activation) return 0.0;
    const double s = t - activation;
    return s >= Td ? R : R * s / Td;
  };
  auto rhs = [&](double t, double f) { return (pfr(t) - dP - Dp * f) / (2.0 * H); };

  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  out.deviation.resize(steps + 1);
  double f = 0.0;
  out.deviation[0] = 0.0;
  out.initial_rocof = std::abs(rhs(0.0, 0.0));
  double rocof = out.initial_rocof;
  const auto rocof_steps = static_cast<std::size_t>(std::llround(0.5 / dt));
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double k1 = rhs(t, f);
    const double k2 = rhs(t + 0.5 * dt, f + 0.5 * dt * k1);
    const double k3 = rhs(t + 0.5 * dt, f + 0.5 * dt * k2);
    const double k4 = rhs(t + dt, f + dt * k3);
    const double next = f + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(next)) throw NumericError("swing simulation produced a non-finite state");
    if (k < rocof_steps) rocof = std::max(rocof, std::abs(next - f) / dt);
    f = next;
    out.deviation[k + 1] = f;
  }
  out.rocof = rocof;

  // The response is held at R once delivered, so with R > dP the frequency
  // overshoots above f0; only the under-frequency excursion is the nadir.
  std::size_t worst = 0;
  for (std::size_t k = 1; k < out.deviation.size(); ++k) {
    if (out.deviation[k] < out.deviation[worst]) worst = k;
  }
  out.nadir = std::max(0.0, -out.deviation[worst]);
  out.nadir_time = static_cast<double>(worst) * dt;

  // Once the ramp is complete the response is first order with time constant
  // 2H/D', so the limit follows from the final value and slope.
  const double t_end = static_cast<double>(steps) * dt;
  const double settled = Dp > 0.0 ? f + 2.0 * H * rhs(t_end, f) / Dp : f;
  out.qss = std::max(0.0, -settled);
  return out;
}

namespace {

struct KappaTerms {
  double Dp;   // D' [MW/Hz]
  double X;    // dP - D' df_DB [MW]
  double a;    // T_d D' X
  double rhs;  // D'^2 (df_max - df_DB) - D' X
};

KappaTerms kappa_terms(const FrequencyParams& p, double dP, double load) {
  KappaTerms k{};
  k.Dp = p.damping * load;
  if (!(k.Dp > 0.0)) throw NumericError("load damping D * P^D must be positive");
  k.X = dP - k.Dp * p.deadband;
  if (!(k.X > 0.0)) {
    throw NumericError("contingency must exceed D' * df_DB (disturbance absorbed inside the dead band)");
  }
  k.a = p.delivery_time * k.Dp * k.X;
  k.rhs = k.Dp * k.Dp * (p.nadir_max() - p.deadband) - k.Dp * k.X;
  return k;
}

double lhs(double kappa, const KappaTerms& k, double Td) {
  return 2.0 * kappa / Td * std::log(2.0 * kappa / (k.a + 2.0 * kappa));
}

double lhs_derivative(double kappa, const KappaTerms& k, double Td) {
  return 2.0 / Td * (std::log(2.0 * kappa / (k.a + 2.0 * kappa)) + k.a / (k.a + 2.0 * kappa));
}

}  // namespace

double nadir_closed_form(double R, double H, const FrequencyParams& p, double dP, double load) {
  if (!(R > 0.0) || !(H > 0.0)) throw NumericError("closed-form nadir requires positive R and H");
  const double Dp = p.damping * load;
  if (!(Dp > 0.0)) throw NumericError("load damping D * P^D must be positive");
  const double X = dP - Dp * p.deadband;
  const double rh2 = 2.0 * R * H;
  const double arg = rh2 / (p.delivery_time * Dp * X + rh2);
  if (!(arg > 0.0) || !std::isfinite(arg)) {
    throw NumericError("closed-form nadir: nonpositive log argument (requires dP > D' * df_DB)");
  }
  return rh2 / (p.delivery_time * Dp * Dp) * std::log(arg) + X / Dp + p.deadband;
}

double kappa_residual(double kappa, const FrequencyParams& p, double dP, double load) {
  const auto k = kappa_terms(p, dP, load);
  return lhs(kappa, k, p.delivery_time) - k.rhs;
}

double solve_kappa(const FrequencyParams& p, double dP, double load) {
  if (!(p.nadir_max() > p.deadband)) throw NumericError("nadir limit must exceed the dead band");
  const auto k = kappa_terms(p, dP, load);
  const double Td = p.delivery_time;
  // The left side falls monotonically from 0 (kappa -> 0) towards -D' X, so a
  // positive root exists exactly when the right side is negative.
  if (k.rhs >= 0.0) return 0.0;

  const double scale = k.Dp * k.X;
  const double tol = 1e-9 * scale;
  auto f = [&](double kappa) { return lhs(kappa, k, Td) - k.rhs; };

  double lo = 1e-6;
  double hi = 10.0 * Td * k.Dp * dP;
  if (f(lo) <= 0.0) {
    if (std::abs(f(lo)) <= tol) return lo;
    throw NumericError("kappa bracket: no sign change at the lower end");
  }
  int expansions = 0;
  while (f(hi) > 0.0) {
    if (++expansions > 200) throw NumericError("kappa bracket: no sign change found");
    lo = hi;
    hi *= 2.0;
  }

  constexpr int kMaxIter = 10000;
  double mid = 0.5 * (lo + hi);
  int iter = 0;
  for (; iter < kMaxIter; ++iter) {
    mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (std::abs(fm) <= 1e-3 * scale || hi - lo <= 1e-12 * hi) break;
  }
  // Newton polish, kept inside the bracket.
  double kappa = mid;
  for (; iter < kMaxIter; ++iter) {
    const double fk = f(kappa);
    if (std::abs(fk) <= tol) return kappa;
    if (fk > 0.0) {
      lo = kappa;
    } else {
      hi = kappa;
    }
    const double d = lhs_derivative(kappa, k, Td);
    double next = kappa - fk / d;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (next == kappa) return kappa;
    kappa = next;
  }
  throw NumericError("kappa root search exceeded the iteration cap");
}

double frequency_big_m(const IegsInstance& inst) {
  double m = 1.0;
  for (const auto& g : inst.generators) m += g.reserve_max;
  for (const auto& w : inst.wind_farms) m += w.reserve_max;
  return m;
}

FreqBlockInfo build_frequency_block(OptModel& model, const IegsInstance& inst, std::size_t hour,
                                    const FreqVars& vars, double kappa, double big_m) {
  if (!std::isfinite(kappa) || kappa < 0.0) throw ValidationError("frequency block: kappa missing or invalid");
  if (!(big_m > 0.0)) throw ValidationError("frequency block: big-M must be positive");
  const auto& f = inst.frequency;
  const std::size_t G = inst.generators.size();
  const std::size_t W = inst.wind_farms.size();
  if (vars.x.size() != G || vars.rg.size() != G || vars.y.size() != W || vars.rw.size() != W) {
    throw ValidationError("frequency block: variable handles do not match the instance");
  }
  const std::string h = "[" + std::to_string(hour) + "]";
  const double dP = std::abs(series_at(f.loss, hour, "dP_loss"));
  const double load = inst.load_level(hour);

  LinExpr total_r;
  for (int v : vars.rg) total_r.add(v);
  for (int v : vars.rw) total_r.add(v);

  // RoCoF: H_t >= |dP| / (2 RoCoF_max).
  LinExpr inertia;
  for (std::size_t i = 0; i < G; ++i) {
    const auto& g = inst.generators[i];
    inertia.add(vars.x[i], g.inertia * g.p_max / f.nominal);
  }
  for (std::size_t w = 0; w < W; ++w) {
    const auto& wf = inst.wind_farms[w];
    inertia.add(vars.y[w], wf.vi_inertia * wf.capacity / f.nominal);
  }
  model.add_row(inertia, Sense::GreaterEqual, dP / (2.0 * f.rocof_max), "freq_rocof" + h);

  // Nadir: H_t * R_t >= kappa with X = x * R and Y = y * R linearized by big-M.
  FreqBlockInfo info;
  LinExpr product;
  auto link = [&](int status, int aux, const std::string& tag) {
    const LinExpr a = LinExpr::var(aux);
    const LinExpr s = LinExpr::var(status);
    model.add_row(a + big_m * s, Sense::GreaterEqual, 0.0, "freq_bigm_" + tag + "_a" + h);
    model.add_row(a - big_m * s, Sense::LessEqual, 0.0, "freq_bigm_" + tag + "_b" + h);
    model.add_row(a - total_r - big_m * s, Sense::GreaterEqual, -big_m, "freq_bigm_" + tag + "_c" + h);
    model.add_row(a - total_r + big_m * s, Sense::LessEqual, big_m, "freq_bigm_" + tag + "_d" + h);
    info.big_m_rows += 4;
  };
  for (std::size_t i = 0; i < G; ++i) {
    const auto& g = inst.generators[i];
    const int aux = model.add_continuous("X[" + g.id + "]" + h, -kInf, kInf);
    info.aux_gen.push_back(aux);
    link(vars.x[i], aux, g.id);
    product.add(aux, g.inertia * g.p_max / f.nominal);
  }
  for (std::size_t w = 0; w < W; ++w) {
    const auto& wf = inst.wind_farms[w];
    const int aux = model.add_continuous("Y[" + wf.id + "]" + h, -kInf, kInf);
    info.aux_wind.push_back(aux);
    link(vars.y[w], aux, wf.id);
    product.add(aux, wf.vi_inertia * wf.capacity / f.nominal);
  }
  model.add_row(product, Sense::GreaterEqual, kappa, "freq_nadir" + h);

  // QSS: (dP - R_t) / D' <= df_qss_max.
  const double Dp = f.damping * load;
  model.add_row(total_r, Sense::GreaterEqual, dP - Dp * f.qss_max, "freq_qss" + h);
  return info;
}

}  // namespace iegs
