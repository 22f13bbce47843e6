#pragma once

// Post-contingency frequency dynamics: swing-equation simulation, the closed
// nadir expression, the inertia-response product kappa, and the linear rows
// that enforce RoCoF, nadir and quasi-steady-state limits.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "iegs/instance.hpp"
#include "iegs/optmodel.hpp"

namespace iegs {

/// System state of one hour as seen by the frequency response.
struct FrequencySnapshot {
  std::size_t hour = 0;
  std::vector<double> x;   // generator status
  std::vector<double> y;   // virtual-inertia status per wind farm
  std::vector<double> rg;  // PFR of generators [MW]
  std::vector<double> rw;  // PFR of wind farms [MW]
  double load = 0.0;       // P^D_t [MW]
  double loss = 0.0;       // dP^Loss_t [MW]
  double inertia = 0.0;    // H_t [MW s/Hz]

  double total_pfr() const;
  double damping(const FrequencyParams& p) const { return p.damping * load; }
};

/// H_t = (sum H_i Pmax_i x_i + sum H_w Wmax_w y_w) / f0.
double system_inertia(const IegsInstance& inst, const std::vector<double>& x, const std::vector<double>& y);

FrequencySnapshot make_snapshot(const IegsInstance& inst, std::size_t hour, std::vector<double> x,
                                std::vector<double> y, std::vector<double> rg, std::vector<double> rw);

struct SwingResult {
  double dt = 0.0;
  std::vector<double> deviation;  // f - f0 [Hz] at k*dt
  double activation_time = 0.0;   // start of the PFR ramp [s]; +inf if never
  double rocof = 0.0;             // max |d(df)/dt| over the first 500 ms [Hz/s]
  double initial_rocof = 0.0;     // |slope| at t = 0+
  double nadir = 0.0;             // deepest drop f0 - f [Hz]
  double nadir_time = 0.0;
  double qss = 0.0;               // settled under-frequency deviation [Hz]

  void write_csv(std::ostream& out, std::size_t stride = 1) const;
};

/// RK4 integration of 2H d(df)/dt + D' df = R(t) - dP. The aggregate PFR ramp
/// starts once the dead time has elapsed and the deviation has left the dead
/// band, rises linearly over T_d, then stays at R_t.
SwingResult simulate_swing(const FrequencySnapshot& snapshot, const FrequencyParams& params, double dt = 1e-3,
                           double horizon = 60.0);

/// |nadir deviation| for PFR R and inertia H when the nadir falls inside the
/// ramp. Requires R, H > 0 and dP > D' * df_DB.
double nadir_closed_form(double R, double H, const FrequencyParams& params, double dP, double load);

/// Residual of the kappa equation at `kappa`, in MW^2/Hz.
double kappa_residual(double kappa, const FrequencyParams& params, double dP, double load);

/// Smallest product R*H for which the closed-form nadir stays within
/// f0 - f_min. Returns 0 when damping alone already holds the nadir
/// (dP <= D' * (f0 - f_min)). Throws NumericError if dP <= D' * df_DB.
double solve_kappa(const FrequencyParams& params, double dP, double load);

/// Variable handles of one hour consumed by the frequency rows.
struct FreqVars {
  std::vector<int> x, y, rg, rw;
};

/// Big-M constant: sum of all PFR limits plus one.
double frequency_big_m(const IegsInstance& inst);

struct FreqBlockInfo {
  std::vector<int> aux_gen;   // X_{i,t}
  std::vector<int> aux_wind;  // Y_{w,t}
  std::size_t big_m_rows = 0;
};

/// Adds the RoCoF row, the big-M nadir rows with their auxiliaries, and the
/// QSS row for `hour`. Row names start with "freq_".
FreqBlockInfo build_frequency_block(OptModel& model, const IegsInstance& inst, std::size_t hour,
                                    const FreqVars& vars, double kappa, double big_m);

}  // namespace iegs
