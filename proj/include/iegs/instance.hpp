#pragma once

// Data model of an integrated electricity-gas system study case and its JSON
// serialization. Units: power in MW, energy prices in $/MWh, time in hours for
// scheduling and seconds for frequency dynamics, pressures in bar, gas flows in
// consistent volumetric units per hour (the linepack constant K is expressed as
// flow-hours per bar).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace iegs {

inline constexpr int kSchemaVersion = 1;

enum class GeneratorKind { NonGfu, Gfu };

struct InitialState {
  bool on = true;
  double power = 0.0;    // P_{i,0}; defaults to p_min when absent
  double reserve = 0.0;  // R^G_{i,0}
};

struct Generator {
  std::string id;
  GeneratorKind kind = GeneratorKind::NonGfu;
  std::string bus;
  double p_min = 0.0;
  double p_max = 0.0;
  double ramp_up = 0.0;
  double ramp_down = 0.0;
  int min_up = 1;
  int min_down = 1;
  double inertia = 0.0;  // H_i^G [s]
  double reserve_max = 0.0;
  double cost_energy = 0.0;    // c_i [$/MWh]
  double cost_no_load = 0.0;   // c_i^B [$/h]
  double cost_startup = 0.0;   // c_i^SU [$]
  double cost_shutdown = 0.0;  // c_i^SD [$]
  double cost_pfr = 0.0;       // c_i^G [$/MW]
  std::optional<std::string> gas_node;  // GFUs only
  double gas_rate = 0.0;                // phi_g^G [flow units per MW]
  InitialState initial;

  bool is_gfu() const { return kind == GeneratorKind::Gfu; }
};

struct WindFarm {
  std::string id;
  std::string bus;
  double capacity = 0.0;     // W_w^max
  double vi_inertia = 0.0;   // H_w^W [s]
  double reserve_max = 0.0;  // R_w^{W,max}
  double cost_vi = 0.0;      // c_w^V [$/h]
  double cost_pfr = 0.0;     // c_w^W [$/MW]
  std::vector<double> forecast;  // mu_{w,t}
};

struct Bus {
  std::string id;
};

struct Line {
  std::string id;
  std::string from;
  std::string to;
  double reactance = 0.0;  // p.u.; only needed when shift factors are computed
  double capacity = 0.0;
};

struct ElectricLoad {
  std::string id;
  std::string bus;
  std::vector<double> demand;
};

struct PowerNetwork {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<ElectricLoad> loads;
  std::string reference_bus;
  /// Line x bus sensitivity matrix. Filled by load_instance either from the
  /// document or from the line reactances.
  Eigen::MatrixXd shift_factors;
  bool shift_factors_supplied = false;

  std::size_t bus_index(const std::string& id) const;
  double total_load(std::size_t t) const;
};

struct GasNode {
  std::string id;
  double pressure_min = 0.0;
  double pressure_max = 0.0;
};

/// Pipeline with a fixed flow direction from -> to.
struct Pipeline {
  std::string id;
  std::string from;
  std::string to;
  double weymouth = 0.0;   // C_mn
  double linepack = 0.0;   // K_mn
  std::optional<double> initial_linepack;  // LP_{mn,0}
};

struct Compressor {
  std::string id;
  std::string inlet;
  std::string outlet;
  double flow_max = 0.0;
  double consumption = 0.0;  // nu_k^C
  double ratio_min = 1.0;
  double ratio_max = 1.0;
};

struct GasSource {
  std::string id;
  std::string node;
  double output_min = 0.0;
  double output_max = 0.0;
};

struct GasLoad {
  std::string id;
  std::string node;
  std::vector<double> demand;
};

struct GasNetwork {
  std::vector<GasNode> nodes;
  std::vector<Pipeline> pipelines;
  std::vector<Compressor> compressors;
  std::vector<GasSource> sources;
  std::vector<GasLoad> loads;

  std::size_t node_index(const std::string& id) const;
  double total_load(std::size_t t) const;
};

struct FrequencyParams {
  double damping = 0.0;        // D [fraction of load per Hz]
  double nominal = 50.0;       // f0 [Hz]
  double deadband = 0.0;       // delta f_DB [Hz]
  double dead_time = 0.0;      // t_DB [s]
  double delivery_time = 0.0;  // T_d [s]
  double rocof_max = 0.0;      // [Hz/s]
  double f_min = 0.0;          // nadir floor [Hz]
  double qss_max = 0.0;        // delta f_qss^max [Hz]
  std::vector<double> loss;    // delta P_t^Loss [MW]

  double nadir_max() const { return nominal - f_min; }
};

enum class VarianceMode { StdFraction, VarFraction };

/// How the uncertainty description of wind output is obtained.
struct UncertaintyConfig {
  double epsilon = 0.05;
  std::optional<double> epsilon_individual;
  bool unimodal = false;
  // Explicit moments, indexed [farm][hour]. Present iff moments were given.
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> variance;
  // Sampling configuration used when moments are estimated from data.
  VarianceMode variance_mode = VarianceMode::StdFraction;
  double dispersion = 0.05;  // sigma = dispersion * mu (or variance = ...)
  std::size_t in_sample = 10000;
  std::size_t out_of_sample = 10000;
  std::size_t moment_samples = 20;  // N
  std::uint64_t seed = 2021;

  bool has_moments() const { return !mean.empty(); }
};

struct IegsInstance {
  std::string name;
  std::size_t horizon = 24;
  std::vector<Generator> generators;
  std::vector<WindFarm> wind_farms;
  PowerNetwork power;
  GasNetwork gas;
  FrequencyParams frequency;
  UncertaintyConfig uncertainty;
  /// Non-fatal remarks collected while loading (e.g. supplied shift factors
  /// overriding reactances).
  std::vector<std::string> warnings;

  double load_level(std::size_t t) const { return power.total_load(t); }
};

/// Bounds-checked access to an hourly series; throws ValidationError.
double series_at(const std::vector<double>& series, std::size_t t, const std::string& what);

IegsInstance load_instance(const std::filesystem::path& path);
IegsInstance parse_instance(const std::string& json_text);
std::string dump_instance(const IegsInstance& instance);
void save_instance(const IegsInstance& instance, const std::filesystem::path& path);

/// Checks every invariant of the data model; throws ValidationError naming
/// the offending element.
void validate_instance(const IegsInstance& instance);

/// DC shift factors from line reactances. Rows follow `network.lines`, columns
/// follow `network.buses`; the reference-bus column is zero.
Eigen::MatrixXd compute_shift_factors(const PowerNetwork& network);

/// Line flows of a DC power flow for a balanced bus injection vector, solved
/// directly from the susceptance matrix (independent of shift factors).
Eigen::VectorXd dc_line_flows(const PowerNetwork& network, const Eigen::VectorXd& injections);

}  // namespace iegs
