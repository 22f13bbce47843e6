#include "iegs/instance.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "iegs/error.hpp"

namespace iegs {

using nlohmann::json;

namespace {

template <typename T>
T required(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ParseError(where + ": missing key '" + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + ": key '" + key + "' has wrong type (" + e.what() + ")");
  }
}

template <typename T>
T optional_value(const json& j, const char* key, T fallback, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + ": key '" + key + "' has wrong type (" + e.what() + ")");
  }
}

const json& required_array(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_array()) {
    throw ParseError(where + ": '" + key + "' must be an array");
  }
  return *it;
}

GeneratorKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "gfu") return GeneratorKind::Gfu;
  if (s == "non-gfu") return GeneratorKind::NonGfu;
  throw ParseError(where + ": kind must be 'gfu' or 'non-gfu', got '" + s + "'");
}

Generator parse_generator(const json& j) {
  Generator g;
  g.id = required<std::string>(j, "id", "generator");
  const std::string where = "generator '" + g.id + "'";
  g.kind = parse_kind(required<std::string>(j, "kind", where), where);
  g.bus = required<std::string>(j, "bus", where);
  g.p_min = required<double>(j, "p_min", where);
  g.p_max = required<double>(j, "p_max", where);
  g.ramp_up = required<double>(j, "ramp_up", where);
  g.ramp_down = required<double>(j, "ramp_down", where);
  g.min_up = required<int>(j, "min_up", where);
  g.min_down = required<int>(j, "min_down", where);
  g.inertia = required<double>(j, "inertia", where);
  g.reserve_max = required<double>(j, "reserve_max", where);
  const json& cost = required<json>(j, "cost", where);
  g.cost_energy = required<double>(cost, "energy", where);
  g.cost_no_load = required<double>(cost, "no_load", where);
  g.cost_startup = required<double>(cost, "startup", where);
  g.cost_shutdown = required<double>(cost, "shutdown", where);
  g.cost_pfr = required<double>(cost, "pfr", where);
  if (j.contains("gas_node") && !j["gas_node"].is_null()) {
    g.gas_node = required<std::string>(j, "gas_node", where);
  }
  g.gas_rate = optional_value<double>(j, "gas_rate", 0.0, where);
  g.initial.power = g.p_min;
  if (j.contains("initial")) {
    const json& init = j["initial"];
    g.initial.on = optional_value<bool>(init, "on", true, where);
    g.initial.power = optional_value<double>(init, "power", g.initial.on ? g.p_min : 0.0, where);
    g.initial.reserve = optional_value<double>(init, "reserve", 0.0, where);
  }
  return g;
}

WindFarm parse_wind(const json& j) {
  WindFarm w;
  w.id = required<std::string>(j, "id", "wind farm");
  const std::string where = "wind farm '" + w.id + "'";
  w.bus = required<std::string>(j, "bus", where);
  w.capacity = required<double>(j, "capacity", where);
  w.vi_inertia = required<double>(j, "vi_inertia", where);
  w.reserve_max = required<double>(j, "reserve_max", where);
  const json& cost = required<json>(j, "cost", where);
  w.cost_vi = required<double>(cost, "vi", where);
  w.cost_pfr = required<double>(cost, "pfr", where);
  w.forecast = required<std::vector<double>>(j, "forecast", where);
  return w;
}

PowerNetwork parse_power(const json& j) {
  const std::string where = "power_network";
  PowerNetwork net;
  for (const auto& b : required_array(j, "buses", where)) {
    net.buses.push_back({required<std::string>(b, "id", "bus")});
  }
  net.reference_bus = optional_value<std::string>(
      j, "reference_bus", net.buses.empty() ? std::string{} : net.buses.front().id, where);
  for (const auto& l : required_array(j, "lines", where)) {
    Line line;
    line.id = required<std::string>(l, "id", "line");
    const std::string lw = "line '" + line.id + "'";
    line.from = required<std::string>(l, "from", lw);
    line.to = required<std::string>(l, "to", lw);
    line.reactance = optional_value<double>(l, "reactance", 0.0, lw);
    line.capacity = required<double>(l, "capacity", lw);
    net.lines.push_back(std::move(line));
  }
  for (const auto& d : required_array(j, "loads", where)) {
    ElectricLoad load;
    load.id = required<std::string>(d, "id", "load");
    const std::string dw = "load '" + load.id + "'";
    load.bus = required<std::string>(d, "bus", dw);
    load.demand = required<std::vector<double>>(d, "demand", dw);
    net.loads.push_back(std::move(load));
  }
  if (j.contains("shift_factors") && !j["shift_factors"].is_null()) {
    auto rows = required<std::vector<std::vector<double>>>(j, "shift_factors", where);
    const auto n_cols = rows.empty() ? net.buses.size() : rows.front().size();
    net.shift_factors.resize(static_cast<Eigen::Index>(rows.size()),
                             static_cast<Eigen::Index>(n_cols));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != n_cols) {
        throw ParseError(where + ": shift_factors rows have unequal lengths");
      }
      for (std::size_t c = 0; c < n_cols; ++c) {
        net.shift_factors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
    net.shift_factors_supplied = true;
  }
  return net;
}

GasNetwork parse_gas(const json& j) {
  const std::string where = "gas_network";
  GasNetwork gas;
  for (const auto& n : required_array(j, "nodes", where)) {
    GasNode node;
    node.id = required<std::string>(n, "id", "gas node");
    const std::string nw = "gas node '" + node.id + "'";
    node.pressure_min = required<double>(n, "pressure_min", nw);
    node.pressure_max = required<double>(n, "pressure_max", nw);
    gas.nodes.push_back(std::move(node));
  }
  for (const auto& p : required_array(j, "pipelines", where)) {
    Pipeline pipe;
    pipe.id = required<std::string>(p, "id", "pipeline");
    const std::string pw = "pipeline '" + pipe.id + "'";
    pipe.from = required<std::string>(p, "from", pw);
    pipe.to = required<std::string>(p, "to", pw);
    pipe.weymouth = required<double>(p, "weymouth", pw);
    pipe.linepack = required<double>(p, "linepack", pw);
    if (p.contains("initial_linepack") && !p["initial_linepack"].is_null()) {
      pipe.initial_linepack = required<double>(p, "initial_linepack", pw);
    }
    gas.pipelines.push_back(std::move(pipe));
  }
  if (j.contains("compressors")) {
    for (const auto& c : required_array(j, "compressors", where)) {
      Compressor comp;
      comp.id = required<std::string>(c, "id", "compressor");
      const std::string cw = "compressor '" + comp.id + "'";
      comp.inlet = required<std::string>(c, "inlet", cw);
      comp.outlet = required<std::string>(c, "outlet", cw);
      comp.flow_max = required<double>(c, "flow_max", cw);
      comp.consumption = required<double>(c, "consumption", cw);
      comp.ratio_min = required<double>(c, "ratio_min", cw);
      comp.ratio_max = required<double>(c, "ratio_max", cw);
      gas.compressors.push_back(std::move(comp));
    }
  }
  for (const auto& s : required_array(j, "sources", where)) {
    GasSource src;
    src.id = required<std::string>(s, "id", "gas source");
    const std::string sw = "gas source '" + src.id + "'";
    src.node = required<std::string>(s, "node", sw);
    src.output_min = required<double>(s, "output_min", sw);
    src.output_max = required<double>(s, "output_max", sw);
    gas.sources.push_back(std::move(src));
  }
  for (const auto& d : required_array(j, "loads", where)) {
    GasLoad load;
    load.id = required<std::string>(d, "id", "gas load");
    const std::string dw = "gas load '" + load.id + "'";
    load.node = required<std::string>(d, "node", dw);
    load.demand = required<std::vector<double>>(d, "demand", dw);
    gas.loads.push_back(std::move(load));
  }
  return gas;
}

FrequencyParams parse_frequency(const json& j) {
  const std::string where = "frequency";
  FrequencyParams f;
  f.damping = required<double>(j, "D", where);
  f.nominal = required<double>(j, "f0", where);
  f.deadband = required<double>(j, "df_db", where);
  f.dead_time = required<double>(j, "t_db", where);
  f.delivery_time = required<double>(j, "Td", where);
  f.rocof_max = required<double>(j, "rocof_max", where);
  f.f_min = required<double>(j, "f_min", where);
  f.qss_max = required<double>(j, "df_qss_max", where);
  f.loss = required<std::vector<double>>(j, "dP_loss", where);
  return f;
}

UncertaintyConfig parse_uncertainty(const json& j) {
  const std::string where = "uncertainty";
  UncertaintyConfig u;
  u.epsilon = required<double>(j, "epsilon", where);
  if (j.contains("epsilon_individual") && !j["epsilon_individual"].is_null()) {
    u.epsilon_individual = required<double>(j, "epsilon_individual", where);
  }
  u.unimodal = optional_value<bool>(j, "unimodal", false, where);
  if (j.contains("moments")) {
    const json& m = j["moments"];
    u.mean = required<std::vector<std::vector<double>>>(m, "mean", where + ".moments");
    u.variance = required<std::vector<std::vector<double>>>(m, "variance", where + ".moments");
  }
  if (j.contains("samples")) {
    const json& s = j["samples"];
    const std::string sw = where + ".samples";
    const auto mode = optional_value<std::string>(s, "variance_mode", "std_fraction", sw);
    if (mode == "std_fraction") {
      u.variance_mode = VarianceMode::StdFraction;
    } else if (mode == "var_fraction") {
      u.variance_mode = VarianceMode::VarFraction;
    } else {
      throw ParseError(sw + ": variance_mode must be 'std_fraction' or 'var_fraction'");
    }
    u.dispersion = optional_value<double>(s, "dispersion", u.dispersion, sw);
    u.in_sample = optional_value<std::size_t>(s, "in_sample", u.in_sample, sw);
    u.out_of_sample = optional_value<std::size_t>(s, "out_of_sample", u.out_of_sample, sw);
    u.moment_samples = optional_value<std::size_t>(s, "moment_samples", u.moment_samples, sw);
    u.seed = optional_value<std::uint64_t>(s, "seed", u.seed, sw);
  }
  return u;
}

void check(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

void check_series(const std::vector<double>& s, std::size_t horizon, const std::string& what) {
  check(s.size() == horizon, what + ": series has " + std::to_string(s.size()) +
                                 " entries, horizon is " + std::to_string(horizon));
  for (double v : s) check(std::isfinite(v), what + ": non-finite entry");
}

std::set<std::string> unique_ids(const auto& items, const std::string& what) {
  std::set<std::string> ids;
  for (const auto& item : items) {
    check(!item.id.empty(), what + ": empty id");
    check(ids.insert(item.id).second, what + " '" + item.id + "': duplicate id");
  }
  return ids;
}

}  // namespace

std::size_t PowerNetwork::bus_index(const std::string& id) const {
  for (std::size_t b = 0; b < buses.size(); ++b) {
    if (buses[b].id == id) return b;
  }
  throw ValidationError("unknown bus '" + id + "'");
}

double PowerNetwork::total_load(std::size_t t) const {
  double total = 0.0;
  for (const auto& load : loads) total += series_at(load.demand, t, "load '" + load.id + "'");
  return total;
}

std::size_t GasNetwork::node_index(const std::string& id) const {
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    if (nodes[n].id == id) return n;
  }
  throw ValidationError("unknown gas node '" + id + "'");
}

double GasNetwork::total_load(std::size_t t) const {
  double total = 0.0;
  for (const auto& load : loads) total += series_at(load.demand, t, "gas load '" + load.id + "'");
  return total;
}

double series_at(const std::vector<double>& series, std::size_t t, const std::string& what) {
  if (t >= series.size()) {
    throw ValidationError(what + ": hour " + std::to_string(t + 1) + " outside series of length " +
                          std::to_string(series.size()));
  }
  return series[t];
}

void validate_instance(const IegsInstance& inst) {
  const std::size_t T = inst.horizon;
  check(T >= 1, "horizon must be at least one hour");

  const auto buses = unique_ids(inst.power.buses, "bus");
  const auto gas_nodes = unique_ids(inst.gas.nodes, "gas node");
  unique_ids(inst.generators, "generator");
  unique_ids(inst.wind_farms, "wind farm");
  unique_ids(inst.power.lines, "line");
  unique_ids(inst.gas.pipelines, "pipeline");
  unique_ids(inst.gas.compressors, "compressor");
  unique_ids(inst.gas.sources, "gas source");

  for (const auto& g : inst.generators) {
    const std::string w = "generator '" + g.id + "'";
    check(buses.contains(g.bus), w + ": unknown bus '" + g.bus + "'");
    check(0.0 <= g.p_min && g.p_min <= g.p_max, w + ": requires 0 <= p_min <= p_max");
    check(g.ramp_up >= 0.0 && g.ramp_down >= 0.0, w + ": ramp limits must be nonnegative");
    check(g.min_up >= 1 && g.min_down >= 1, w + ": minimum up/down times must be >= 1");
    check(g.inertia >= 0.0, w + ": inertia must be nonnegative");
    check(0.0 <= g.reserve_max && g.reserve_max <= g.p_max, w + ": requires 0 <= reserve_max <= p_max");
    if (g.is_gfu()) {
      check(g.gas_node.has_value(), w + ": GFU without gas node");
      check(gas_nodes.contains(*g.gas_node), w + ": unknown gas node '" + *g.gas_node + "'");
      check(g.gas_rate >= 0.0, w + ": gas conversion rate must be nonnegative");
    } else {
      check(!g.gas_node.has_value(), w + ": non-GFU must not reference a gas node");
    }
    check(g.initial.power >= 0.0 && g.initial.reserve >= 0.0, w + ": negative initial state");
  }

  for (const auto& wf : inst.wind_farms) {
    const std::string w = "wind farm '" + wf.id + "'";
    check(buses.contains(wf.bus), w + ": unknown bus '" + wf.bus + "'");
    check(wf.capacity > 0.0, w + ": capacity must be positive");
    check(0.0 <= wf.reserve_max && wf.reserve_max <= wf.capacity,
          w + ": requires 0 <= reserve_max <= capacity");
    check(wf.vi_inertia >= 0.0, w + ": virtual inertia must be nonnegative");
    check_series(wf.forecast, T, w + " forecast");
    for (double mu : wf.forecast) {
      check(0.0 <= mu && mu <= wf.capacity, w + ": forecast outside [0, capacity]");
    }
  }

  const auto& net = inst.power;
  check(!net.buses.empty(), "power network has no buses");
  check(buses.contains(net.reference_bus), "unknown reference bus '" + net.reference_bus + "'");
  for (const auto& l : net.lines) {
    const std::string w = "line '" + l.id + "'";
    check(buses.contains(l.from) && buses.contains(l.to), w + ": unknown terminal bus");
    check(l.from != l.to, w + ": both ends on the same bus");
    check(l.capacity > 0.0, w + ": capacity must be positive");
  }
  for (const auto& d : net.loads) {
    const std::string w = "load '" + d.id + "'";
    check(buses.contains(d.bus), w + ": unknown bus '" + d.bus + "'");
    check_series(d.demand, T, w);
    for (double v : d.demand) check(v >= 0.0, w + ": negative demand");
  }
  check(net.shift_factors.rows() == static_cast<Eigen::Index>(net.lines.size()),
        "shift factor row count must equal line count");
  check(net.shift_factors.cols() == static_cast<Eigen::Index>(net.buses.size()),
        "shift factor column count must equal bus count");
  check(net.shift_factors.allFinite(), "shift factors contain non-finite entries");

  const auto& gas = inst.gas;
  for (const auto& n : gas.nodes) {
    check(0.0 < n.pressure_min && n.pressure_min <= n.pressure_max,
          "gas node '" + n.id + "': requires 0 < pressure_min <= pressure_max");
  }
  for (const auto& p : gas.pipelines) {
    const std::string w = "pipeline '" + p.id + "'";
    check(gas_nodes.contains(p.from) && gas_nodes.contains(p.to), w + ": unknown end node");
    check(p.from != p.to, w + ": both ends on the same node");
    check(p.weymouth > 0.0, w + ": Weymouth constant must be positive");
    check(p.linepack > 0.0, w + ": linepack constant must be positive");
    check(p.initial_linepack.has_value(), w + ": missing initial linepack");
    check(*p.initial_linepack >= 0.0, w + ": initial linepack must be nonnegative");
  }
  for (const auto& c : gas.compressors) {
    const std::string w = "compressor '" + c.id + "'";
    check(gas_nodes.contains(c.inlet) && gas_nodes.contains(c.outlet), w + ": unknown node");
    check(c.inlet != c.outlet, w + ": identical inlet and outlet node");
    check(c.flow_max >= 0.0, w + ": flow_max must be nonnegative");
    check(0.0 <= c.consumption && c.consumption < 1.0, w + ": requires 0 <= consumption < 1");
    check(1.0 <= c.ratio_min && c.ratio_min <= c.ratio_max,
          w + ": requires 1 <= ratio_min <= ratio_max");
  }
  for (const auto& s : gas.sources) {
    const std::string w = "gas source '" + s.id + "'";
    check(gas_nodes.contains(s.node), w + ": unknown node '" + s.node + "'");
    check(s.output_min <= s.output_max, w + ": requires output_min <= output_max");
  }
  for (const auto& d : gas.loads) {
    const std::string w = "gas load '" + d.id + "'";
    check(gas_nodes.contains(d.node), w + ": unknown node '" + d.node + "'");
    check_series(d.demand, T, w);
    for (double v : d.demand) check(v >= 0.0, w + ": negative demand");
  }

  const auto& f = inst.frequency;
  check(f.damping > 0.0 && f.nominal > 0.0 && f.deadband > 0.0 && f.dead_time > 0.0 &&
            f.delivery_time > 0.0 && f.rocof_max > 0.0 && f.qss_max > 0.0,
        "frequency: all parameters must be positive");
  check(f.f_min > 0.0 && f.f_min < f.nominal, "frequency: f_min must lie in (0, f0)");
  check(f.deadband < f.nadir_max(), "frequency: dead band must be below the nadir limit");
  check(f.qss_max <= f.nadir_max(), "frequency: QSS limit must not exceed the nadir limit");
  check_series(f.loss, T, "frequency dP_loss");
  for (double v : f.loss) check(v >= 0.0, "frequency dP_loss: negative contingency");

  const auto& u = inst.uncertainty;
  check(u.epsilon > 0.0 && u.epsilon < 1.0, "uncertainty: epsilon must lie in (0, 1)");
  if (u.epsilon_individual) {
    check(*u.epsilon_individual > 0.0 && *u.epsilon_individual < 1.0,
          "uncertainty: epsilon_individual must lie in (0, 1)");
  }
  if (u.has_moments()) {
    check(u.mean.size() == inst.wind_farms.size() && u.variance.size() == inst.wind_farms.size(),
          "uncertainty.moments: one row per wind farm required");
    for (std::size_t w = 0; w < u.mean.size(); ++w) {
      check_series(u.mean[w], T, "uncertainty mean of '" + inst.wind_farms[w].id + "'");
      check_series(u.variance[w], T, "uncertainty variance of '" + inst.wind_farms[w].id + "'");
      for (double v : u.variance[w]) check(v >= 0.0, "uncertainty: negative variance");
    }
  } else {
    check(u.dispersion >= 0.0, "uncertainty.samples: dispersion must be nonnegative");
    check(u.moment_samples >= 2, "uncertainty.samples: moment_samples must be >= 2");
    check(u.moment_samples <= u.in_sample, "uncertainty.samples: moment_samples exceeds in_sample");
    check(u.out_of_sample >= 1, "uncertainty.samples: out_of_sample must be >= 1");
  }
}

namespace {

// Bus susceptance matrix with the reference row/column removed; maps reduced
// index -> bus index through `keep`.
Eigen::MatrixXd reduced_susceptance(const PowerNetwork& net, std::vector<Eigen::Index>& keep) {
  const auto n = static_cast<Eigen::Index>(net.buses.size());
  const auto ref = static_cast<Eigen::Index>(net.bus_index(net.reference_bus));
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  for (const auto& l : net.lines) {
    if (!(l.reactance > 0.0)) {
      throw ValidationError("line '" + l.id + "': positive reactance required to compute shift factors");
    }
    const auto a = static_cast<Eigen::Index>(net.bus_index(l.from));
    const auto b = static_cast<Eigen::Index>(net.bus_index(l.to));
    const double y = 1.0 / l.reactance;
    B(a, a) += y;
    B(b, b) += y;
    B(a, b) -= y;
    B(b, a) -= y;
  }
  keep.clear();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i != ref) keep.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd Br(m, m);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) Br(r, c) = B(keep[r], keep[c]);
  }
  return Br;
}

void require_connected(const PowerNetwork& net) {
  const std::size_t n = net.buses.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& l : net.lines) {
    const auto a = net.bus_index(l.from);
    const auto b = net.bus_index(l.to);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> q;
  q.push(net.bus_index(net.reference_bus));
  seen[q.front()] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    for (auto v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++count;
        q.push(v);
      }
    }
  }
  if (count != n) {
    for (std::size_t b = 0; b < n; ++b) {
      if (!seen[b]) throw NumericError("power network is disconnected: bus '" + net.buses[b].id +
                                       "' unreachable from the reference bus");
    }
  }
}

Eigen::FullPivLU<Eigen::MatrixXd> factor_susceptance(const Eigen::MatrixXd& Br) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Br);
  if (Br.rows() > 0 && !lu.isInvertible()) {
    throw NumericError("singular reduced susceptance matrix");
  }
  return lu;
}

}  // namespace

Eigen::MatrixXd compute_shift_factors(const PowerNetwork& net) {
  require_connected(net);
  std::vector<Eigen::Index> keep;
  const Eigen::MatrixXd Br = reduced_susceptance(net, keep);
  const auto lu = factor_susceptance(Br);

  const auto n_lines = static_cast<Eigen::Index>(net.lines.size());
  const auto n_bus = static_cast<Eigen::Index>(net.buses.size());
  const auto m = static_cast<Eigen::Index>(keep.size());
  // Angles (reduced) per unit injection at each non-reference bus.
  Eigen::MatrixXd X = m > 0 ? Eigen::MatrixXd(lu.inverse()) : Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(n_bus, n_bus);  // bus angle x injection bus
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) theta(keep[r], keep[c]) = X(r, c);
  }
  Eigen::MatrixXd psi(n_lines, n_bus);
  for (Eigen::Index l = 0; l < n_lines; ++l) {
    const auto& line = net.lines[static_cast<std::size_t>(l)];
    const auto a = static_cast<Eigen::Index>(net.bus_index(line.from));
    const auto b = static_cast<Eigen::Index>(net.bus_index(line.to));
    psi.row(l) = (theta.row(a) - theta.row(b)) / line.reactance;
  }
  return psi;
}

Eigen::VectorXd dc_line_flows(const PowerNetwork& net, const Eigen::VectorXd& injections) {
  require_connected(net);
  if (injections.size() != static_cast<Eigen::Index>(net.buses.size())) {
    throw ValidationError("injection vector length must equal bus count");
  }
  std::vector<Eigen::Index> keep;
  const Eigen::MatrixXd Br = reduced_susceptance(net, keep);
  const auto lu = factor_susceptance(Br);
  Eigen::VectorXd pr(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) pr(static_cast<Eigen::Index>(i)) = injections(keep[i]);
  Eigen::VectorXd angles = Eigen::VectorXd::Zero(injections.size());
  if (!keep.empty()) {
    const Eigen::VectorXd sol = lu.solve(pr);
    for (std::size_t i = 0; i < keep.size(); ++i) angles(keep[i]) = sol(static_cast<Eigen::Index>(i));
  }
  Eigen::VectorXd flows(static_cast<Eigen::Index>(net.lines.size()));
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    const auto& line = net.lines[l];
    flows(static_cast<Eigen::Index>(l)) =
        (angles(static_cast<Eigen::Index>(net.bus_index(line.from))) -
         angles(static_cast<Eigen::Index>(net.bus_index(line.to)))) /
        line.reactance;
  }
  return flows;
}

IegsInstance parse_instance(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed instance document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("instance document must be a JSON object");

  const int version = required<int>(doc, "schema_version", "instance");
  if (version != kSchemaVersion) {
    throw ParseError("unsupported schema_version " + std::to_string(version));
  }

  IegsInstance inst;
  inst.name = optional_value<std::string>(doc, "name", "", "instance");
  inst.horizon = required<std::size_t>(doc, "horizon", "instance");
  for (const auto& g : required_array(doc, "generators", "instance")) {
    inst.generators.push_back(parse_generator(g));
  }
  for (const auto& w : required_array(doc, "wind_farms", "instance")) {
    inst.wind_farms.push_back(parse_wind(w));
  }
  inst.power = parse_power(required<json>(doc, "power_network", "instance"));
  inst.gas = parse_gas(required<json>(doc, "gas_network", "instance"));
  inst.frequency = parse_frequency(required<json>(doc, "frequency", "instance"));
  inst.uncertainty = parse_uncertainty(required<json>(doc, "uncertainty", "instance"));

  const bool have_reactances =
      !inst.power.lines.empty() &&
      std::all_of(inst.power.lines.begin(), inst.power.lines.end(),
                  [](const Line& l) { return l.reactance > 0.0; });
  if (inst.power.shift_factors_supplied) {
    if (have_reactances) {
      inst.warnings.push_back("both shift_factors and line reactances given; using the supplied shift factors");
    }
  } else if (inst.power.lines.empty()) {
    inst.power.shift_factors.resize(0, static_cast<Eigen::Index>(inst.power.buses.size()));
  } else {
    inst.power.shift_factors = compute_shift_factors(inst.power);
  }

  validate_instance(inst);
  return inst;
}

IegsInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("instance not found: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_instance(buffer.str());
}

std::string dump_instance(const IegsInstance& inst) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["name"] = inst.name;
  doc["horizon"] = inst.horizon;

  doc["generators"] = json::array();
  for (const auto& g : inst.generators) {
    json j{{"id", g.id},
           {"kind", g.is_gfu() ? "gfu" : "non-gfu"},
           {"bus", g.bus},
           {"p_min", g.p_min},
           {"p_max", g.p_max},
           {"ramp_up", g.ramp_up},
           {"ramp_down", g.ramp_down},
           {"min_up", g.min_up},
           {"min_down", g.min_down},
           {"inertia", g.inertia},
           {"reserve_max", g.reserve_max},
           {"cost",
            {{"energy", g.cost_energy},
             {"no_load", g.cost_no_load},
             {"startup", g.cost_startup},
             {"shutdown", g.cost_shutdown},
             {"pfr", g.cost_pfr}}},
           {"initial", {{"on", g.initial.on}, {"power", g.initial.power}, {"reserve", g.initial.reserve}}}};
    if (g.gas_node) {
      j["gas_node"] = *g.gas_node;
      j["gas_rate"] = g.gas_rate;
    }
    doc["generators"].push_back(std::move(j));
  }

  doc["wind_farms"] = json::array();
  for (const auto& w : inst.wind_farms) {
    doc["wind_farms"].push_back({{"id", w.id},
                                 {"bus", w.bus},
                                 {"capacity", w.capacity},
                                 {"vi_inertia", w.vi_inertia},
                                 {"reserve_max", w.reserve_max},
                                 {"cost", {{"vi", w.cost_vi}, {"pfr", w.cost_pfr}}},
                                 {"forecast", w.forecast}});
  }

  json power;
  power["buses"] = json::array();
  for (const auto& b : inst.power.buses) power["buses"].push_back({{"id", b.id}});
  power["reference_bus"] = inst.power.reference_bus;
  power["lines"] = json::array();
  for (const auto& l : inst.power.lines) {
    json j{{"id", l.id}, {"from", l.from}, {"to", l.to}, {"capacity", l.capacity}};
    if (l.reactance > 0.0) j["reactance"] = l.reactance;
    power["lines"].push_back(std::move(j));
  }
  power["loads"] = json::array();
  for (const auto& d : inst.power.loads) {
    power["loads"].push_back({{"id", d.id}, {"bus", d.bus}, {"demand", d.demand}});
  }
  if (inst.power.shift_factors_supplied) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < inst.power.shift_factors.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(inst.power.shift_factors.cols()));
      for (Eigen::Index c = 0; c < inst.power.shift_factors.cols(); ++c) {
        row[static_cast<std::size_t>(c)] = inst.power.shift_factors(r, c);
      }
      rows.push_back(row);
    }
    power["shift_factors"] = rows;
  }
  doc["power_network"] = std::move(power);

  json gas;
  gas["nodes"] = json::array();
  for (const auto& n : inst.gas.nodes) {
    gas["nodes"].push_back({{"id", n.id}, {"pressure_min", n.pressure_min}, {"pressure_max", n.pressure_max}});
  }
  gas["pipelines"] = json::array();
  for (const auto& p : inst.gas.pipelines) {
    json j{{"id", p.id}, {"from", p.from}, {"to", p.to}, {"weymouth", p.weymouth}, {"linepack", p.linepack}};
    if (p.initial_linepack) j["initial_linepack"] = *p.initial_linepack;
    gas["pipelines"].push_back(std::move(j));
  }
  gas["compressors"] = json::array();
  for (const auto& c : inst.gas.compressors) {
    gas["compressors"].push_back({{"id", c.id},
                                  {"inlet", c.inlet},
                                  {"outlet", c.outlet},
                                  {"flow_max", c.flow_max},
                                  {"consumption", c.consumption},
                                  {"ratio_min", c.ratio_min},
                                  {"ratio_max", c.ratio_max}});
  }
  gas["sources"] = json::array();
  for (const auto& s : inst.gas.sources) {
    gas["sources"].push_back(
        {{"id", s.id}, {"node", s.node}, {"output_min", s.output_min}, {"output_max", s.output_max}});
  }
  gas["loads"] = json::array();
  for (const auto& d : inst.gas.loads) {
    gas["loads"].push_back({{"id", d.id}, {"node", d.node}, {"demand", d.demand}});
  }
  doc["gas_network"] = std::move(gas);

  const auto& f = inst.frequency;
  doc["frequency"] = {{"D", f.damping},          {"f0", f.nominal},          {"df_db", f.deadband},
                      {"t_db", f.dead_time},     {"Td", f.delivery_time},    {"rocof_max", f.rocof_max},
                      {"f_min", f.f_min},        {"df_qss_max", f.qss_max}, {"dP_loss", f.loss}};

  const auto& u = inst.uncertainty;
  json unc{{"epsilon", u.epsilon}, {"unimodal", u.unimodal}};
  if (u.epsilon_individual) unc["epsilon_individual"] = *u.epsilon_individual;
  if (u.has_moments()) {
    unc["moments"] = {{"mean", u.mean}, {"variance", u.variance}};
  }
  unc["samples"] = {{"variance_mode", u.variance_mode == VarianceMode::StdFraction ? "std_fraction" : "var_fraction"},
                    {"dispersion", u.dispersion},
                    {"in_sample", u.in_sample},
                    {"out_of_sample", u.out_of_sample},
                    {"moment_samples", u.moment_samples},
                    {"seed", u.seed}};
  doc["uncertainty"] = std::move(unc);
  return doc.dump(2);
}

void save_instance(const IegsInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write instance file: " + path.string());
  out << dump_instance(inst) << '\n';
}

}  // namespace iegs
