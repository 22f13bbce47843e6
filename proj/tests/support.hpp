#pragma once

// Small hand-built study cases shared by the unit tests.

#include <cstddef>
#include <string>
#include <vector>

#include "iegs/instance.hpp"
#include "json.hpp"

namespace iegs::test {

using nlohmann::json;

inline std::string data_path(const std::string& file) { return std::string(IEGS_DATA_DIR) + "/" + file; }

inline json unit_json(const std::string& id, const std::string& bus, double pmin, double pmax, double h,
                      double rmax, double energy) {
  return {{"id", id},           {"kind", "non-gfu"}, {"bus", bus},        {"p_min", pmin},
          {"p_max", pmax},      {"ramp_up", pmax},   {"ramp_down", pmax}, {"min_up", 1},
          {"min_down", 1},      {"inertia", h},      {"reserve_max", rmax},
          {"cost", {{"energy", energy}, {"no_load", 100.0}, {"startup", 500.0}, {"shutdown", 0.0}, {"pfr", 2.0}}},
          {"initial", {{"on", true}}}};
}

/// Two buses, two thermal units, one wind farm, no gas network.
inline json toy_json(std::size_t T = 2, double load = 120.0, double loss = 5.0) {
  const std::vector<double> flat_load(T, load);
  json j;
  j["schema_version"] = 1;
  j["name"] = "toy";
  j["horizon"] = T;
  j["generators"] = json::array({unit_json("G1", "B1", 20, 100, 5.0, 20, 20.0),
                                 unit_json("G2", "B2", 10, 80, 4.0, 15, 30.0)});
  j["wind_farms"] = json::array({{{"id", "W1"},
                                  {"bus", "B2"},
                                  {"capacity", 50.0},
                                  {"vi_inertia", 6.0},
                                  {"reserve_max", 10.0},
                                  {"cost", {{"vi", 50.0}, {"pfr", 1.0}}},
                                  {"forecast", std::vector<double>(T, 30.0)}}});
  j["power_network"] = {
      {"buses", json::array({{{"id", "B1"}}, {{"id", "B2"}}})},
      {"reference_bus", "B1"},
      {"lines", json::array({{{"id", "L1"}, {"from", "B1"}, {"to", "B2"}, {"reactance", 0.1}, {"capacity", 200.0}}})},
      {"loads", json::array({{{"id", "D1"}, {"bus", "B2"}, {"demand", flat_load}}})}};
  j["gas_network"] = {{"nodes", json::array()},
                      {"pipelines", json::array()},
                      {"sources", json::array()},
                      {"loads", json::array()}};
  j["frequency"] = {{"D", 0.01},          {"f0", 50.0},      {"df_db", 0.015},    {"t_db", 0.1},
                    {"Td", 10.0},         {"rocof_max", 0.5}, {"f_min", 49.2},    {"df_qss_max", 0.2},
                    {"dP_loss", std::vector<double>(T, loss)}};
  j["uncertainty"] = {{"epsilon", 0.05},
                      {"samples",
                       {{"variance_mode", "std_fraction"},
                        {"dispersion", 0.1},
                        {"in_sample", 200},
                        {"out_of_sample", 200},
                        {"moment_samples", 20},
                        {"seed", 7}}}};
  return j;
}

/// One pipeline N1 -> N2 fed by a source at N1; optional GFU at N2.
inline json add_gas(json j, double source_max, double load, bool gfu) {
  const std::size_t T = j["horizon"].get<std::size_t>();
  j["gas_network"] = {
      {"nodes", json::array({{{"id", "N1"}, {"pressure_min", 40.0}, {"pressure_max", 70.0}},
                             {{"id", "N2"}, {"pressure_min", 30.0}, {"pressure_max", 70.0}}})},
      {"pipelines", json::array({{{"id", "P1"},
                                  {"from", "N1"},
                                  {"to", "N2"},
                                  {"weymouth", 1.5},
                                  {"linepack", 1.0},
                                  {"initial_linepack", 55.0}}})},
      {"sources", json::array({{{"id", "S1"}, {"node", "N1"}, {"output_min", 0.0}, {"output_max", source_max}}})},
      {"loads", json::array({{{"id", "GL1"}, {"node", "N2"}, {"demand", std::vector<double>(T, load)}}})}};
  if (gfu) {
    j["generators"][1]["kind"] = "gfu";
    j["generators"][1]["gas_node"] = "N2";
    j["generators"][1]["gas_rate"] = 0.2;
  }
  return j;
}

inline IegsInstance toy_instance(std::size_t T = 2, double load = 120.0, double loss = 5.0) {
  return parse_instance(toy_json(T, load, loss).dump());
}

}  // namespace iegs::test
