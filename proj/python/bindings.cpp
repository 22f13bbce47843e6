#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "iegs/drcc.hpp"
#include "iegs/error.hpp"
#include "iegs/eval.hpp"
#include "iegs/freq.hpp"
#include "iegs/instance.hpp"
#include "iegs/optmodel.hpp"
#include "iegs/scheduler.hpp"

namespace py = pybind11;
using namespace iegs;

namespace {

VariantConfig make_config(const std::string& variant, std::size_t sample_size, std::optional<double> epsilon,
                          std::optional<double> epsilon_individual) {
  return VariantConfig{parse_variant(variant), sample_size, epsilon, epsilon_individual};
}

SolverOptions make_options(double mip_gap, std::optional<double> time_limit) {
  SolverOptions o;
  o.set_mip_gap(mip_gap);
  if (time_limit) o.set_time_limit(*time_limit);
  return o;
}

py::dict swing_dict(const SwingResult& r) {
  py::dict d;
  d["dt"] = r.dt;
  d["deviation"] = r.deviation;
  d["activation_time"] = r.activation_time;
  d["rocof"] = r.rocof;
  d["initial_rocof"] = r.initial_rocof;
  d["nadir"] = r.nadir;
  d["nadir_time"] = r.nadir_time;
  d["qss"] = r.qss;
  return d;
}

}  // namespace

PYBIND11_MODULE(_iegs, m) {
  m.doc() = "Frequency-constrained unit commitment for integrated electricity-gas systems";

  // Translators run newest first, so the base class goes in before its subclasses.
  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<ValidationError>(m, "ValidationError", base);
  py::register_exception<NumericError>(m, "NumericError", base);
  py::register_exception<SolverError>(m, "SolverError", base);

  py::class_<FrequencyParams>(m, "FrequencyParams")
      .def(py::init<>())
      .def_readwrite("damping", &FrequencyParams::damping)
      .def_readwrite("nominal", &FrequencyParams::nominal)
      .def_readwrite("deadband", &FrequencyParams::deadband)
      .def_readwrite("dead_time", &FrequencyParams::dead_time)
      .def_readwrite("delivery_time", &FrequencyParams::delivery_time)
      .def_readwrite("rocof_max", &FrequencyParams::rocof_max)
      .def_readwrite("f_min", &FrequencyParams::f_min)
      .def_readwrite("qss_max", &FrequencyParams::qss_max)
      .def_readwrite("loss", &FrequencyParams::loss)
      .def("nadir_max", &FrequencyParams::nadir_max);

  py::class_<IegsInstance>(m, "Instance")
      .def_readonly("name", &IegsInstance::name)
      .def_readonly("horizon", &IegsInstance::horizon)
      .def_readonly("frequency", &IegsInstance::frequency)
      .def_readonly("warnings", &IegsInstance::warnings)
      .def_property_readonly("generators",
                             [](const IegsInstance& i) {
                               std::vector<std::string> ids;
                               for (const auto& g : i.generators) ids.push_back(g.id);
                               return ids;
                             })
      .def_property_readonly("wind_farms",
                             [](const IegsInstance& i) {
                               std::vector<std::string> ids;
                               for (const auto& w : i.wind_farms) ids.push_back(w.id);
                               return ids;
                             })
      .def("load_level", &IegsInstance::load_level, py::arg("hour"))
      .def("to_json", [](const IegsInstance& i) { return dump_instance(i); });

  m.def("load_instance", &load_instance, py::arg("path"));
  m.def("parse_instance", &parse_instance, py::arg("text"));

  m.def(
      "solve",
      [](const IegsInstance& inst, const std::string& variant, std::size_t sample_size, std::optional<double> epsilon,
         std::optional<double> epsilon_individual, double mip_gap, std::optional<double> time_limit) {
        const auto config = make_config(variant, sample_size, epsilon, epsilon_individual);
        const auto options = make_options(mip_gap, time_limit);
        py::gil_scoped_release release;
        return solution_to_json(run_algorithm1(inst, config, PccpParams{}, options));
      },
      py::arg("instance"), py::arg("variant") = "dr-m", py::arg("sample_size") = 0, py::arg("epsilon") = py::none(),
      py::arg("epsilon_individual") = py::none(), py::arg("mip_gap") = 0.01, py::arg("time_limit") = py::none(),
      "Runs the convex-concave scheduling loop; returns the solution as JSON text.");

  m.def(
      "evaluate",
      [](const IegsInstance& inst, const std::string& solution_json, bool audit_gas) {
        const auto sol = solution_from_json(solution_json);
        py::gil_scoped_release release;
        const auto split = generate_split(inst);
        return reports_to_json({evaluate_solution(sol, inst, split.out_of_sample, audit_gas)});
      },
      py::arg("instance"), py::arg("solution_json"), py::arg("audit_gas") = true,
      "EJVP, frequency and gas audits of a solution; returns the report as JSON text.");

  m.def(
      "compare",
      [](const IegsInstance& inst, const std::vector<std::string>& variants, const std::vector<std::size_t>& sizes,
         bool audit_gas) {
        std::vector<Variant> vs;
        for (const auto& v : variants) vs.push_back(parse_variant(v));
        CompareOptions opt;
        opt.audit_gas = audit_gas;
        py::gil_scoped_release release;
        return reports_to_json(compare_variants(inst, vs, sizes, opt));
      },
      py::arg("instance"), py::arg("variants"), py::arg("sizes") = std::vector<std::size_t>{20},
      py::arg("audit_gas") = true);

  m.def(
      "compute_ejvp",
      [](const std::vector<std::vector<double>>& scheduled, const IegsInstance& inst) {
        return compute_ejvp(scheduled, generate_split(inst).out_of_sample);
      },
      py::arg("scheduled"), py::arg("instance"),
      "Percent of the instance's out-of-sample draws violated by scheduled wind output plus reserve [farm][hour].");

  m.def("solve_kappa", &solve_kappa, py::arg("params"), py::arg("dP"), py::arg("load"));
  m.def("kappa_residual", &kappa_residual, py::arg("kappa"), py::arg("params"), py::arg("dP"), py::arg("load"));
  m.def("nadir_closed_form", &nadir_closed_form, py::arg("R"), py::arg("H"), py::arg("params"), py::arg("dP"),
        py::arg("load"));
  m.def(
      "simulate_swing",
      [](double H, double R, double load, double loss, const FrequencyParams& p, double dt, double horizon) {
        FrequencySnapshot s;
        s.inertia = H;
        s.rg = {R};
        s.load = load;
        s.loss = loss;
        return swing_dict(simulate_swing(s, p, dt, horizon));
      },
      py::arg("H"), py::arg("R"), py::arg("load"), py::arg("loss"), py::arg("params"), py::arg("dt") = 1e-3,
      py::arg("horizon") = 60.0);

  m.def("cantelli_factor", &cantelli_factor, py::arg("epsilon"));
  m.def("vp_factor", &vp_factor, py::arg("epsilon"));
  m.def("moment_soc_min_r", &moment_soc_min_r, py::arg("epsilon"));
  m.def("unimodal_soc_min_r", &unimodal_soc_min_r, py::arg("epsilon"));

  m.def(
      "export_conic",
      [](const IegsInstance& inst, const std::string& variant, const std::filesystem::path& path) {
        const auto split = generate_split(inst);
        AssembleOptions opt;
        opt.tightening = 0.0;
        const auto a = assemble(inst, make_config(variant, 0, std::nullopt, std::nullopt), split.in_sample, opt);
        export_conic(a.model, path);
        return py::make_tuple(a.model.num_vars(), a.model.rows().size(), a.model.socs().size());
      },
      py::arg("instance"), py::arg("variant"), py::arg("path"),
      "Writes the first-stage model; returns (variables, linear rows, cones).");
}
