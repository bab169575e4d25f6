#include <sstream>
#include <string>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qmetro/cli.hpp"
#include "qmetro/correlations.hpp"
#include "qmetro/error.hpp"
#include "qmetro/fock.hpp"
#include "qmetro/gaussian.hpp"
#include "qmetro/protocol.hpp"

namespace py = pybind11;
using namespace qmetro;

namespace {

correlations::TableState state_arg(const std::string& name) {
  auto s = correlations::table_state_from_string(name);
  if (!s) throw DomainError("unknown table state '" + name + "'");
  return *s;
}

fock::PhaseConvention convention_arg(const std::string& name) {
  if (name == "single") return fock::PhaseConvention::kSingleMode;
  if (name == "relative") return fock::PhaseConvention::kRelativeHalf;
  throw DomainError("convention must be 'single' or 'relative'");
}

py::dict engine_values(const std::optional<protocol::EngineValues>& v) {
  py::dict d;
  if (!v) return d;
  d["signal"] = v->signal;
  d["variance"] = v->variance;
  d["phase_error"] = v->phase_error;
  d["phase_error_limit"] = v->phase_error_limit;
  d["note"] = v->phase_error_note;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Truncated Fock-space and Gaussian-moment engines for squeezed-light phase estimation";

  static py::exception<TruncationError> truncation(m, "TruncationError", PyExc_RuntimeError);
  static py::exception<SingularOperatingPoint> singular(m, "SingularOperatingPoint", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const TruncationError& e) {
      py::set_error(truncation, e.what());
    } catch (const SingularOperatingPoint& e) {
      py::set_error(singular, e.what());
    }
  });

  // ---- fock
  py::class_<fock::PureState>(m, "PureState")
      .def(py::init<int, int, Eigen::VectorXcd, double>(), py::arg("modes"), py::arg("cutoff"),
           py::arg("amplitudes"), py::arg("truncation_tol") = fock::kDefaultTruncationTol)
      .def_property_readonly("modes", &fock::PureState::modes)
      .def_property_readonly("cutoff", &fock::PureState::cutoff)
      .def_property_readonly("amplitudes", &fock::PureState::amplitudes)
      .def_property_readonly("truncation_tol", &fock::PureState::truncation_tol)
      .def("norm_squared", &fock::PureState::norm_squared)
      .def("amplitude", py::overload_cast<int>(&fock::PureState::amplitude, py::const_))
      .def("amplitude", py::overload_cast<int, int>(&fock::PureState::amplitude, py::const_));

  py::class_<fock::MixedState>(m, "MixedState")
      .def(py::init<int, int, Eigen::MatrixXcd, double>(), py::arg("modes"), py::arg("cutoff"),
           py::arg("matrix"), py::arg("truncation_tol") = fock::kDefaultTruncationTol)
      .def_property_readonly("modes", &fock::MixedState::modes)
      .def_property_readonly("cutoff", &fock::MixedState::cutoff)
      .def_property_readonly("matrix", &fock::MixedState::matrix)
      .def("trace", &fock::MixedState::trace)
      .def("min_eigenvalue", &fock::MixedState::min_eigenvalue);

  m.def("vacuum", &fock::vacuum, py::arg("modes"), py::arg("cutoff"));
  m.def("make_fock", py::overload_cast<int, int>(&fock::make_fock), py::arg("n"), py::arg("cutoff"));
  m.def("make_fock2", py::overload_cast<int, int, int>(&fock::make_fock), py::arg("na"),
        py::arg("nb"), py::arg("cutoff"));
  m.def("make_coherent", &fock::make_coherent, py::arg("alpha"), py::arg("cutoff"));
  m.def("make_squeezed_vacuum", &fock::make_squeezed_vacuum, py::arg("r"), py::arg("phi"),
        py::arg("cutoff"));
  m.def("make_noon", &fock::make_noon, py::arg("n"), py::arg("cutoff"));
  m.def("make_twin_fock", &fock::make_twin_fock, py::arg("n_half"), py::arg("cutoff"));
  m.def("make_ecs", &fock::make_ecs, py::arg("alpha"), py::arg("cutoff"));
  m.def("make_tmsv", &fock::make_tmsv, py::arg("r"), py::arg("cutoff"));
  m.def("tensor", &fock::tensor);
  py::enum_<fock::Observable>(m, "Observable")
      .value("N", fock::Observable::kN)
      .value("N2", fock::Observable::kN2)
      .value("CROSS_NN", fock::Observable::kCrossNN)
      .value("A2", fock::Observable::kA2)
      .value("ADAD_AA", fock::Observable::kAdAdAA);
  m.def("expectation", py::overload_cast<const fock::PureState&, fock::Observable, int>(&fock::expectation),
        py::arg("state"), py::arg("observable"), py::arg("mode") = 0);
  m.def("expectation", py::overload_cast<const fock::MixedState&, fock::Observable, int>(&fock::expectation),
        py::arg("state"), py::arg("observable"), py::arg("mode") = 0);
  m.def("to_density", &fock::to_density);
  m.def("apply_beam_splitter", &fock::apply_beam_splitter);
  m.def(
      "apply_phase",
      [](const fock::PureState& s, double phi, const std::string& c) {
        return fock::apply_phase(s, phi, convention_arg(c));
      },
      py::arg("state"), py::arg("phi"), py::arg("convention") = "single");
  m.def(
      "apply_phase",
      [](const fock::MixedState& s, double phi, const std::string& c) {
        return fock::apply_phase(s, phi, convention_arg(c));
      },
      py::arg("state"), py::arg("phi"), py::arg("convention") = "single");
  m.def("apply_squeeze", py::overload_cast<const fock::PureState&, double>(&fock::apply_squeeze));
  m.def("apply_squeeze", py::overload_cast<const fock::MixedState&, double>(&fock::apply_squeeze));
  m.def("apply_loss", py::overload_cast<const fock::PureState&, double, int>(&fock::apply_loss),
        py::arg("state"), py::arg("eta"), py::arg("mode") = 0);
  m.def("apply_loss", py::overload_cast<const fock::MixedState&, double, int>(&fock::apply_loss),
        py::arg("state"), py::arg("eta"), py::arg("mode") = 0);
  m.def("photon_number_distribution",
        py::overload_cast<const fock::PureState&>(&fock::photon_number_distribution));
  m.def("photon_number_distribution",
        py::overload_cast<const fock::MixedState&>(&fock::photon_number_distribution));
  m.def("project_total_photon", &fock::project_total_photon, py::arg("state"), py::arg("total"));
  m.def("fidelity", py::overload_cast<const fock::PureState&, const fock::PureState&>(&fock::fidelity));
  m.def("fidelity", py::overload_cast<const fock::MixedState&, const fock::PureState&>(&fock::fidelity));

  // ---- correlations
  py::class_<correlations::ProbeStatistics>(m, "ProbeStatistics")
      .def_readonly("mean_n_a", &correlations::ProbeStatistics::mean_n_a)
      .def_readonly("mean_n_b", &correlations::ProbeStatistics::mean_n_b)
      .def_readonly("var_n_a", &correlations::ProbeStatistics::var_n_a)
      .def_readonly("var_n_b", &correlations::ProbeStatistics::var_n_b)
      .def_readonly("cov_nn", &correlations::ProbeStatistics::cov_nn)
      .def_readonly("q_a", &correlations::ProbeStatistics::q_a)
      .def_readonly("q_b", &correlations::ProbeStatistics::q_b)
      .def_readonly("j", &correlations::ProbeStatistics::j)
      .def_readonly("qfi", &correlations::ProbeStatistics::qfi)
      .def_property_readonly("n_bar", &correlations::ProbeStatistics::n_bar);

  m.def("probe_statistics",
        py::overload_cast<const fock::PureState&>(&correlations::probe_statistics));
  m.def("mandel_q", &correlations::mandel_q, py::arg("mean_n"), py::arg("var_n"));
  m.def("mode_correlation_j", &correlations::mode_correlation_j);
  m.def("qfi_path_symmetric", &correlations::qfi_path_symmetric, py::arg("n_bar"), py::arg("q"),
        py::arg("j"));
  m.def("table_states", [] {
    std::vector<std::string> names;
    for (auto s : correlations::table_states()) names.emplace_back(correlations::to_string(s));
    return names;
  });
  m.def(
      "table_row",
      [](const std::string& state, double n_bar) {
        const auto row = correlations::table_row(state_arg(state), n_bar);
        return py::dict(py::arg("q") = row.q, py::arg("j") = row.j, py::arg("qfi") = row.qfi);
      },
      py::arg("state"), py::arg("n_bar"));
  m.def(
      "table_probe",
      [](const std::string& state, double n_bar, int cutoff) {
        return correlations::table_probe(state_arg(state), n_bar, cutoff);
      },
      py::arg("state"), py::arg("n_bar"), py::arg("cutoff"));

  // ---- gaussian
  py::class_<gaussian::MomentVector>(m, "MomentVector")
      .def_readonly("m_aa", &gaussian::MomentVector::m_aa)
      .def_readonly("m_adad", &gaussian::MomentVector::m_adad)
      .def_readonly("m_n", &gaussian::MomentVector::m_n)
      .def("is_physical", &gaussian::MomentVector::is_physical);
  m.def("protocol_moments", &gaussian::protocol_moments, py::arg("r"), py::arg("phi"),
        py::arg("eta1"), py::arg("eta2"));
  m.def("protocol_moments_closed_form", &gaussian::protocol_moments_closed_form, py::arg("n_bar"),
        py::arg("phi"), py::arg("eta"));
  m.def("signal", &gaussian::signal, py::arg("n_bar"), py::arg("phi"), py::arg("eta"));
  m.def("variance_number", &gaussian::variance_number);
  m.def(
      "phase_error",
      [](double n, double phi, double eta) { return gaussian::phase_error(n, phi, eta).value; },
      py::arg("n_bar"), py::arg("phi"), py::arg("eta"));
  m.def("snl_ratio", &gaussian::snl_ratio, py::arg("n_bar"), py::arg("phi"), py::arg("eta"));
  m.def("squeeze_parameter", &gaussian::squeeze_parameter, py::arg("n_bar"));

  // ---- protocol
  m.def(
      "run_protocol",
      [](std::optional<double> n_bar, std::optional<double> r, double phi, double eta1,
         double eta2, std::optional<int> cutoff, const std::string& engine) {
        auto e = protocol::engine_from_string(engine);
        if (!e) throw DomainError("engine must be gaussian, fock or both");
        const auto report =
            protocol::run(protocol::make_config(n_bar, r, phi, eta1, eta2, cutoff, *e));
        py::dict d;
        d["n_bar"] = report.config.n_bar;
        d["r"] = report.config.r;
        d["gaussian"] = engine_values(report.gaussian);
        d["fock"] = engine_values(report.fock);
        d["fock_error"] = report.fock_error;
        d["cutoff"] = report.cutoff;
        d["trace_deficit"] = report.trace_deficit;
        d["snl"] = report.snl;
        d["snl_ratio"] = report.snl_ratio;
        return d;
      },
      py::kw_only(), py::arg("n_bar") = py::none(), py::arg("r") = py::none(), py::arg("phi"),
      py::arg("eta1") = 1.0, py::arg("eta2") = 1.0, py::arg("cutoff") = py::none(),
      py::arg("engine") = "both");
  m.def("default_cutoff", py::overload_cast<double>(&protocol::default_cutoff), py::arg("n_bar"));

  // ---- cli
  m.def(
      "cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "qmetro");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out;
        std::ostringstream err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command line in-process; returns (exit_code, stdout, stderr).");
}
