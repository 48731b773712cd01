#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "optomech/cavity.hpp"
#include "optomech/constants.hpp"
#include "optomech/cooling.hpp"
#include "optomech/errors.hpp"
#include "optomech/jumpsim.hpp"
#include "optomech/mechanics.hpp"
#include "optomech/params.hpp"
#include "optomech/qnd.hpp"
#include "optomech/sweep.hpp"

namespace py = pybind11;
using namespace optomech;

namespace {

ExperimentParams params_from_kwargs(const py::kwargs& kw) {
  ExperimentParams p;
  for (const auto& [k, v] : kw) set_param(p, py::cast<std::string>(k), py::cast<double>(v));
  return p;
}

py::dict budget_dict(const qnd::QndBudget& b) {
  py::dict d;
  d["delta_omega"] = b.delta_omega;
  d["kappa"] = b.kappa;
  d["n_bar_photons"] = b.n_bar_photons;
  d["n_bar_phonons"] = b.n_bar_phonons;
  d["x_m"] = b.x_m;
  d["s_omega"] = b.s_omega;
  d["tau_thermal"] = b.tau_thermal;
  d["tau_rwa"] = b.tau_rwa;
  d["tau_lin"] = b.tau_lin ? py::cast(*b.tau_lin) : py::none();
  d["tau_total"] = b.tau_total;
  d["snr"] = b.snr;
  d["gap"] = b.gap;
  py::dict flags;
  flags["qnd_time_ok"] = b.flags.qnd_time_ok;
  flags["gap_ok"] = b.flags.gap_ok;
  flags["classical_bath_ok"] = b.flags.classical_bath_ok;
  flags["good_cavity"] = b.flags.good_cavity;
  d["flags"] = flags;
  return d;
}

}  // namespace

PYBIND11_MODULE(_optomech, m) {
  m.doc() = "Membrane-in-the-middle optomechanics core";
  m.attr("__version__") = kVersion;

  auto base = py::register_exception<Error>(m, "OptomechError", PyExc_RuntimeError);
  auto validation = py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", validation.ptr());
  py::register_exception<DomainError>(m, "DomainError", validation.ptr());
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<SingularityError>(m, "SingularityError", numerical.ptr());
  py::register_exception<FitError>(m, "FitError", numerical.ptr());
  py::register_exception<EstimationError>(m, "EstimationError", numerical.ptr());

  py::class_<ExperimentParams>(m, "ExperimentParams")
      .def(py::init([](const py::kwargs& kw) { return params_from_kwargs(kw); }))
      .def_readwrite("L", &ExperimentParams::L)
      .def_readwrite("lambda_", &ExperimentParams::lambda)
      .def_readwrite("F", &ExperimentParams::F)
      .def_readwrite("P_in", &ExperimentParams::P_in)
      .def_readwrite("T", &ExperimentParams::T)
      .def_readwrite("m", &ExperimentParams::m)
      .def_readwrite("omega_m", &ExperimentParams::omega_m)
      .def_readwrite("Q", &ExperimentParams::Q)
      .def_readwrite("r_c", &ExperimentParams::r_c)
      .def_readwrite("x0", &ExperimentParams::x0)
      .def("get", [](const ExperimentParams& p, const std::string& key) { return get_param(p, key); })
      .def("replace",
           [](ExperimentParams p, const py::kwargs& kw) {
             for (const auto& [k, v] : kw) set_param(p, py::cast<std::string>(k), py::cast<double>(v));
             return p;
           })
      .def("to_dict",
           [](const ExperimentParams& p) {
             py::dict d;
             for (auto key : kParamKeys) d[py::str(std::string(key))] = get_param(p, key);
             return d;
           })
      .def(py::self == py::self)
      .def("__repr__", [](const ExperimentParams& p) { return "ExperimentParams(\n" + format_config(p) + ")"; });

  m.def("table1_row1", &table1_row1);
  m.def("table1_row2", &table1_row2);
  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("load_config", [](const std::string& path) { return load_config(path); }, py::arg("path"));
  m.def("format_config", &format_config);
  m.def("validate", [](const ExperimentParams& p) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& v : validate(p)) out.emplace_back(v.field, v.message);
    return out;
  });

  // cavity
  m.def("free_spectral_range", &cavity::free_spectral_range, py::arg("L"));
  m.def("dispersive_detuning", &cavity::dispersive_detuning, py::arg("x"), py::arg("r_c"), py::arg("L"),
        py::arg("lambda_"));
  m.def(
      "detuning_derivatives",
      [](double x0, double r_c, double L, double lambda) {
        const auto d = cavity::detuning_derivatives(x0, r_c, L, lambda);
        return py::make_tuple(d.omega0, d.omega1, d.omega2);
      },
      py::arg("x0"), py::arg("r_c"), py::arg("L"), py::arg("lambda_"));
  m.def(
      "band_structure",
      [](double r_c, double L, double lambda, double x_min, double x_max, std::size_t n_samples,
         std::size_t n_bands) {
        const auto bs = cavity::band_structure(r_c, L, lambda, x_min, x_max, n_samples, n_bands);
        py::dict bands;
        for (const auto& b : bs.bands) bands[py::str(b.label.name())] = b.omega;
        return py::make_tuple(bs.x, bands, bs.omega_fsr);
      },
      py::arg("r_c"), py::arg("L"), py::arg("lambda_"), py::arg("x_min"), py::arg("x_max"), py::arg("n_samples"),
      py::arg("n_bands"));
  m.def(
      "mode_gap",
      [](double r_c, double L) {
        const auto g = cavity::mode_gap(r_c, L);
        return py::make_tuple(g.approx, g.exact, g.relative_error);
      },
      py::arg("r_c"), py::arg("L"));
  m.def(
      "membrane_reflectivity",
      [](double n_index, double d, double lambda) { return cavity::membrane_reflectivity({n_index, d}, lambda); },
      py::arg("n_index"), py::arg("d"), py::arg("lambda_"));
  m.def("tau_from_finesse", &cavity::tau_from_finesse, py::arg("F"), py::arg("L"));
  m.def("finesse_from_tau", &cavity::finesse_from_tau, py::arg("tau"), py::arg("L"));
  m.def(
      "fit_ringdown",
      [](const std::vector<double>& t, const std::vector<double>& power) {
        const auto r = cavity::fit_ringdown(t, power);
        return py::make_tuple(r.fitted_tau, r.fitted_amplitude, r.fitted_offset, r.residual_rms);
      },
      py::arg("t"), py::arg("power"));

  py::class_<cavity::TransmissionModel>(m, "TransmissionModel")
      .def(py::init<double, double, double, double>(), py::arg("r_c"), py::arg("F"), py::arg("L"), py::arg("lambda_"))
      .def(py::init([](double n_index, double d, double F, double L, double lambda) {
             return cavity::TransmissionModel(MembraneSpec{n_index, d}, F, L, lambda);
           }),
           py::arg("n_index"), py::arg("d"), py::arg("F"), py::arg("L"), py::arg("lambda_"))
      .def("transmission", &cavity::TransmissionModel::transmission, py::arg("detuning"), py::arg("x"))
      .def("resonances", &cavity::TransmissionModel::resonances, py::arg("x"), py::arg("lo"), py::arg("hi"))
      .def("linewidth", &cavity::TransmissionModel::linewidth)
      .def("analytic_offset", &cavity::TransmissionModel::analytic_offset);

  // mechanics
  m.def("zero_point_amplitude", &mechanics::zero_point_amplitude, py::arg("m"), py::arg("omega_m"));
  m.def("spring_constant", &mechanics::spring_constant, py::arg("m"), py::arg("omega_m"));
  m.def("q_from_ringdown", &mechanics::q_from_ringdown, py::arg("tau"), py::arg("omega_m"));
  m.def("ringdown_from_q", &mechanics::ringdown_from_q, py::arg("Q"), py::arg("omega_m"));
  m.def(
      "thermal_occupation", [](double T, double w) { return mechanics::thermal_occupation(T, w).n_bar; },
      py::arg("T"), py::arg("omega_m"));

  // cooling
  m.def("psd_model", &cooling::psd_model, py::arg("omega"), py::arg("m"), py::arg("T_eff"), py::arg("omega_eff"),
        py::arg("gamma_eff"));
  m.def("teff_from_q", &cooling::teff_from_q, py::arg("T_bath"), py::arg("Q_eff"), py::arg("Q"));
  m.def("shot_thermal_ratio", &cooling::shot_thermal_ratio);
  m.def(
      "fit_psd",
      [](std::vector<double> f, std::vector<double> s, double m_kg, double omega_m, double T_bath, double Q) {
        const auto tr = cooling::fit_psd(std::move(f), std::move(s), {m_kg, omega_m, T_bath, Q});
        const auto& fit = *tr.fit;
        py::dict d;
        d["omega_eff"] = fit.omega_eff;
        d["gamma_eff"] = fit.gamma_eff;
        d["q_eff"] = fit.q_eff;
        d["t_eff_area"] = fit.t_eff_area;
        d["t_eff_q"] = fit.t_eff_q ? py::cast(*fit.t_eff_q) : py::none();
        d["t_eff_model"] = fit.t_eff_model;
        d["floor"] = fit.floor;
        d["residual_rms"] = fit.residual_rms;
        return d;
      },
      py::arg("freq_hz"), py::arg("psd"), py::arg("m"), py::arg("omega_m") = 0.0, py::arg("T_bath") = 0.0,
      py::arg("Q") = 0.0);

  // qnd
  m.def("jump_budget", [](const ExperimentParams& p) { return budget_dict(qnd::jump_budget(p)); });
  m.def("detuning_per_phonon", &qnd::detuning_per_phonon);

  // jumpsim
  m.def(
      "simulate_trajectory",
      [](const ExperimentParams& p, double duration, std::uint64_t seed, bool channels, std::size_t max_events) {
        const auto traj = jumpsim::simulate_trajectory(p, duration, seed, channels, max_events);
        std::vector<double> t;
        std::vector<unsigned> n;
        t.reserve(traj.events.size());
        n.reserve(traj.events.size());
        for (const auto& e : traj.events) {
          t.push_back(e.time);
          n.push_back(e.n_after);
        }
        return py::make_tuple(t, n, traj.duration, traj.truncated);
      },
      py::arg("params"), py::arg("duration"), py::arg("seed"), py::arg("measurement_channels") = true,
      py::arg("max_events") = 10'000'000);

  // sweep
  m.def(
      "grid_sweep_1d",
      [](const ExperimentParams& base, const std::string& param, double lo, double hi, std::size_t count,
         bool log) {
        sweep::SweepAxis axis{param, lo, hi, count, log ? sweep::Scale::Logarithmic : sweep::Scale::Linear, {}};
        const auto res = sweep::grid_sweep(base, std::span(&axis, 1));
        py::list rows;
        for (const auto& pt : res.points) {
          rows.append(pt.budget ? py::object(budget_dict(*pt.budget)) : py::object(py::str(pt.error)));
        }
        return py::make_tuple(rows, res.best ? py::cast(*res.best) : py::none());
      },
      py::arg("base"), py::arg("param"), py::arg("lo"), py::arg("hi"), py::arg("count"), py::arg("log") = false);
}
