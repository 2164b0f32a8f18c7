#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "orbistab/errors.hpp"
#include "orbistab/floquet.hpp"
#include "orbistab/projection.hpp"
#include "orbistab/registry.hpp"
#include "orbistab/riccati.hpp"
#include "orbistab/sim.hpp"
#include "orbistab/transverse.hpp"
#include "orbistab/version.hpp"

namespace py = pybind11;
using namespace orbistab;

PYBIND11_MODULE(pyorbistab, m) {
  m.doc() = "Orbital stabilization of periodic motions via transverse coordinates";
  m.attr("__version__") = kVersion;

  py::register_exception<NumericError>(m, "NumericError");

  py::class_<ControlAffineSystem>(m, "ControlAffineSystem")
      .def_readonly("n", &ControlAffineSystem::n)
      .def_readonly("m", &ControlAffineSystem::m)
      .def("f", [](const ControlAffineSystem& s, const Vec& x) { return s.f(x); })
      .def("g", [](const ControlAffineSystem& s, const Vec& x) { return s.g(x); })
      .def("jacobian_f", &ControlAffineSystem::jacobian_f);

  py::class_<OrbitParameterization>(m, "OrbitParameterization")
      .def_readonly("s0", &OrbitParameterization::s0)
      .def_readonly("s_T", &OrbitParameterization::s_T)
      .def("xs", [](const OrbitParameterization& o, double s) { return o.xs(s); })
      .def("tangent",
           [](const OrbitParameterization& o, double s) { return orbit_tangent(o, s); });

  py::class_<RegisteredSystem>(m, "RegisteredSystem")
      .def_readonly("system", &RegisteredSystem::system)
      .def_readonly("orbit", &RegisteredSystem::orbit);

  m.def("make_system", &make_system, py::arg("name"),
        py::arg("params") = SystemParams{});
  m.def("registered_system_names", &registered_system_names);

  py::class_<OrbitResidualReport>(m, "OrbitResidualReport")
      .def_readonly("max_residual", &OrbitResidualReport::max_residual)
      .def_readonly("argmax_s", &OrbitResidualReport::argmax_s)
      .def("certified", &OrbitResidualReport::certified,
           py::arg("tol") = 1e-8);
  m.def("verify_orbit", &verify_orbit, py::arg("system"), py::arg("orbit"),
        py::arg("grid_size"));

  py::class_<ProjectionFrame>(m, "ProjectionFrame")
      .def_readonly("s", &ProjectionFrame::s)
      .def_readonly("x_on_orbit", &ProjectionFrame::x_on_orbit)
      .def_readonly("tangent", &ProjectionFrame::tangent)
      .def_readonly("gamma", &ProjectionFrame::gamma)
      .def_readonly("omega", &ProjectionFrame::omega)
      .def_readonly("rho", &ProjectionFrame::rho)
      .def_readonly("theta", &ProjectionFrame::theta);
  m.def(
      "project",
      [](const OrbitParameterization& orbit, const Vec& x,
         std::optional<double> hint) { return project(orbit, x, hint); },
      py::arg("orbit"), py::arg("x"), py::arg("hint") = std::nullopt);
  m.def("frame_at", &frame_at, py::arg("system"), py::arg("orbit"),
        py::arg("s"));
  m.def(
      "transverse_coords",
      [](const ControlAffineSystem& system, const OrbitParameterization& orbit,
         const Vec& x, std::optional<double> hint) {
        return transverse_coords(system, orbit, x, hint);
      },
      py::arg("system"), py::arg("orbit"), py::arg("x"),
      py::arg("hint") = std::nullopt);

  py::class_<PeriodicLinearSystem>(m, "PeriodicLinearSystem")
      .def("A", &PeriodicLinearSystem::A)
      .def("B", &PeriodicLinearSystem::B)
      .def("rho", &PeriodicLinearSystem::rho)
      .def("omega", &PeriodicLinearSystem::omega)
      .def("constraint", &PeriodicLinearSystem::constraint)
      .def_property_readonly("state_dim", &PeriodicLinearSystem::state_dim)
      .def_property_readonly("input_dim", &PeriodicLinearSystem::input_dim)
      .def_property_readonly("period", &PeriodicLinearSystem::period)
      .def("time_period", &PeriodicLinearSystem::time_period);

  py::class_<GainSchedule>(m, "GainSchedule")
      .def("K", &GainSchedule::K)
      .def_property_readonly("period", &GainSchedule::period)
      .def("to_csv", &GainSchedule::to_csv);

  m.def("tvl_orthogonal", &tvl_orthogonal, py::arg("system"), py::arg("orbit"),
        py::arg("grid_size"));
  m.def("comparison_system", &comparison_system, py::arg("system"),
        py::arg("orbit"), py::arg("grid_size"));

  py::class_<RiccatiSolution>(m, "RiccatiSolution")
      .def_readonly("residual_max", &RiccatiSolution::residual_max)
      .def_readonly("periodicity_gap", &RiccatiSolution::periodicity_gap)
      .def_readonly("converged", &RiccatiSolution::converged)
      .def_readonly("sweeps", &RiccatiSolution::sweeps);
  m.def("solve_prde", &solve_prde, py::arg("comparison"), py::arg("Q"),
        py::arg("Rw"), py::arg("max_sweeps") = 200);
  m.def("gain_from_riccati", &gain_from_riccati, py::arg("solution"),
        py::arg("plin"), py::arg("Rw"));
  m.def("analytic_example_gain", &analytic_example_gain, py::arg("a"),
        py::arg("grid_size") = 512);

  py::enum_<GainClosure>(m, "GainClosure")
      .value("direct", GainClosure::direct)
      .value("gain_times_omega", GainClosure::gain_times_omega);

  py::class_<FloquetSpectrum>(m, "FloquetSpectrum")
      .def_readonly("multipliers", &FloquetSpectrum::multipliers)
      .def_readonly("exponents", &FloquetSpectrum::exponents)
      .def_readonly("T_period", &FloquetSpectrum::T_period);
  m.def(
      "monodromy",
      [](const PeriodicLinearSystem& plin, const GainSchedule* gain,
         GainClosure closure) { return monodromy(plin, gain, closure); },
      py::arg("plin"), py::arg("gain") = nullptr,
      py::arg("closure") = GainClosure::direct);
  m.def("spectrum", &spectrum, py::arg("monodromy_matrix"),
        py::arg("T_period"));

  py::enum_<StabilityVerdict>(m, "StabilityVerdict")
      .value("orbitally_stable", StabilityVerdict::orbitally_stable)
      .value("inconclusive", StabilityVerdict::inconclusive)
      .value("unstable", StabilityVerdict::unstable);
  m.def("andronov_vitt_verdict", &andronov_vitt_verdict, py::arg("spectrum"));

  py::class_<SimulationTrace>(m, "SimulationTrace")
      .def_readonly("times", &SimulationTrace::times)
      .def_readonly("states", &SimulationTrace::states)
      .def_readonly("s_values", &SimulationTrace::s_values)
      .def_readonly("z_norms", &SimulationTrace::z_norms)
      .def_readonly("truncated", &SimulationTrace::truncated)
      .def("to_csv", &SimulationTrace::to_csv);
  m.def("simulate_closed_loop", &simulate_closed_loop, py::arg("system"),
        py::arg("orbit"), py::arg("gain"), py::arg("x0"),
        py::arg("horizon_periods"), py::arg("dt_max") = 0.0);

  py::class_<ConvergenceMetrics>(m, "ConvergenceMetrics")
      .def_readonly("final_distance", &ConvergenceMetrics::final_distance)
      .def_readonly("fitted_decay_rate", &ConvergenceMetrics::fitted_decay_rate)
      .def_readonly("phase_drift", &ConvergenceMetrics::phase_drift)
      .def_readonly("fit_samples", &ConvergenceMetrics::fit_samples);
  m.def("orbital_convergence_metrics", &orbital_convergence_metrics,
        py::arg("trace"), py::arg("system"), py::arg("orbit"),
        py::arg("noise_floor") = 1e-10);
}
