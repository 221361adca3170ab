// Python module potkit._core.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "potkit/domain.hpp"
#include "potkit/equilibrium.hpp"
#include "potkit/error.hpp"
#include "potkit/forces.hpp"
#include "potkit/functional.hpp"
#include "potkit/photoeffect.hpp"
#include "potkit/radial_solver.hpp"
#include "potkit/scenario.hpp"
#include "potkit/verify.hpp"
#include "potkit/voxel_solver.hpp"

namespace py = pybind11;
using namespace potkit;

namespace {

NestedShells make_nested(double inner, const std::vector<std::pair<double, double>>& faces,
                         std::optional<double> outer) {
  NestedShells n{inner, {}, outer};
  for (const auto& [a, b] : faces) n.shell_faces.push_back({a, b});
  return n;
}

RadialGridSpec grid_for(const ConductorGeometry& g, std::optional<double> r_max, std::optional<std::size_t> nodes) {
  RadialGridSpec spec = default_grid_spec(g);
  if (r_max) spec.r_max = *r_max;
  if (nodes) spec.node_count = *nodes;
  return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "k-potentials of radial and voxel conductors";

  // Messages start with the error kind, e.g. "InvalidInput: ...".
  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  py::class_<Ball>(m, "Ball")
      .def(py::init<double>(), py::arg("radius") = 1.0)
      .def_readwrite("radius", &Ball::radius)
      .def("__repr__", [](const Ball& b) { return "Ball(radius=" + std::to_string(b.radius) + ")"; });

  py::class_<NestedShells>(m, "NestedShells")
      .def(py::init(&make_nested), py::arg("inner_radius"), py::arg("shell_faces") = std::vector<std::pair<double, double>>{},
           py::arg("outer_sphere_radius") = std::nullopt)
      .def_readwrite("inner_radius", &NestedShells::inner_radius)
      .def_property_readonly("shell_faces",
                             [](const NestedShells& n) {
                               std::vector<std::pair<double, double>> out;
                               for (const auto& f : n.shell_faces) out.emplace_back(f.inner, f.outer);
                               return out;
                             })
      .def_readwrite("outer_sphere_radius", &NestedShells::outer_sphere_radius);

  py::class_<VoxelSet>(m, "VoxelSet")
      .def_readonly("spacing", &VoxelSet::spacing)
      .def_property_readonly("shape", [](const VoxelSet& v) { return py::make_tuple(v.nx, v.ny, v.nz); })
      .def("count", &VoxelSet::count);

  m.def("make_ball_mask", &make_ball_mask, py::arg("radius"), py::arg("spacing"));

  m.def(
      "capacity",
      [](const ConductorGeometry& g, std::optional<double> r_max, std::optional<std::size_t> nodes) {
        return capacity(g, grid_for(g, r_max, nodes));
      },
      py::arg("geometry"), py::arg("r_max") = std::nullopt, py::arg("node_count") = std::nullopt);
  m.def(
      "poincare_constant", [](const ConductorGeometry& g) { return poincare_constant(g); }, py::arg("geometry"));
  m.def("k_upper_bound", &k_upper_bound, py::arg("geometry"));

  py::class_<BallClosedForm>(m, "BallClosedForm")
      .def_readonly("A", &BallClosedForm::A)
      .def_readonly("Q", &BallClosedForm::Q)
      .def_readonly("q_hat", &BallClosedForm::q_hat);
  m.def("ball_closed_form", &ball_closed_form, py::arg("r"), py::arg("q"), py::arg("k"));

  py::class_<EquilibriumSolution>(m, "EquilibriumSolution")
      .def_readonly("A", &EquilibriumSolution::A)
      .def_readonly("Q", &EquilibriumSolution::Q)
      .def_readonly("q_hat", &EquilibriumSolution::q_hat)
      .def_readonly("W", &EquilibriumSolution::W)
      .def("potential", [](const EquilibriumSolution& s, double rho) { return eval_potential(s.potential, rho); },
           py::arg("rho"))
      .def("constancy", &constancy_check)
      .def("report", [](const EquilibriumSolution& s) {
        std::ostringstream out;
        write_equilibrium_report(s, out);
        return out.str();
      });
  m.def(
      "solve_equilibrium",
      [](const ConductorGeometry& g, double q, double k, std::optional<double> r_max, std::optional<std::size_t> nodes) {
        return solve_equilibrium(g, q, k, grid_for(g, r_max, nodes));
      },
      py::arg("geometry"), py::arg("q"), py::arg("k"), py::arg("r_max") = std::nullopt,
      py::arg("node_count") = std::nullopt);
  m.def(
      "nested_spheres_charges",
      [](const NestedShells& n, double q) {
        std::vector<std::pair<double, double>> out;
        for (const auto& s : nested_spheres_charges(n, q)) out.emplace_back(s.radius, s.charge);
        return out;
      },
      py::arg("geometry"), py::arg("q"));

  m.def(
      "interior_force_ratio", [](const EquilibriumSolution& s, double r) { return interior_force_ratio(s, Ball{r}); },
      py::arg("solution"), py::arg("radius"));
  m.def(
      "gradient_force", [](const EquilibriumSolution& s, double rho, double e) { return gradient_force(s.potential, rho, e); },
      py::arg("solution"), py::arg("rho"), py::arg("e") = 1.0);
  m.def("collision_balance", &collision_balance, py::arg("Q"), py::arg("k"), py::arg("r"));

  py::class_<PairModel>(m, "PairModel")
      .def_readonly("r", &PairModel::r)
      .def_readonly("delta", &PairModel::delta)
      .def_readonly("k", &PairModel::k)
      .def_readonly("t", &PairModel::t)
      .def_readonly("t_in_range", &PairModel::t_in_range);
  m.def("pair_parameter_t", &pair_parameter_t, py::arg("r"), py::arg("delta"), py::arg("k"));
  m.def("make_pair_model", &make_pair_model, py::arg("r"), py::arg("delta"), py::arg("k"), py::arg("q") = 1.0,
        py::arg("e") = 1.0);
  m.def("restoring_force", &restoring_force, py::arg("R"), py::arg("model"));
  m.def(
      "threshold_energy",
      [](double r, double delta, double q, double e) {
        const auto t = threshold_energy(r, delta, q, e);
        return py::make_tuple(t.closed_form, t.quadrature);
      },
      py::arg("r"), py::arg("delta"), py::arg("q") = 1.0, py::arg("e") = 1.0);

  m.def(
      "solve_voxel_equilibrium",
      [](const VoxelSet& mask, double q, double k, double padding) {
        const auto eq = solve_voxel_equilibrium(mask, q, k, padding);
        py::dict d;
        d["A"] = eq.A;
        d["a_far"] = eq.a_far;
        d["interior_charge"] = eq.interior_charge;
        d["surface_charge"] = eq.surface_charge;
        return d;
      },
      py::arg("mask"), py::arg("q"), py::arg("k"), py::arg("padding") = 0.5);

  m.def(
      "validate_scenario", [](const std::string& text) { return validate(parse_scenario(text)); }, py::arg("json_text"));
  m.def(
      "run_suite",
      [](const std::string& name) {
        const auto results = run_suite(name);
        std::ostringstream out;
        write_suite_report(results, out);
        return py::make_tuple(all_passed(results), out.str());
      },
      py::arg("name"));
}
