// potkit command-line tool. Exit codes: 0 success, 2 usage or validation
// error, 3 numerical failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "potkit/domain.hpp"
#include "potkit/equilibrium.hpp"
#include "potkit/error.hpp"
#include "potkit/forces.hpp"
#include "potkit/format.hpp"
#include "potkit/functional.hpp"
#include "potkit/photoeffect.hpp"
#include "potkit/radial_solver.hpp"
#include "potkit/scenario.hpp"
#include "potkit/verify.hpp"
#include "potkit/voxel_solver.hpp"

using namespace potkit;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string shape;
  double radius = 0.0;
  double k = 0.0, q = 1.0, e = 1.0, delta = 0.0;
  std::size_t nodes = 2000;
  double r_max = 0.0;
  std::string out, scenario;
  std::vector<std::string> shells;
  double outer_sphere = 0.0;
  double spacing = 1.0 / 32.0, padding = 0.5;
  std::string mask;
  std::vector<double> at;
  std::vector<std::string> spheres, volume_shells;
  std::string suite = "all";
  std::size_t profile_points = 21;
};

struct Flags {
  CLI::App* app;
  bool given(const char* name) const {
    const CLI::Option* opt = app->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  }
};

void add_geometry_flags(CLI::App* sub, Options& o) {
  sub->add_option("--shape", o.shape, "ball, nested or voxel-ball")
      ->check(CLI::IsMember({"ball", "nested", "voxel-ball"}));
  sub->add_option("--radius", o.radius, "ball radius (inner ball for nested)");
  sub->add_option("--shells", o.shells, "nested shell faces as inner:outer")->delimiter(',');
  sub->add_option("--outer-sphere", o.outer_sphere, "zero-thickness outer sphere radius (nested)");
  sub->add_option("--scenario", o.scenario, "scenario file; flags override its values");
}

void add_grid_flags(CLI::App* sub, Options& o) {
  sub->add_option("--nodes", o.nodes, "radial node count");
  sub->add_option("--r-max", o.r_max, "outer edge of the radial grid");
}

void add_param_flags(CLI::App* sub, Options& o) {
  sub->add_option("--k", o.k, "screening constant");
  sub->add_option("--charge", o.q, "total charge q");
}

ShellFace parse_face(const std::string& text) {
  double a = 0.0, b = 0.0;
  char colon = 0;
  std::istringstream in(text);
  if (!(in >> a >> colon >> b) || colon != ':' || !in.eof()) {
    throw UsageError("--shells expects inner:outer pairs, got '" + text + "'");
  }
  return {a, b};
}

/// Scenario from the file (if any) with the given flags applied on top.
Scenario resolve(const Flags& f, const Options& o) {
  Scenario s;
  const bool from_file = f.given("--scenario");
  if (from_file) s = load_scenario(o.scenario);

  const bool geometry_flags = f.given("--shape") || f.given("--radius") || f.given("--shells") ||
                              f.given("--outer-sphere");
  if (geometry_flags || !from_file) {
    std::string shape = o.shape;
    if (shape.empty()) {
      if (from_file && std::holds_alternative<NestedShells>(s.geometry)) {
        shape = "nested";
      } else if (from_file && std::holds_alternative<VoxelSet>(s.geometry)) {
        shape = "voxel-ball";
      } else {
        shape = f.given("--shells") ? "nested" : "ball";
      }
    }
    std::optional<double> radius;
    if (f.given("--radius")) {
      radius = o.radius;
    } else if (from_file) {
      if (const auto* b = std::get_if<Ball>(&s.geometry)) radius = b->radius;
      if (const auto* n = std::get_if<NestedShells>(&s.geometry)) radius = n->inner_radius;
    }
    if (shape == "ball") {
      if (!radius) throw UsageError("--radius is required");
      s.geometry = Ball{*radius};
    } else if (shape == "nested") {
      NestedShells n;
      if (from_file && std::holds_alternative<NestedShells>(s.geometry)) n = std::get<NestedShells>(s.geometry);
      if (radius) n.inner_radius = *radius;
      if (f.given("--shells")) {
        n.shell_faces.clear();
        for (const auto& t : o.shells) n.shell_faces.push_back(parse_face(t));
      }
      if (f.given("--outer-sphere")) n.outer_sphere_radius = o.outer_sphere;
      s.geometry = n;
    } else {
      if (!radius && !(from_file && std::holds_alternative<VoxelSet>(s.geometry))) {
        throw UsageError("--radius is required");
      }
      if (radius) s.geometry = make_ball_mask(*radius, f.given("--spacing") ? o.spacing : 1.0 / 32.0);
    }
  }

  if (f.given("--k")) s.params.k = o.k;
  if (f.given("--charge")) s.params.q = o.q;
  if (f.given("--e")) s.params.e = o.e;
  if (f.given("--delta")) s.params.delta = o.delta;

  if (is_radial(s.geometry)) {
    RadialGridSpec g = from_file && std::holds_alternative<RadialGridSpec>(s.grid) ? std::get<RadialGridSpec>(s.grid)
                                                                                  : default_grid_spec(s.geometry);
    if (geometry_flags && !f.given("--r-max") && !(from_file && std::holds_alternative<RadialGridSpec>(s.grid))) {
      g = default_grid_spec(s.geometry);
    }
    if (f.given("--nodes")) g.node_count = o.nodes;
    if (f.given("--r-max")) g.r_max = o.r_max;
    s.grid = g;
  } else {
    VoxelGridSpec g = std::holds_alternative<VoxelGridSpec>(s.grid) ? std::get<VoxelGridSpec>(s.grid) : VoxelGridSpec{};
    g.spacing = std::get<VoxelSet>(s.geometry).spacing;
    if (f.given("--padding")) g.padding = o.padding;
    s.grid = g;
  }
  return s;
}

void require_valid(const Scenario& s) {
  const auto violations = validate(s);
  if (violations.empty()) return;
  std::string msg;
  for (const auto& v : violations) msg += (msg.empty() ? "" : "\n") + v;
  throw UsageError(msg);
}

void require_radial(const Scenario& s) {
  if (!is_radial(s.geometry)) throw UsageError("this command needs a radial geometry (ball or nested)");
}

template <class Write>
void write_file(const std::string& path, Write write) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  write(out);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

std::string pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g%%", 100.0 * x);
  return buf;
}

std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.6g", x);
  return buf;
}

int cmd_capacity(const Flags& f, const Options& o) {
  const auto s = resolve(f, o);
  require_radial(s);
  require_valid(s);
  const double c = capacity(s.geometry, std::get<RadialGridSpec>(s.grid));
  if (const auto* b = std::get_if<Ball>(&s.geometry)) {
    const double err = std::abs(c - b->radius) / b->radius;
    std::cout << "C=" << fixed6(c) << " (analytic " << format_sig(b->radius) << ", "
              << (err < 0.01 ? "err<1%" : "err=" + pct(err)) << ")\n";
  } else {
    std::cout << "C=" << fixed6(c) << " (no closed form)\n";
  }
  return 0;
}

int cmd_equilibrium(const Flags& f, const Options& o) {
  const auto s = resolve(f, o);
  require_radial(s);
  require_valid(s);
  const auto sol = solve_equilibrium(s.geometry, s.params.q, s.params.k, std::get<RadialGridSpec>(s.grid));
  write_equilibrium_report(sol, std::cout);
  if (const auto* b = std::get_if<Ball>(&s.geometry)) {
    const auto c = ball_closed_form(b->radius, s.params.q, s.params.k);
    std::cout << "closed_form_A = " << format_sig(c.A) << "\n"
              << "closed_form_Q = " << format_sig(c.Q) << "\n"
              << "closed_form_q_hat = " << format_sig(c.q_hat) << "\n";
  }
  if (!o.out.empty()) write_file(o.out, [&](std::ostream& out) { write_charge_table(sol.charges, out); });
  return 0;
}

ChargeComponent parse_component(const std::string& text, bool shell) {
  std::vector<double> v;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ':')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError("cannot parse '" + text + "'");
    }
  }
  if (shell) {
    if (v.size() != 3) throw UsageError("--volume-shell expects a:b:charge, got '" + text + "'");
    return VolumeShell{v[0], v[1], v[2]};
  }
  if (v.size() != 2) throw UsageError("--sphere expects radius:charge, got '" + text + "'");
  return SurfaceSphere{v[0], v[1]};
}

int cmd_potential(const Flags& f, const Options& o) {
  const auto s = resolve(f, o);
  require_radial(s);
  require_valid(s);
  ChargeDistribution dist;
  for (const auto& t : o.spheres) dist.components.push_back(parse_component(t, false));
  for (const auto& t : o.volume_shells) dist.components.push_back(parse_component(t, true));
  const auto& spec = std::get<RadialGridSpec>(s.grid);
  PotentialField field;
  if (dist.empty()) {
    field = solve_equilibrium(s.geometry, s.params.q, s.params.k, spec).potential;
    std::cout << "distribution = equilibrium, q = " << format_sig(s.params.q) << "\n";
  } else {
    const auto problems = validate(dist, s.geometry);
    if (!problems.empty()) throw UsageError(problems.front());
    field = solve_radial_potential(make_radial_grid(s.geometry, spec, dist), dist, s.params.k);
    std::cout << "distribution total = " << format_sig(dist.total()) << "\n";
  }
  std::cout << "U(0) = " << format_sig(field.values.front()) << "\n"
            << "far_coefficient = " << format_sig(field.far_coefficient) << "\n"
            << "flux_identity_rhs = "
            << format_sig((dist.empty() ? s.params.q : dist.total()) + s.params.k * s.params.k * conductor_integral(field))
            << "\n";
  for (double rho : o.at) std::cout << "U(" << format_sig(rho) << ") = " << format_sig(eval_potential(field, rho)) << "\n";
  if (!o.out.empty()) write_file(o.out, [&](std::ostream& out) { write_potential_csv(field, out); });
  return 0;
}

int cmd_forces(const Flags& f, const Options& o) {
  const auto s = resolve(f, o);
  require_radial(s);
  require_valid(s);
  const auto* b = std::get_if<Ball>(&s.geometry);
  if (!b) throw UsageError("forces needs --shape ball");
  const double r = b->radius, k = s.params.k, e = s.params.e;
  const auto sol = solve_equilibrium(s.geometry, s.params.q, k, std::get<RadialGridSpec>(s.grid));
  std::vector<double> radii = o.at;
  if (radii.empty()) radii = {0.5 * r, 1.5 * r, 2.0 * r, 4.0 * r};
  for (double rho : radii) {
    std::cout << "rho = " << format_sig(rho) << ": ";
    std::string force;
    try {
      force = "F_k = " + format_sig(gradient_force(sol.potential, rho, e));
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::KinkRadius) throw;
      force = "F_k (mollified, r=" + format_sig(0.01 * r) +
              ") = " + format_sig(mollified_force(sol.potential, rho, e, 0.01 * r));
    }
    std::cout << force;
    std::cout << ", F_electric_only = " << format_sig(electric_only_interior_force(sol, rho, e));
    if (rho > r) std::cout << ", eq/rho^2 = " << format_sig(e * s.params.q / (rho * rho));
    std::cout << "\n";
  }
  std::cout << "interior_force_ratio = " << format_sig(interior_force_ratio(sol, s.geometry)) << "\n"
            << "M = " << format_sig(collision_balance(sol.Q, k, r)) << "\n";
  if (!o.out.empty()) {
    std::vector<double> profile;
    for (std::size_t i = 0; i <= 200; ++i) profile.push_back(3.0 * r * static_cast<double>(i) / 200.0);
    write_file(o.out, [&](std::ostream& out) { write_force_profile(sol, r, k, e, profile, out); });
  }
  return 0;
}

int cmd_photoeffect(const Flags& f, const Options& o) {
  const auto s = resolve(f, o);
  const auto* b = std::get_if<Ball>(&s.geometry);
  if (!b) throw UsageError("photoeffect needs --shape ball");
  const auto m = make_pair_model(b->radius, s.params.delta, s.params.k, s.params.q, s.params.e);
  write_photoeffect_report(m, std::cout);
  if (!o.out.empty()) write_file(o.out, [&](std::ostream& out) { write_pair_force_profile(m, o.profile_points, out); });
  return 0;
}

int cmd_nested(const Flags& f, const Options& o) {
  auto s = resolve(f, o);
  if (!std::holds_alternative<NestedShells>(s.geometry)) {
    if (const auto* b = std::get_if<Ball>(&s.geometry)) {
      s.geometry = NestedShells{b->radius, {}, std::nullopt};
    } else {
      throw UsageError("nested needs a radial geometry");
    }
  }
  require_valid(s);
  const auto charges = nested_spheres_charges(std::get<NestedShells>(s.geometry), s.params.q);
  for (const auto& c : charges) {
    std::cout << "q(" << format_sig(c.radius) << ") = " << format_sig(c.charge) << "\n";
  }
  std::cout << "total_variation = " << format_sig(total_variation(charges)) << "\n";
  if (!o.out.empty()) {
    write_file(o.out, [&](std::ostream& out) {
      out << "radius,charge\n";
      for (const auto& c : charges) out << format_sig(c.radius, 12) << "," << format_sig(c.charge, 12) << "\n";
    });
  }
  return 0;
}

int cmd_voxel(const Flags& f, const Options& o) {
  Scenario s;
  if (f.given("--mask")) {
    std::ifstream in(o.mask);
    if (!in) throw Error(ErrorKind::Io, "cannot read mask file " + o.mask);
    s.geometry = read_mask(in);
    if (f.given("--k")) s.params.k = o.k;
    if (f.given("--charge")) s.params.q = o.q;
  } else {
    Options ball = o;
    if (ball.shape.empty()) ball.shape = "voxel-ball";
    if (ball.shape != "voxel-ball") throw UsageError("voxel needs --shape voxel-ball or --mask");
    s = resolve(f, ball);
    if (is_radial(s.geometry)) {
      s.geometry = make_ball_mask(outer_radius(s.geometry), o.spacing);
    }
  }
  s.grid = VoxelGridSpec{std::get<VoxelSet>(s.geometry).spacing,
                         f.given("--padding") ? o.padding : VoxelGridSpec{}.padding};
  require_valid(s);
  const auto& mask = std::get<VoxelSet>(s.geometry);
  const auto& grid = std::get<VoxelGridSpec>(s.grid);
  const auto t0 = std::chrono::steady_clock::now();
  const auto eq = solve_voxel_equilibrium(mask, s.params.q, s.params.k, grid.padding);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "A = " << format_sig(eq.A) << "\n"
            << "a_far = " << format_sig(eq.a_far) << "\n"
            << "interior_charge = " << format_sig(eq.interior_charge) << "\n"
            << "surface_charge = " << format_sig(eq.surface_charge) << "\n"
            << "cells = " << mask.count() << "\n"
            << "box = " << eq.field.box.nx << "x" << eq.field.box.ny << "x" << eq.field.box.nz << "\n"
            << "poincare_surrogate = " << format_sig(voxel_poincare_surrogate(mask))
            << " (circumscribed ball, conservative)\n"
            << "seconds = " << format_sig(seconds, 3) << "\n";
  if (!o.out.empty()) write_voxel_field(eq.field, o.out);
  return 0;
}

int cmd_verify(const Options& o) {
  const auto results = run_suite(o.suite);
  write_suite_report(results, std::cout);
  return all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-potentials, equilibria, forces and the electron-pair model"};
  app.require_subcommand(1);
  Options o;

  auto* capacity_cmd = app.add_subcommand("capacity", "capacity of a radial conductor");
  auto* equilibrium_cmd = app.add_subcommand("equilibrium", "k-equilibrium distribution");
  auto* potential_cmd = app.add_subcommand("potential", "k-potential of a distribution");
  auto* forces_cmd = app.add_subcommand("forces", "forces around an equilibrium ball");
  auto* photo_cmd = app.add_subcommand("photoeffect", "electron-pair model");
  auto* nested_cmd = app.add_subcommand("nested", "Coulomb face charges of nested shells");
  auto* voxel_cmd = app.add_subcommand("voxel", "voxel equilibrium");
  auto* verify_cmd = app.add_subcommand("verify", "run self-check suites");

  for (auto* sub : {capacity_cmd, equilibrium_cmd, potential_cmd, forces_cmd, photo_cmd, nested_cmd, voxel_cmd}) {
    add_geometry_flags(sub, o);
    add_param_flags(sub, o);
    add_grid_flags(sub, o);
    sub->add_option("--out", o.out, "output file (CSV, or field stem for voxel)");
  }
  for (auto* sub : {forces_cmd, photo_cmd}) sub->add_option("--e", o.e, "probe charge e");
  photo_cmd->add_option("--delta", o.delta, "pair separation delta");
  photo_cmd->add_option("--profile-points", o.profile_points, "rows in the force profile");
  potential_cmd->add_option("--sphere", o.spheres, "surface charge radius:charge (repeatable)");
  potential_cmd->add_option("--volume-shell", o.volume_shells, "uniform shell a:b:charge (repeatable)");
  for (auto* sub : {potential_cmd, forces_cmd}) sub->add_option("--at", o.at, "radii to report")->delimiter(',');
  voxel_cmd->add_option("--spacing", o.spacing, "voxel spacing");
  voxel_cmd->add_option("--padding", o.padding, "box padding per side, in conductor diameters");
  voxel_cmd->add_option("--mask", o.mask, "mask file (header + run lengths)");
  verify_cmd->add_option("--suite", o.suite, "radial, functional, equilibrium, voxel, forces, photoeffect, all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  const Flags flags{active};
  try {
    if (active == capacity_cmd) return cmd_capacity(flags, o);
    if (active == equilibrium_cmd) return cmd_equilibrium(flags, o);
    if (active == potential_cmd) return cmd_potential(flags, o);
    if (active == forces_cmd) return cmd_forces(flags, o);
    if (active == photo_cmd) return cmd_photoeffect(flags, o);
    if (active == nested_cmd) return cmd_nested(flags, o);
    if (active == voxel_cmd) return cmd_voxel(flags, o);
    return cmd_verify(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool usage = e.kind() == ErrorKind::InvalidInput || e.kind() == ErrorKind::Io ||
                       e.kind() == ErrorKind::DenominatorNonpositive;
    return usage ? kExitUsage : kExitNumerical;
  }
}
