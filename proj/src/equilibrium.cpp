#include "potkit/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "potkit/error.hpp"
#include "potkit/format.hpp"

namespace potkit {

namespace {

double quadratic_energy(const RadialOperator& op, const ChargeDistribution& d) {
  const auto b = op.load(d);
  const auto v = op.solve(b);
  double w = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) w += b[i] * v[i];
  return w;
}

ChargeDistribution midpoint(const ChargeDistribution& l1, const ChargeDistribution& l2) {
  ChargeDistribution mid = l1.scaled(0.5);
  for (const auto& c : l2.scaled(0.5).components) mid.components.push_back(c);
  return mid;
}

}  // namespace

std::vector<ChargeComponent> equilibrium_basis(const ConductorGeometry& geometry, std::size_t volume_shells) {
  if (volume_shells == 0) throw Error(ErrorKind::InvalidInput, "need at least one volume shell");
  const auto intervals = conductor_intervals(geometry);
  double thickness = 0.0;
  for (const auto& [a, b] : intervals) thickness += b - a;

  std::vector<ChargeComponent> basis;
  for (const auto& [a, b] : intervals) {
    if (b == a) {
      basis.push_back(SurfaceSphere{a, 1.0});
      continue;
    }
    if (a > 0.0) basis.push_back(SurfaceSphere{a, 1.0});
    const auto n = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(static_cast<double>(volume_shells) * (b - a) / thickness)));
    for (std::size_t i = 0; i < n; ++i) {
      const double lo = a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
      const double hi = i + 1 == n ? b : a + (b - a) * static_cast<double>(i + 1) / static_cast<double>(n);
      basis.push_back(VolumeShell{lo, hi, 1.0});
    }
    basis.push_back(SurfaceSphere{b, 1.0});
  }
  return basis;
}

EquilibriumSolution solve_equilibrium(const ConductorGeometry& geometry, double q, double k, const RadialGridSpec& spec,
                                      std::size_t volume_shells) {
  if (!is_radial(geometry)) throw Error(ErrorKind::InvalidInput, "voxel conductors go through the voxel solver");
  if (!std::isfinite(q)) throw Error(ErrorKind::InvalidInput, "charge must be finite");
  const auto basis = equilibrium_basis(geometry, volume_shells);
  const auto grid = make_radial_grid(geometry, spec, ChargeDistribution{basis});

  EquilibriumSolution sol;
  sol.matrix = assemble_energy_matrix(basis, grid, k);
  const auto m = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd saddle = Eigen::MatrixXd::Zero(m + 1, m + 1);
  saddle.topLeftCorner(m, m) = sol.matrix.entries;
  saddle.col(m).head(m).setOnes();
  saddle.row(m).head(m).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
  rhs(m) = q;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(saddle);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-13)) {
    throw Error(ErrorKind::SingularSystem, "equilibrium system is singular (rcond = " + format_sig(rcond) + ")");
  }
  const Eigen::VectorXd x = lu.solve(rhs);
  sol.coefficients = x.head(m);
  sol.A = -x(m);
  sol.W = sol.matrix.energy(sol.coefficients);

  for (Eigen::Index i = 0; i < m; ++i) {
    const double c = sol.coefficients(i);
    if (c == 0.0) continue;
    const auto& b = basis[static_cast<std::size_t>(i)];
    sol.charges.components.push_back(with_charge(b, c));
    (std::holds_alternative<VolumeShell>(b) ? sol.Q : sol.q_hat) += c;
  }
  sol.potential = solve_radial_potential(grid, sol.charges, k);
  return sol;
}

EquilibriumSolution solve_equilibrium(const ConductorGeometry& geometry, double q, double k) {
  return solve_equilibrium(geometry, q, k, default_grid_spec(geometry));
}

BallClosedForm ball_closed_form(double r, double q, double k) {
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidInput, "radius must be positive");
  const double volume = ball_volume(r);
  const double denominator = r - k * k * volume;
  if (!(denominator > 0.0)) {
    throw Error(ErrorKind::DenominatorNonpositive,
                "C - k^2 |E| = " + format_sig(denominator) + " is not positive; k is too large for this ball");
  }
  return {q / denominator, -q * k * k * volume / denominator, q * r / denominator};
}

ChargeDistribution equilibrium_distribution_ball(double r, double q, double k) {
  const auto f = ball_closed_form(r, q, k);
  ChargeDistribution d;
  if (f.Q != 0.0) d.components.push_back(VolumeShell{0.0, r, f.Q});
  d.components.push_back(SurfaceSphere{r, f.q_hat});
  return d;
}

std::vector<SurfaceSphere> nested_spheres_charges(const NestedShells& geometry, double q) {
  std::vector<double> radii{geometry.inner_radius};
  for (const auto& f : geometry.shell_faces) {
    radii.push_back(f.inner);
    radii.push_back(f.outer);
  }
  if (!(radii[0] > 0.0)) throw Error(ErrorKind::InvalidInput, "inner radius must be positive");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] > radii[i - 1])) {
      throw Error(ErrorKind::SingularSystem, "faces at " + format_sig(radii[i - 1]) + " and " + format_sig(radii[i]) +
                                                 " touch or overlap");
    }
  }
  const auto n = static_cast<Eigen::Index>(radii.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  m(0, 0) = 1.0;
  rhs(0) = q;
  for (Eigen::Index ia = 1; ia + 1 < n; ia += 2) {
    const Eigen::Index ib = ia + 1;
    const double a = radii[static_cast<std::size_t>(ia)], b = radii[static_cast<std::size_t>(ib)];
    m(ia, ia) = 1.0;  // neutral shell
    m(ia, ib) = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {  // U(a) = U(b)
      const double rj = radii[static_cast<std::size_t>(j)];
      m(ib, j) = std::min(1.0 / rj, 1.0 / a) - std::min(1.0 / rj, 1.0 / b);
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  if (!(lu.rcond() > 1e-13)) throw Error(ErrorKind::SingularSystem, "nested-sphere system is singular");
  const Eigen::VectorXd x = lu.solve(rhs);
  std::vector<SurfaceSphere> out(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) out[i] = {radii[i], x(static_cast<Eigen::Index>(i))};
  return out;
}

double total_variation(const std::vector<SurfaceSphere>& charges) {
  double s = 0.0;
  for (const auto& c : charges) s += std::abs(c.charge);
  return s;
}

ConvexityResult convexity_check(const ChargeDistribution& l1, const ChargeDistribution& l2,
                                const ConductorGeometry& geometry, double k) {
  const auto mid = midpoint(l1, l2);
  const auto grid = make_radial_grid(geometry, default_grid_spec(geometry), mid);
  check_resolved(grid, mid, k);
  RadialOperator op(grid, k);
  return {quadratic_energy(op, mid), 0.5 * (quadratic_energy(op, l1) + quadratic_energy(op, l2))};
}

ConvexityResult convexity_check(const EnergyMatrix& g, const Eigen::VectorXd& c1, const Eigen::VectorXd& c2) {
  if (c1.size() != g.entries.rows() || c2.size() != g.entries.rows()) {
    throw Error(ErrorKind::GridMismatch, "coefficient vectors do not match the basis");
  }
  return {g.energy(0.5 * (c1 + c2)), 0.5 * (g.energy(c1) + g.energy(c2))};
}

double constancy_check(const EquilibriumSolution& sol) {
  const auto& g = sol.potential.grid;
  double dev = 0.0;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (g.in_conductor(g.nodes[i])) dev = std::max(dev, std::abs(sol.potential.values[i] - sol.A));
  }
  return dev;
}

double potential_deviation(const PotentialField& field, const ConductorGeometry& geometry) {
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (std::size_t i = 0; i < field.grid.node_count(); ++i) {
    if (!in_conductor(geometry, field.grid.nodes[i])) continue;
    lo = std::min(lo, field.values[i]);
    hi = std::max(hi, field.values[i]);
  }
  return hi >= lo ? hi - lo : 0.0;
}

void write_equilibrium_report(const EquilibriumSolution& sol, std::ostream& out) {
  out << "A = " << format_sig(sol.A) << "\n"
      << "Q = " << format_sig(sol.Q) << "\n"
      << "q_hat = " << format_sig(sol.q_hat) << "\n"
      << "W = " << format_sig(sol.W) << "\n"
      << "constancy_deviation = " << format_sig(constancy_check(sol)) << "\n"
      << "grid_nodes = " << sol.potential.grid.node_count() << "\n";
}

void write_charge_table(const ChargeDistribution& dist, std::ostream& out) {
  out << "component,r_inner,r_outer,charge\n";
  for (const auto& c : dist.components) {
    if (const auto* s = std::get_if<VolumeShell>(&c)) {
      out << "shell," << format_sig(s->a, 12) << "," << format_sig(s->b, 12) << "," << format_sig(s->charge, 12) << "\n";
    } else {
      const auto& p = std::get<SurfaceSphere>(c);
      out << "sphere," << format_sig(p.radius, 12) << "," << format_sig(p.radius, 12) << ","
          << format_sig(p.charge, 12) << "\n";
    }
  }
}

}  // namespace potkit
