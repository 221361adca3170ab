#include "potkit/radial_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "potkit/error.hpp"
#include "tridiagonal.hpp"

namespace potkit {

namespace {

double rel_tol(double tol, double x) { return tol * std::max(1.0, std::abs(x)); }

std::vector<double> unique_sorted(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  std::vector<double> out;
  for (double x : xs) {
    if (out.empty() || std::abs(x - out.back()) > rel_tol(1e-12, x)) out.push_back(x);
  }
  return out;
}

RadialGrid build_grid(std::vector<std::pair<double, double>> conductor_set, std::vector<double> interfaces,
                      double r_max, std::size_t node_count) {
  if (node_count < 3) throw Error(ErrorKind::InvalidInput, "radial grid needs at least 3 nodes");
  for (const auto& [a, b] : conductor_set) {
    if (a > 0.0) interfaces.push_back(a);
    interfaces.push_back(b);
  }
  std::vector<double> breaks;
  for (double x : unique_sorted(std::move(interfaces))) {
    if (x <= 0.0) continue;
    if (x >= r_max - rel_tol(1e-12, r_max)) {
      throw Error(ErrorKind::InvalidInput, "r_max must strictly exceed every conductor and charge radius");
    }
    breaks.push_back(x);
  }

  std::vector<double> ends{0.0};
  ends.insert(ends.end(), breaks.begin(), breaks.end());
  ends.push_back(r_max);
  const std::size_t nseg = ends.size() - 1;
  const std::size_t cells = node_count - 1;
  const std::size_t min_cells = cells >= 4 * nseg ? 4 : 1;

  // Largest-remainder apportionment of cells to segments.
  std::vector<std::size_t> count(nseg);
  std::vector<double> frac(nseg);
  std::size_t used = 0;
  for (std::size_t s = 0; s < nseg; ++s) {
    const double ideal = (ends[s + 1] - ends[s]) / r_max * static_cast<double>(cells);
    count[s] = std::max(min_cells, static_cast<std::size_t>(std::floor(ideal)));
    frac[s] = ideal - std::floor(ideal);
    used += count[s];
  }
  while (used < cells) {
    const auto s = static_cast<std::size_t>(std::max_element(frac.begin(), frac.end()) - frac.begin());
    ++count[s];
    frac[s] -= 1.0;
    ++used;
  }
  while (used > cells) {
    std::size_t best = nseg;
    for (std::size_t s = 0; s < nseg; ++s) {
      if (count[s] > min_cells && (best == nseg || count[s] > count[best])) best = s;
    }
    if (best == nseg) break;
    --count[best];
    --used;
  }

  RadialGrid g;
  g.nodes.reserve(used + 1);
  g.nodes.push_back(0.0);
  for (std::size_t s = 0; s < nseg; ++s) {
    const double lo = ends[s];
    const double h = (ends[s + 1] - lo) / static_cast<double>(count[s]);
    for (std::size_t i = 1; i < count[s]; ++i) g.nodes.push_back(lo + h * static_cast<double>(i));
    g.nodes.push_back(ends[s + 1]);
  }
  g.breakpoints = std::move(breaks);
  g.conductor_set = std::move(conductor_set);
  g.conductor.resize(g.cell_count());
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    g.conductor[c] = g.in_conductor(0.5 * (g.nodes[c] + g.nodes[c + 1])) ? 1 : 0;
  }
  return g;
}

/// Node-index range [lo, hi] of the smooth segment containing cell c.
struct Segment {
  std::size_t lo;
  std::size_t hi;
};

std::vector<std::size_t> breakpoint_nodes(const RadialGrid& g) {
  std::vector<std::size_t> out;
  for (double b : g.breakpoints) {
    if (auto j = g.node_index(b)) out.push_back(*j);
  }
  return out;
}

Segment segment_of_cell(const RadialGrid& g, std::size_t c) {
  Segment s{0, g.cell_count()};
  for (std::size_t j : breakpoint_nodes(g)) {
    if (j <= c) s.lo = std::max(s.lo, j);
    if (j >= c + 1) s.hi = std::min(s.hi, j);
  }
  return s;
}

struct Local {
  double v;
  double dv;
};

Local quadratic(const PotentialField& f, std::size_t m, double rho) {
  const auto& x = f.grid.nodes;
  const auto& v = f.scaled;
  const double x0 = x[m], x1 = x[m + 1], x2 = x[m + 2];
  const double l0 = (rho - x1) * (rho - x2) / ((x0 - x1) * (x0 - x2));
  const double l1 = (rho - x0) * (rho - x2) / ((x1 - x0) * (x1 - x2));
  const double l2 = (rho - x0) * (rho - x1) / ((x2 - x0) * (x2 - x1));
  const double d0 = ((rho - x1) + (rho - x2)) / ((x0 - x1) * (x0 - x2));
  const double d1 = ((rho - x0) + (rho - x2)) / ((x1 - x0) * (x1 - x2));
  const double d2 = ((rho - x0) + (rho - x1)) / ((x2 - x0) * (x2 - x1));
  return {l0 * v[m] + l1 * v[m + 1] + l2 * v[m + 2], d0 * v[m] + d1 * v[m + 1] + d2 * v[m + 2]};
}

/// v and v' at rho using only nodes of the segment containing cell c.
Local interpolate_in_cell(const PotentialField& f, std::size_t c, double rho) {
  const auto& x = f.grid.nodes;
  const auto& v = f.scaled;
  const Segment s = segment_of_cell(f.grid, c);
  if (s.hi - s.lo == 1) {
    const double h = x[c + 1] - x[c];
    const double slope = (v[c + 1] - v[c]) / h;
    return {v[c] + slope * (rho - x[c]), slope};
  }
  std::size_t m = c >= s.lo + 1 ? c - 1 : c;
  if (m + 2 > s.hi) m = s.hi - 2;
  return quadratic(f, m, rho);
}

/// Near the origin U is even, so v = a rho + b rho^3; fitted through nodes 1, 2.
bool use_odd_model(const PotentialField& f, std::size_t c) {
  return c == 0 && segment_of_cell(f.grid, 0).hi >= 2;
}

std::pair<double, double> odd_coefficients(const PotentialField& f) {
  const double x1 = f.grid.nodes[1], x2 = f.grid.nodes[2];
  const double u1 = f.scaled[1] / x1, u2 = f.scaled[2] / x2;
  const double b = (u2 - u1) / (x2 * x2 - x1 * x1);
  return {u1 - b * x1 * x1, b};
}

double gradient_from_local(Local l, double rho) { return (l.dv * rho - l.v) / (rho * rho); }

double node_gradient(const PotentialField& f, std::size_t j, Side side) {
  const auto& g = f.grid;
  const std::size_t n = g.cell_count();
  const double rho = g.nodes[j];
  if (j == 0) return 0.0;
  if (j == n) {
    if (side == Side::Outer) return -f.far_coefficient / (rho * rho);
    return gradient_from_local(interpolate_in_cell(f, n - 1, rho), rho);
  }
  if (!g.is_breakpoint(rho)) {
    return gradient_from_local(quadratic(f, j - 1, rho), rho);
  }
  const std::size_t cell = side == Side::Inner ? j - 1 : j;
  if (use_odd_model(f, cell)) {
    const auto [a, b] = odd_coefficients(f);
    (void)a;
    return 2.0 * b * rho;
  }
  return gradient_from_local(interpolate_in_cell(f, cell, rho), rho);
}

/// rho * v'(rho) - v(rho) = rho^2 U'(rho), one-sided at node j.
double flux_at_node(const PotentialField& f, std::size_t j, Side side) {
  const double rho = f.grid.nodes[j];
  if (j == 0) return 0.0;
  return rho * rho * node_gradient(f, j, side);
}

double rho_v_integral(const PotentialField& f, std::size_t c) {
  const auto& x = f.grid.nodes;
  const auto& v = f.scaled;
  const double h = x[c + 1] - x[c];
  return h * (2.0 * x[c] * v[c] + x[c] * v[c + 1] + x[c + 1] * v[c] + 2.0 * x[c + 1] * v[c + 1]) / 6.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid

std::optional<std::size_t> RadialGrid::node_index(double rho, double tol) const {
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), rho);
  const double slack = rel_tol(tol, rho);
  if (it != nodes.end() && std::abs(*it - rho) <= slack) return static_cast<std::size_t>(it - nodes.begin());
  if (it != nodes.begin() && std::abs(*(it - 1) - rho) <= slack) return static_cast<std::size_t>(it - nodes.begin() - 1);
  return std::nullopt;
}

bool RadialGrid::is_breakpoint(double rho, double tol) const {
  return std::any_of(breakpoints.begin(), breakpoints.end(),
                     [&](double b) { return std::abs(b - rho) <= rel_tol(tol, rho); });
}

bool RadialGrid::in_conductor(double rho) const {
  for (const auto& [a, b] : conductor_set) {
    if (rho >= a - rel_tol(1e-12, a) && rho <= b + rel_tol(1e-12, b)) return true;
  }
  return false;
}

std::size_t RadialGrid::cell_of(double rho) const {
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), rho);
  if (it == nodes.begin()) return 0;
  const auto c = static_cast<std::size_t>(it - nodes.begin()) - 1;
  return std::min(c, cell_count() - 1);
}

RadialGrid make_radial_grid(const ConductorGeometry& geometry, double r_max, std::size_t node_count,
                            std::span<const double> extra_radii) {
  return build_grid(conductor_intervals(geometry), {extra_radii.begin(), extra_radii.end()}, r_max, node_count);
}

RadialGridSpec default_grid_spec(const ConductorGeometry& geometry) {
  return RadialGridSpec{10.0 * outer_radius(geometry), 2000};
}

RadialGrid make_radial_grid(const ConductorGeometry& geometry, const RadialGridSpec& spec,
                            const ChargeDistribution& dist) {
  const auto radii = dist.radii();
  return make_radial_grid(geometry, spec.r_max, spec.node_count, radii);
}

RadialGrid make_radial_grid(std::span<const double> interface_radii, double r_max, std::size_t node_count) {
  return build_grid({}, {interface_radii.begin(), interface_radii.end()}, r_max, node_count);
}

RadialGrid make_plain_grid(std::vector<double> nodes) {
  if (nodes.size() < 2 || nodes.front() != 0.0) throw Error(ErrorKind::InvalidInput, "grid must start at 0");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) throw Error(ErrorKind::InvalidInput, "grid nodes must be strictly increasing");
  }
  RadialGrid g;
  g.nodes = std::move(nodes);
  g.conductor.assign(g.cell_count(), 0);
  return g;
}

RadialGrid make_uniform_grid(double r_max, std::size_t node_count) {
  std::vector<double> nodes(node_count);
  for (std::size_t i = 0; i < node_count; ++i) {
    nodes[i] = r_max * static_cast<double>(i) / static_cast<double>(node_count - 1);
  }
  return make_plain_grid(std::move(nodes));
}

// ---------------------------------------------------------------------------
// Operator

RadialOperator::RadialOperator(RadialGrid grid, double k) : grid_(std::move(grid)), k_(k) {
  if (!(k >= 0.0)) throw Error(ErrorKind::InvalidInput, "k must be non-negative");
  auto f = detail::factor(detail::assemble_k_form(grid_, kFourPi * k * k));
  if (f.negative_pivots > 0 || f.zero_pivots > 0) {
    throw Error(ErrorKind::IndefiniteForm,
                "discrete k-form is not positive definite (k = " + std::to_string(k) + " exceeds the Poincare constant)");
  }
  pivots_ = std::move(f.pivots);
  lower_ = std::move(f.lower);
  offdiag_ = std::move(f.off);
}

std::vector<double> RadialOperator::load(const ChargeComponent& c) const {
  std::vector<double> b(grid_.node_count(), 0.0);
  if (const auto* s = std::get_if<SurfaceSphere>(&c)) {
    const auto j = grid_.node_index(s->radius);
    if (!j || *j == 0) throw Error(ErrorKind::UnresolvedComponent, "surface sphere radius is not a grid node");
    b[*j] += s->charge / s->radius;
    return b;
  }
  const auto& sh = std::get<VolumeShell>(c);
  const auto ia = grid_.node_index(sh.a);
  const auto ib = grid_.node_index(sh.b);
  if (!ia || !ib || *ib <= *ia) throw Error(ErrorKind::UnresolvedComponent, "volume shell ends are not grid nodes");
  const double density = sh.charge / shell_volume(sh.a, sh.b);
  const auto& x = grid_.nodes;
  for (std::size_t c2 = *ia; c2 < *ib; ++c2) {
    const double h = x[c2 + 1] - x[c2];
    b[c2] += kFourPi * density * h * (2.0 * x[c2] + x[c2 + 1]) / 6.0;
    b[c2 + 1] += kFourPi * density * h * (x[c2] + 2.0 * x[c2 + 1]) / 6.0;
  }
  return b;
}

std::vector<double> RadialOperator::load(const ChargeDistribution& d) const {
  std::vector<double> b(grid_.node_count(), 0.0);
  for (const auto& c : d.components) {
    const auto bc = load(c);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += bc[i];
  }
  return b;
}

std::vector<double> RadialOperator::solve(std::span<const double> load) const {
  if (load.size() != grid_.node_count()) throw Error(ErrorKind::GridMismatch, "load vector size mismatch");
  std::vector<double> v(load.begin(), load.end());
  v[0] = 0.0;
  detail::LdltFactor f{pivots_, lower_, offdiag_, 0, 0};
  detail::solve_in_place(f, std::span<double>(v).subspan(1));
  return v;
}

PotentialField RadialOperator::field(std::vector<double> v) const {
  PotentialField f;
  f.grid = grid_;
  f.scaled = std::move(v);
  const std::size_t n = f.grid.node_count();
  f.values.resize(n);
  for (std::size_t i = 1; i < n; ++i) f.values[i] = f.scaled[i] / f.grid.nodes[i];
  if (use_odd_model(f, 0)) {
    f.values[0] = odd_coefficients(f).first;
  } else {
    f.values[0] = f.values[1];
  }
  f.far_coefficient = f.scaled[n - 1];
  return f;
}

// ---------------------------------------------------------------------------

void check_resolved(const RadialGrid& grid, const ChargeDistribution& dist, double k) {
  for (const auto& c : dist.components) {
    if (const auto* s = std::get_if<SurfaceSphere>(&c)) {
      if (!grid.is_breakpoint(s->radius)) {
        throw Error(ErrorKind::UnresolvedComponent, "surface sphere at " + std::to_string(s->radius) +
                                                        " is not an interface radius of the grid");
      }
      if (k > 0.0 && !grid.in_conductor(s->radius)) {
        throw Error(ErrorKind::InvalidInput, "surface sphere lies outside the conductor");
      }
    } else {
      const auto& sh = std::get<VolumeShell>(c);
      if (!(sh.a < sh.b)) throw Error(ErrorKind::InvalidInput, "shell bounds reversed");
      const auto ia = grid.node_index(sh.a);
      const auto ib = grid.node_index(sh.b);
      if (!ia || !ib) throw Error(ErrorKind::UnresolvedComponent, "volume shell ends are not grid nodes");
      if (*ib - *ia < 4) throw Error(ErrorKind::UnresolvedComponent, "fewer than 4 cells across a volume shell");
      if (k > 0.0) {
        for (std::size_t c2 = *ia; c2 < *ib; ++c2) {
          if (!grid.conductor[c2]) throw Error(ErrorKind::InvalidInput, "volume shell extends outside the conductor");
        }
      }
    }
  }
}

PotentialField solve_radial_potential(const RadialGrid& grid, const ChargeDistribution& dist, double k) {
  check_resolved(grid, dist, k);
  RadialOperator op(grid, k);
  return op.field(op.solve(op.load(dist)));
}

double eval_potential(const PotentialField& field, double rho) {
  const auto& g = field.grid;
  if (rho < 0.0) throw Error(ErrorKind::InvalidInput, "rho must be non-negative");
  if (rho >= g.r_max()) return field.far_coefficient / rho;
  if (rho == 0.0) return field.values[0];
  if (auto j = g.node_index(rho, 1e-14)) return field.values[*j];
  const std::size_t c = g.cell_of(rho);
  if (use_odd_model(field, c)) {
    const auto [a, b] = odd_coefficients(field);
    return a + b * rho * rho;
  }
  return interpolate_in_cell(field, c, rho).v / rho;
}

double eval_radial_gradient(const PotentialField& field, double rho, Side side) {
  const auto& g = field.grid;
  if (rho <= 0.0) return 0.0;
  if (rho > g.r_max()) return -field.far_coefficient / (rho * rho);
  if (auto j = g.node_index(rho, 1e-12)) return node_gradient(field, *j, side);
  const std::size_t c = g.cell_of(rho);
  if (use_odd_model(field, c)) {
    const auto [a, b] = odd_coefficients(field);
    (void)a;
    return 2.0 * b * rho;
  }
  return gradient_from_local(interpolate_in_cell(field, c, rho), rho);
}

double surface_charge_at(const PotentialField& field, double rho) {
  const double jump = eval_radial_gradient(field, rho, Side::Outer) - eval_radial_gradient(field, rho, Side::Inner);
  return -rho * rho * jump;
}

double charge_scale(const PotentialField& field) {
  double s = std::abs(field.far_coefficient);
  for (double v : field.scaled) s = std::max(s, std::abs(v));
  return std::max(s, 1e-300);
}

double conductor_integral(const PotentialField& field) {
  double sum = 0.0;
  for (std::size_t c = 0; c < field.grid.cell_count(); ++c) {
    if (field.grid.conductor[c]) sum += kFourPi * rho_v_integral(field, c);
  }
  return sum;
}

PotentialField coulomb_superposition(std::span<const SurfaceSphere> spheres, const RadialGrid& grid) {
  PotentialField f;
  f.grid = grid;
  const std::size_t n = grid.node_count();
  f.values.assign(n, 0.0);
  f.scaled.assign(n, 0.0);
  for (const auto& s : spheres) {
    for (std::size_t i = 0; i < n; ++i) {
      const double rho = grid.nodes[i];
      f.values[i] += s.charge * (rho <= s.radius ? 1.0 / s.radius : 1.0 / rho);
      f.scaled[i] += s.charge * (rho <= s.radius ? rho / s.radius : 1.0);
    }
    f.far_coefficient += s.charge;
  }
  return f;
}

PotentialField coulomb_superposition(std::span<const SurfaceSphere> spheres) {
  std::vector<double> radii;
  double r = 0.0;
  for (const auto& s : spheres) {
    radii.push_back(s.radius);
    r = std::max(r, s.radius);
  }
  const double r_max = r > 0.0 ? 2.0 * r : 1.0;
  return coulomb_superposition(spheres, make_radial_grid(radii, r_max, 2000));
}

ChargeDistribution decompose_distribution(const PotentialField& field, const ConductorGeometry& geometry, double k) {
  const auto& g = field.grid;
  const auto& x = g.nodes;
  const auto& v = field.scaled;
  const std::size_t n = g.cell_count();
  const double scale = charge_scale(field);
  const double tol = 1e-3 * scale;
  const bool radial = is_radial(geometry);
  auto inside = [&](double rho) { return radial ? potkit::in_conductor(geometry, rho) : false; };

  // Regular nodes in free space must carry no charge at all.
  for (std::size_t j = 1; j < n; ++j) {
    const double mid_lo = 0.5 * (x[j - 1] + x[j]);
    const double mid_hi = 0.5 * (x[j] + x[j + 1]);
    if (g.is_breakpoint(x[j]) || inside(mid_lo) || inside(mid_hi)) continue;
    const double jump = (v[j + 1] - v[j]) / (x[j + 1] - x[j]) - (v[j] - v[j - 1]) / (x[j] - x[j - 1]);
    if (std::abs(x[j] * jump) > 1e-8 * scale) {
      throw Error(ErrorKind::NonConductorKink, "derivative kink at rho = " + std::to_string(x[j]) + " outside the conductor");
    }
  }

  std::vector<std::size_t> ends{0};
  for (std::size_t j : breakpoint_nodes(g)) ends.push_back(j);
  ends.push_back(n);
  std::sort(ends.begin(), ends.end());
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());

  ChargeDistribution out;
  for (std::size_t s = 0; s + 1 < ends.size(); ++s) {
    const std::size_t lo = ends[s], hi = ends[s + 1];
    if (s > 0) {
      const double a = x[lo];
      const double sc = surface_charge_at(field, a);
      if (std::abs(sc) > tol) {
        if (!inside(a)) {
          throw Error(ErrorKind::NonConductorKink, "surface charge at rho = " + std::to_string(a) + " outside the conductor");
        }
        out.components.push_back(SurfaceSphere{a, sc});
      }
    }
    const bool conducting = inside(0.5 * (x[lo] + x[lo + 1]));
    double q = -(flux_at_node(field, hi, Side::Inner) - flux_at_node(field, lo, Side::Outer));
    if (conducting) {
      double integral = 0.0;
      for (std::size_t c = lo; c < hi; ++c) integral += rho_v_integral(field, c);
      q -= kFourPi * k * k * integral;
    }
    if (std::abs(q) > tol) {
      if (!conducting) {
        throw Error(ErrorKind::NonConductorKink, "volume charge in free space on [" + std::to_string(x[lo]) + ", " +
                                                     std::to_string(x[hi]) + "]");
      }
      out.components.push_back(VolumeShell{x[lo], x[hi], q});
    }
  }
  return out;
}

void write_potential_csv(const PotentialField& field, std::ostream& out) {
  out << "rho,U,dU_minus,dU_plus\n";
  char buf[160];
  for (std::size_t i = 0; i < field.grid.node_count(); ++i) {
    const double rho = field.grid.nodes[i];
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g\n", rho, field.values[i],
                  node_gradient(field, i, Side::Inner), node_gradient(field, i, Side::Outer));
    out << buf;
  }
}

}  // namespace potkit
