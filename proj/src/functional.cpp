#include "potkit/functional.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numeric>

#include "potkit/error.hpp"
#include "tridiagonal.hpp"

namespace potkit {

namespace {

using boost::math::quadrature::gauss;

std::vector<double> scaled_values(const SampledRadialFunction& f) {
  std::vector<double> v(f.samples.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f.grid.nodes[i] * f.samples[i];
  return v;
}

void require_shape(const SampledRadialFunction& f) {
  if (f.samples.size() != f.grid.node_count()) throw Error(ErrorKind::GridMismatch, "sample count differs from node count");
}

void require_same_grid(const SampledRadialFunction& f, const SampledRadialFunction& g) {
  require_shape(f);
  require_shape(g);
  if (f.grid.node_count() != g.grid.node_count()) throw Error(ErrorKind::GridMismatch, "functions live on different grids");
  for (std::size_t i = 0; i < f.grid.node_count(); ++i) {
    if (std::abs(f.grid.nodes[i] - g.grid.nodes[i]) > 1e-12 * std::max(1.0, f.grid.nodes[i])) {
      throw Error(ErrorKind::GridMismatch, "functions live on different grids");
    }
  }
}

/// int v' w' - mass * int_{flagged cells} v w, both piecewise linear.
double bilinear(const std::vector<double>& x, const std::vector<double>& v, const std::vector<double>& w,
                const std::vector<std::uint8_t>& flags, double mass) {
  double sum = 0.0;
  for (std::size_t c = 0; c + 1 < x.size(); ++c) {
    const double h = x[c + 1] - x[c];
    sum += (v[c + 1] - v[c]) * (w[c + 1] - w[c]) / h;
    if (flags[c]) {
      sum -= mass * h * (2.0 * v[c] * w[c] + v[c] * w[c + 1] + v[c + 1] * w[c] + 2.0 * v[c + 1] * w[c + 1]) / 6.0;
    }
  }
  return sum;
}

std::vector<std::uint8_t> flags_for(const RadialGrid& g, const ConductorGeometry& geometry) {
  std::vector<std::uint8_t> flags(g.cell_count());
  for (std::size_t c = 0; c < flags.size(); ++c) {
    flags[c] = in_conductor(geometry, 0.5 * (g.nodes[c] + g.nodes[c + 1])) ? 1 : 0;
  }
  return flags;
}

double radius_of_volume(double v) { return std::cbrt(3.0 * v / kFourPi); }

/// Places sorted samples at the radii where the ball volume equals the
/// measure of their superlevel set. A group of equal values shares the
/// plateau between measure{f > t} and measure{f >= t}.
SampledRadialFunction place_levels(std::vector<double> values, const std::function<double(double)>& measure_gt,
                                   const std::function<double(double)>& measure_ge) {
  std::sort(values.begin(), values.end(), std::greater<>());
  std::vector<double> nodes(values.size());
  for (std::size_t i = 0; i < values.size();) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    const double gt = measure_gt(values[i]);
    const double ge = std::max(gt, measure_ge(values[i]));
    const double count = static_cast<double>(j - i);
    for (std::size_t m = i; m < j; ++m) {
      nodes[m] = radius_of_volume(gt + (ge - gt) * (static_cast<double>(m - i) + 0.5) / count);
    }
    i = j;
  }
  nodes[0] = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) nodes[i] = std::nextafter(nodes[i - 1], HUGE_VAL);
  }
  return {make_plain_grid(std::move(nodes)), std::move(values)};
}

/// Measure of {f > t} (or {f >= t}) for f linear on every cell, zero beyond
/// the last node.
double level_measure(const SampledRadialFunction& f, double t, bool inclusive) {
  const auto& x = f.grid.nodes;
  const auto& y = f.samples;
  auto above = [&](double v) { return inclusive ? v >= t : v > t; };
  double sum = 0.0;
  for (std::size_t c = 0; c + 1 < x.size(); ++c) {
    const bool a0 = above(y[c]), a1 = above(y[c + 1]);
    if (a0 && a1) {
      sum += shell_volume(x[c], x[c + 1]);
    } else if (a0 != a1) {
      const double xc = x[c] + (t - y[c]) / (y[c + 1] - y[c]) * (x[c + 1] - x[c]);
      sum += a0 ? shell_volume(x[c], xc) : shell_volume(xc, x[c + 1]);
    }
  }
  return sum;
}

void require_nonnegative(std::span<const double> values) {
  for (double x : values) {
    if (!(x >= 0.0)) throw Error(ErrorKind::NegativeSamples, "rearrangement needs nonnegative finite samples");
  }
}

/// Product rule on B(x, r): Gauss in the radius and in cos(theta),
/// trapezoid in phi. Exact for polynomials well beyond degree 20.
double ball_integral(const std::function<double(const Point&)>& f, const Point& x, double r,
                     const std::function<double(double)>& radial_weight) {
  constexpr int n_phi = 40;
  auto shell = [&](double s) {
    auto polar = [&](double mu) {
      const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
      double sum = 0.0;
      for (int i = 0; i < n_phi; ++i) {
        const double phi = 2.0 * kPi * (i + 0.5) / n_phi;
        sum += f({x[0] + s * st * std::cos(phi), x[1] + s * st * std::sin(phi), x[2] + s * mu});
      }
      return sum * 2.0 * kPi / n_phi;
    };
    return s * s * radial_weight(s) * gauss<double, 20>::integrate(polar, -1.0, 1.0);
  };
  return gauss<double, 20>::integrate(shell, 0.0, r);
}

}  // namespace

SampledRadialFunction sample(const RadialGrid& grid, const std::function<double(double)>& f) {
  SampledRadialFunction s{grid, std::vector<double>(grid.node_count())};
  for (std::size_t i = 0; i < grid.node_count(); ++i) s.samples[i] = f(grid.nodes[i]);
  return s;
}

SampledRadialFunction to_sampled(const PotentialField& field) { return {field.grid, field.values}; }

double inner_k(const SampledRadialFunction& f, const SampledRadialFunction& g, double k) {
  require_same_grid(f, g);
  return bilinear(f.grid.nodes, scaled_values(f), scaled_values(g), f.grid.conductor, kFourPi * k * k);
}

double inner_k(const SampledRadialFunction& f, const SampledRadialFunction& g, const ConductorGeometry& geometry,
               double k) {
  require_same_grid(f, g);
  return bilinear(f.grid.nodes, scaled_values(f), scaled_values(g), flags_for(f.grid, geometry), kFourPi * k * k);
}

double energy(const ChargeDistribution& dist, const ConductorGeometry& geometry, double k, const RadialGridSpec& spec) {
  if (dist.empty()) return 0.0;
  const auto grid = make_radial_grid(geometry, spec, dist);
  check_resolved(grid, dist, k);
  RadialOperator op(grid, k);
  const auto b = op.load(dist);
  const auto v = op.solve(b);
  return std::inner_product(b.begin(), b.end(), v.begin(), 0.0);
}

double energy(const ChargeDistribution& dist, const ConductorGeometry& geometry, double k) {
  return energy(dist, geometry, k, default_grid_spec(geometry));
}

EnergyMatrix assemble_energy_matrix(std::span<const ChargeComponent> basis, const RadialGrid& grid, double k) {
  check_resolved(grid, ChargeDistribution{{basis.begin(), basis.end()}}, k);
  RadialOperator op(grid, k);
  const std::size_t m = basis.size();
  const std::size_t n = grid.node_count();
  Eigen::MatrixXd loads(n, m), solutions(n, m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto b = op.load(basis[j]);
    const auto v = op.solve(b);
    loads.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(n));
    solutions.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(n));
  }
  return EnergyMatrix{{basis.begin(), basis.end()}, loads.transpose() * solutions};
}

EnergyMatrix assemble_energy_matrix(std::span<const ChargeComponent> basis, const ConductorGeometry& geometry,
                                    double k, const RadialGridSpec& spec) {
  return assemble_energy_matrix(basis, make_radial_grid(geometry, spec, ChargeDistribution{{basis.begin(), basis.end()}}), k);
}

double capacity(const ConductorGeometry& geometry, const RadialGridSpec& spec) {
  const auto g = make_radial_grid(geometry, spec.r_max, spec.node_count);
  const auto& x = g.nodes;
  const std::size_t n = g.node_count();

  // v = rho on conductor nodes (and v(0) = 0), free elsewhere.
  std::vector<double> v(n, 0.0);
  std::vector<std::size_t> free_nodes;
  std::vector<std::ptrdiff_t> slot(n, -1);
  for (std::size_t i = 1; i < n; ++i) {
    if (g.in_conductor(x[i])) {
      v[i] = x[i];
    } else {
      slot[i] = static_cast<std::ptrdiff_t>(free_nodes.size());
      free_nodes.push_back(i);
    }
  }
  if (!free_nodes.empty()) {
    detail::SymTridiagonal m(free_nodes.size());
    std::vector<double> rhs(free_nodes.size(), 0.0);
    for (std::size_t c = 0; c + 1 < n; ++c) {
      const double s = 1.0 / (x[c + 1] - x[c]);
      const auto a = slot[c], b = slot[c + 1];
      if (a >= 0) m.diag[static_cast<std::size_t>(a)] += s;
      if (b >= 0) m.diag[static_cast<std::size_t>(b)] += s;
      if (a >= 0 && b >= 0) {
        m.off[static_cast<std::size_t>(a)] -= s;
      } else if (a >= 0) {
        rhs[static_cast<std::size_t>(a)] += s * v[c + 1];
      } else if (b >= 0) {
        rhs[static_cast<std::size_t>(b)] += s * v[c];
      }
    }
    const auto f = detail::factor(m);
    detail::solve_in_place(f, rhs);
    for (std::size_t i = 0; i < free_nodes.size(); ++i) v[free_nodes[i]] = rhs[i];
  }
  double c = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) c += (v[i + 1] - v[i]) * (v[i + 1] - v[i]) / (x[i + 1] - x[i]);
  return c;
}

double capacity(const ConductorGeometry& geometry) { return capacity(geometry, default_grid_spec(geometry)); }

double poincare_constant(const ConductorGeometry& geometry, const RadialGridSpec& spec) {
  const auto g = make_radial_grid(geometry, spec.r_max, spec.node_count);
  auto below = [&](double sigma) {
    return detail::factor(detail::assemble_k_form(g, kFourPi * sigma)).negative_pivots;
  };
  const double r = outer_radius(geometry);
  double lo = 0.0, hi = 1.0 / (r * r);
  while (below(hi) == 0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw Error(ErrorKind::NoConvergence, "no eigenvalue found; conductor has no volume");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (below(mid) == 0 ? lo : hi) = mid;
  }
  return std::sqrt(0.5 * (lo + hi));
}

double poincare_constant(const ConductorGeometry& geometry) {
  return poincare_constant(geometry, default_grid_spec(geometry));
}

std::pair<double, double> poincare_bounds(double r) {
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidInput, "radius must be positive");
  return {3.0 / (4.0 * r * std::sqrt(2.0 * kPi)), std::sqrt(3.0 / kFourPi) / r};
}

// ---------------------------------------------------------------------------

std::vector<double> dual_volumes(const RadialGrid& grid) {
  const auto& x = grid.nodes;
  const std::size_t n = x.size();
  std::vector<double> vol(n);
  double inner = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double outer = i + 1 < n ? 0.5 * (x[i] + x[i + 1]) : x[i];
    vol[i] = shell_volume(inner, outer);
    inner = outer;
  }
  return vol;
}

double superlevel_volume(const SampledRadialFunction& f, double t) {
  require_shape(f);
  const auto vol = dual_volumes(f.grid);
  double sum = 0.0;
  for (std::size_t i = 0; i < vol.size(); ++i) {
    if (f.samples[i] > t) sum += vol[i];
  }
  return sum;
}

SampledRadialFunction rearrange(const SampledRadialFunction& f) {
  require_shape(f);
  require_nonnegative(f.samples);
  // Already radially non-increasing: f* = f.
  if (std::is_sorted(f.samples.rbegin(), f.samples.rend())) return {make_plain_grid(f.grid.nodes), f.samples};
  return place_levels(
      f.samples, [&](double t) { return level_measure(f, t, false); }, [&](double t) { return level_measure(f, t, true); });
}

SampledRadialFunction rearrange(std::span<const double> values, double spacing) {
  if (!(spacing > 0.0)) throw Error(ErrorKind::InvalidInput, "spacing must be positive");
  if (values.size() < 2) throw Error(ErrorKind::InvalidInput, "need at least two samples");
  require_nonnegative(values);
  const double cell = spacing * spacing * spacing;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  // Voxels are piecewise constant: count the samples above the level.
  auto gt = [&](double t) {
    return cell * static_cast<double>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t));
  };
  auto ge = [&](double t) {
    return cell * static_cast<double>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t));
  };
  return place_levels(sorted, gt, ge);
}

RearrangementRatios rearrangement_inequalities(const SampledRadialFunction& f) {
  const auto star = rearrange(f);
  auto norms = [](const SampledRadialFunction& s) {
    const auto& x = s.grid.nodes;
    const auto v = scaled_values(s);
    const std::vector<std::uint8_t> none(s.grid.cell_count(), 0);
    // int_0^R rho^2 f'^2 = int v'^2 - v(R)^2 / R.
    const double dirichlet = bilinear(x, v, v, none, 0.0) - v.back() * v.back() / x.back();
    double l2 = 0.0;
    for (std::size_t c = 0; c + 1 < x.size(); ++c) {
      l2 += kFourPi * (x[c + 1] - x[c]) * (v[c] * v[c] + v[c] * v[c + 1] + v[c + 1] * v[c + 1]) / 3.0;
    }
    return std::pair{l2, dirichlet};
  };
  const auto [l2f, df] = norms(f);
  const auto [l2s, ds] = norms(star);
  return {l2f > 0.0 ? l2s / l2f : 1.0, df > 0.0 ? ds / df : 1.0};
}

double hardy_check(const SampledRadialFunction& g) {
  require_shape(g);
  const auto& x = g.grid.nodes;
  const auto& y = g.samples;
  const std::size_t n = x.size();
  double lhs = 0.0, rhs = 0.0, tail = 0.0;
  for (std::size_t c = n - 1; c-- > 0;) {
    const double x0 = x[c], x1 = x[c + 1], g0 = y[c], g1 = y[c + 1];
    auto gl = [&](double t) { return g0 + (g1 - g0) * (t - x0) / (x1 - x0); };
    auto G = [&](double t) { return tail + 0.5 * (x1 - t) * (gl(t) + g1); };
    lhs += gauss<double, 4>::integrate([&](double t) { return t * t * G(t) * G(t); }, x0, x1);
    rhs += gauss<double, 4>::integrate([&](double t) { return gl(t) * gl(t) * t * t * t * t; }, x0, x1);
    tail += 0.5 * (x1 - x0) * (g0 + g1);
  }
  rhs *= 4.0 / 9.0;
  return rhs > 0.0 ? lhs / rhs : 0.0;
}

double density_ball(const std::function<double(const Point&)>& f, const Point& x, double r) {
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidInput, "radius must be positive");
  return ball_integral(f, x, r, [](double) { return 1.0; }) / ball_volume(r);
}

double density_tent(const std::function<double(const Point&)>& f, const Point& x, double r) {
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidInput, "radius must be positive");
  return 4.0 * ball_integral(f, x, r, [r](double s) { return 1.0 - s / r; }) / ball_volume(r);
}

}  // namespace potkit
