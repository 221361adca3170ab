#include "potkit/forces.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <boost/math/quadrature/gauss.hpp>

#include "potkit/error.hpp"
#include "potkit/format.hpp"

namespace potkit {

namespace {

using boost::math::quadrature::gauss;

/// Integral of f over [a, b] split at the points strictly inside.
template <class F>
double piecewise_gauss(F f, double a, double b, std::span<const double> splits) {
  std::vector<double> cuts{a};
  for (double c : splits) {
    if (c > a && c < b) cuts.push_back(c);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] > cuts[i]) s += gauss<double, 20>::integrate(f, cuts[i], cuts[i + 1]);
  }
  return s;
}

double jump_tolerance(const PotentialField& field) { return 1e-9 * charge_scale(field); }

}  // namespace

double gradient_force(const PotentialField& field, double rho, double e) {
  if (field.grid.is_breakpoint(rho)) {
    const double inner = eval_radial_gradient(field, rho, Side::Inner);
    const double outer = eval_radial_gradient(field, rho, Side::Outer);
    if (rho * rho * std::abs(outer - inner) > jump_tolerance(field)) {
      throw Error(ErrorKind::KinkRadius, "potential has a kink at rho = " + format_sig(rho) + "; use mollified_force");
    }
    return -e * 0.5 * (inner + outer);
  }
  return -e * eval_radial_gradient(field, rho, Side::Outer);
}

double mollified_force(const std::function<double(double)>& potential, std::span<const double> kinks, double rho,
                       double e, double r_moll, MollifierNormalization norm) {
  if (!(r_moll > 0.0)) throw Error(ErrorKind::InvalidInput, "mollifier radius must be positive");
  if (rho < 0.0) throw Error(ErrorKind::InvalidInput, "rho must be non-negative");
  if (rho == 0.0) return 0.0;

  // y = x + s w, |w| = 1; t = |y|. For fixed s the polar integral of
  // U(t) (-mu), mu the cosine against x, becomes an integral over t.
  auto polar = [&](double s) {
    auto integrand = [&](double t) {
      const double mu = (t * t - rho * rho - s * s) / (2.0 * rho * s);
      return -potential(t) * mu * t / (rho * s);
    };
    return piecewise_gauss(integrand, std::abs(rho - s), rho + s, kinks);
  };
  std::vector<double> s_splits{rho};
  for (double b : kinks) s_splits.push_back(std::abs(rho - b));
  const double integral =
      piecewise_gauss([&](double s) { return 2.0 * kPi * s * s * polar(s); }, 0.0, r_moll, s_splits);

  const double volume = ball_volume(r_moll);
  const double n = norm == MollifierNormalization::Consistent ? 4.0 / (r_moll * volume) : 4.0 / volume;
  return e * n * integral;
}

double mollified_force(const PotentialField& field, double rho, double e, double r_moll, MollifierNormalization norm) {
  return mollified_force([&](double t) { return eval_potential(field, t); }, field.grid.breakpoints, rho, e, r_moll,
                         norm);
}

Point coulomb_force_outside(double q, double e, const Point& x) {
  const double r = std::hypot(x[0], x[1], x[2]);
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidInput, "force undefined at the origin");
  const double c = e * q / (r * r * r);
  return {c * x[0], c * x[1], c * x[2]};
}

double enclosed_charge(const ChargeDistribution& dist, double rho) {
  double q = 0.0;
  for (const auto& c : dist.components) {
    if (const auto* s = std::get_if<VolumeShell>(&c)) {
      if (rho >= s->b) {
        q += s->charge;
      } else if (rho > s->a) {
        const double a3 = s->a * s->a * s->a;
        q += s->charge * (rho * rho * rho - a3) / (s->b * s->b * s->b - a3);
      }
    } else {
      const auto& p = std::get<SurfaceSphere>(c);
      if (p.radius < rho) q += p.charge;
    }
  }
  return q;
}

double electric_only_force(const ChargeDistribution& dist, double rho, double e) {
  if (rho <= 0.0) return 0.0;
  return e * enclosed_charge(dist, rho) / (rho * rho);
}

double electric_only_interior_force(const EquilibriumSolution& eq, double rho, double e) {
  return electric_only_force(eq.charges, rho, e);
}

double electric_only_force_six(double r, double q, double k, double rho, double e) {
  return -6.0 * e * q * rho / (r * (3.0 - kFourPi * k * k * r * r));
}

double collision_balance(double Q, double k, double r) {
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidInput, "radius must be positive");
  return 2.0 * Q * k * k / ball_volume(r);
}

double interior_force_ratio(const EquilibriumSolution& eq, const ConductorGeometry& geometry) {
  const auto& field = eq.potential;
  const auto& g = field.grid;
  const double surface = std::abs(eval_radial_gradient(field, outer_radius(geometry), Side::Outer));
  if (!(surface > 0.0)) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < g.node_count(); ++i) {
    const double rho = g.nodes[i];
    if (!in_conductor(geometry, rho) || g.is_breakpoint(rho)) continue;
    worst = std::max(worst, std::abs(eval_radial_gradient(field, rho, Side::Outer)));
  }
  return worst / surface;
}

void write_force_profile(const EquilibriumSolution& eq, double r, double k, double e, std::span<const double> radii,
                         std::ostream& out) {
  const double m = collision_balance(eq.Q, k, r);
  out << "rho,F_k,F_electric_only,F_collision\n";
  for (double rho : radii) {
    const double fk = -e * eval_radial_gradient(eq.potential, rho, Side::Outer);
    const double fe = electric_only_interior_force(eq, rho, e);
    const double fc = rho <= r ? m * rho : 0.0;
    out << format_sig(rho, 12) << "," << format_sig(fk, 12) << "," << format_sig(fe, 12) << "," << format_sig(fc, 12)
        << "\n";
  }
}

}  // namespace potkit
