#include "potkit/photoeffect.hpp"

#include <cmath>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "potkit/error.hpp"
#include "potkit/format.hpp"

namespace potkit {

namespace {

double gap_ratio(double r, double delta) {
  const double c = (r + delta) / (r + 2.0 * delta);
  return c * c;
}

/// 1/(R + delta)^2 - (r + delta)^2 / ((r + 2 delta)^2 R^2), factored so that
/// the zero at R = r + delta carries no cancellation.
double gap_integrand(double R, double r, double delta) {
  const double r2 = r + 2.0 * delta;
  const double den = R * (R + delta) * r2;
  return delta * (R - r - delta) * (R * r2 + (r + delta) * (R + delta)) / (den * den);
}

void check_gap(double R, const PairModel& m) {
  if (!(R >= m.r && R <= m.r + m.delta)) {
    throw Error(ErrorKind::OutOfInterval,
                "R = " + format_sig(R) + " lies outside [" + format_sig(m.r) + ", " + format_sig(m.r + m.delta) + "]");
  }
}

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::InvalidInput, std::string(name) + " must be positive");
}

double slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

void check_radii(std::span<const double> r_values) {
  if (r_values.size() < 2) throw Error(ErrorKind::InvalidInput, "need at least two radii");
  for (std::size_t i = 0; i < r_values.size(); ++i) {
    check_positive(r_values[i], "radius");
    if (i > 0 && !(r_values[i] > r_values[i - 1])) throw Error(ErrorKind::InvalidInput, "radii must increase");
  }
}

}  // namespace

double pair_parameter_t(double r, double delta, double k) {
  check_positive(r, "r");
  check_positive(delta, "delta");
  const double a = kFourPi * k * k * r * r;
  if (!(3.0 - a > 0.0)) {
    throw Error(ErrorKind::DegenerateDenominator,
                "3 - 4 pi k^2 r^2 = " + format_sig(3.0 - a) + " is not positive");
  }
  return (a - gap_ratio(r, delta) * (3.0 - a)) / 3.0;
}

double pair_parameter_residual(double r, double delta, double k, double t) {
  const double a = kFourPi * k * k * r * r;
  return (3.0 * t - a) / (3.0 - a) + gap_ratio(r, delta);
}

PairModel make_pair_model(double r, double delta, double k, double q, double e) {
  check_positive(r, "r");
  check_positive(delta, "delta");
  if (!(k >= 0.0)) throw Error(ErrorKind::InvalidInput, "k must be non-negative");
  if (!(k * k * ball_volume(r) < r)) {
    throw Error(ErrorKind::InvalidInput, "k^2 |B(0, r)| must be below C = r (k < " +
                                             format_sig(std::sqrt(r / ball_volume(r))) + ")");
  }
  PairModel m{r, delta, k, q, e, pair_parameter_t(r, delta, k), true};
  m.t_in_range = m.t >= 0.0 && m.t <= 1.0;
  return m;
}

double restoring_force(double R, const PairModel& m) {
  check_gap(R, m);
  return m.q * m.e * gap_integrand(R, m.r, m.delta);
}

PairForceComponents pair_total_force_components(double R, const PairModel& m) {
  check_gap(R, m);
  const double qe = m.q * m.e;
  const double c = m.r;
  const double kv = m.k * m.k * ball_volume(m.r);
  const double d = R * R * (c - kv);
  return {-qe * kv / d, qe * m.t * c / d, qe / ((R + m.delta) * (R + m.delta))};
}

double ThresholdEnergy::relative_difference() const {
  return std::abs(closed_form - quadrature) / std::abs(closed_form);
}

ThresholdEnergy threshold_energy(double r, double delta, double q, double e) {
  check_positive(r, "r");
  check_positive(delta, "delta");
  check_positive(q, "q");
  check_positive(e, "e");
  const double r2 = r + 2.0 * delta;
  const double closed = q * e * delta * delta * delta / (r * (r + delta) * r2 * r2);
  auto integrand = [&](double R) { return -gap_integrand(R, r, delta); };
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, r, r + delta, 20, 1e-14);
  return {closed, q * e * integral};
}

double threshold_scaling(std::span<const double> r_values, double delta, double q, double e) {
  check_radii(r_values);
  std::vector<double> x, y;
  for (double r : r_values) {
    x.push_back(std::log(r));
    y.push_back(std::log(threshold_energy(r, delta, q, e).closed_form));
  }
  return slope_fit(x, y);
}

double threshold_scaling_fixed_ratio(std::span<const double> r_values, double ratio, double q, double e) {
  check_radii(r_values);
  std::vector<double> x, y;
  for (double r : r_values) {
    x.push_back(std::log(r));
    y.push_back(std::log(threshold_energy(r, ratio * r, q, e).closed_form));
  }
  return slope_fit(x, y);
}

ChargeDistribution pair_distribution(double r, double delta, double t, double q_hat, double Q) {
  check_positive(r, "r");
  check_positive(delta, "delta");
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::TOutOfRange, "t = " + format_sig(t) + " lies outside [0, 1]");
  return ChargeDistribution{{VolumeShell{0.0, r, Q}, SurfaceSphere{r, t * q_hat}, SurfaceSphere{r + delta, (1.0 - t) * q_hat}}};
}

void write_photoeffect_report(const PairModel& m, std::ostream& out) {
  const auto energy = threshold_energy(m.r, m.delta, std::abs(m.q), std::abs(m.e));
  const double sign = (m.q * m.e >= 0.0) ? 1.0 : -1.0;
  const std::vector<double> radii{10.0 * m.r, 20.0 * m.r, 40.0 * m.r, 80.0 * m.r};
  out << "t = " << format_sig(m.t) << "\n"
      << "t_flagged = " << (m.t_in_range ? "no" : "yes (outside [0, 1])") << "\n"
      << "residual = " << format_sig(pair_parameter_residual(m.r, m.delta, m.k, m.t)) << "\n"
      << "E_min = " << format_sig(sign * energy.closed_form) << "\n"
      << "E_min_quadrature = " << format_sig(sign * energy.quadrature) << "\n"
      << "scaling_exponent = " << format_sig(threshold_scaling(radii, m.delta, 1.0, 1.0)) << "\n"
      << "scaling_exponent_fixed_ratio = " << format_sig(threshold_scaling_fixed_ratio(radii, m.delta / m.r, 1.0, 1.0))
      << "\n";
}

void write_pair_force_profile(const PairModel& m, std::size_t n, std::ostream& out) {
  if (n < 2) throw Error(ErrorKind::InvalidInput, "profile needs at least two points");
  out << "R,F_total,ion,surface,outer\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double R = i + 1 == n ? m.r + m.delta : m.r + m.delta * static_cast<double>(i) / static_cast<double>(n - 1);
    const auto c = pair_total_force_components(R, m);
    out << format_sig(R, 12) << "," << format_sig(restoring_force(R, m), 12) << "," << format_sig(c.ion, 12) << ","
        << format_sig(c.surface, 12) << "," << format_sig(c.outer, 12) << "\n";
  }
}

}  // namespace potkit
