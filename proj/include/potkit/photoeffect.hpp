#pragma once

// Electron-pair model of the photoeffect: a charge q spread over a ball of
// radius r with a gap delta to an outer sphere, the split parameter t, the
// restoring force across the gap and the work needed to cross it.

#include <iosfwd>
#include <span>
#include <vector>

#include "potkit/domain.hpp"

namespace potkit {

struct PairModel {
  double r = 1.0;
  double delta = 0.1;
  double k = 0.0;
  double q = 1.0;
  double e = 1.0;
  double t = 0.0;
  /// 0 <= t <= 1; outside that range the fraction has no physical meaning
  /// but is still carried.
  bool t_in_range = true;
};

/// Solves (3t - 4 pi k^2 r^2) / (3 - 4 pi k^2 r^2) = -(r + delta)^2 / (r + 2 delta)^2
/// for t. Throws DegenerateDenominator when 3 - 4 pi k^2 r^2 <= 0,
/// InvalidInput for r <= 0 or delta <= 0.
double pair_parameter_t(double r, double delta, double k);

/// Left side minus right side of the defining equation.
double pair_parameter_residual(double r, double delta, double k, double t);

/// Model with t solved and flagged. Throws InvalidInput unless r > 0,
/// delta > 0 and k^2 |B(0, r)| < r; DegenerateDenominator as above.
PairModel make_pair_model(double r, double delta, double k, double q, double e);

/// qe (1/R^2) (R^2 / (R + delta)^2 - (r + delta)^2 / (r + 2 delta)^2) on the
/// closed gap [r, r + delta]; zero at R = r + delta. Throws OutOfInterval.
double restoring_force(double R, const PairModel& model);

struct PairForceComponents {
  double ion;      // -qe k^2 |E| / (R^2 (C - k^2 |E|))
  double surface;  // qe t C / (R^2 (C - k^2 |E|))
  double outer;    // qe / (R + delta)^2
  double total() const { return ion + surface + outer; }
};

/// Split of restoring_force with C = r, |E| = 4 pi r^3 / 3. Throws
/// OutOfInterval.
PairForceComponents pair_total_force_components(double R, const PairModel& model);

struct ThresholdEnergy {
  /// qe delta^3 / (r (r + delta) (r + 2 delta)^2), the antiderivative
  /// -1/(R + delta) + (r + delta)^2 / ((r + 2 delta)^2 R) between the gap ends
  /// with the cancellation removed.
  double closed_form;
  /// Adaptive Gauss-Kronrod of -qe int_r^{r+delta} (...) dR.
  double quadrature;
  double relative_difference() const;
};

/// Throws InvalidInput unless all inputs are positive.
ThresholdEnergy threshold_energy(double r, double delta, double q, double e);

/// Least-squares slope of log E_min against log r at fixed delta. Throws
/// InvalidInput for fewer than two radii or non-increasing radii.
double threshold_scaling(std::span<const double> r_values, double delta, double q, double e);
/// Same with delta = ratio * r.
double threshold_scaling_fixed_ratio(std::span<const double> r_values, double ratio, double q, double e);

/// Volume charge Q on [0, r], t q_hat on the sphere r, (1 - t) q_hat on the
/// sphere r + delta. Throws TOutOfRange unless 0 <= t <= 1.
ChargeDistribution pair_distribution(double r, double delta, double t, double q_hat, double Q);

/// "t = ...", "t_flagged = ...", "E_min = ...", "E_min_quadrature = ...",
/// "scaling_exponent = ...", "scaling_exponent_fixed_ratio = ...", 6 digits.
void write_photoeffect_report(const PairModel& model, std::ostream& out);

/// CSV "R,F_total,ion,surface,outer" at n points spanning the closed gap,
/// 12 significant digits.
void write_pair_force_profile(const PairModel& model, std::size_t n, std::ostream& out);

}  // namespace potkit
