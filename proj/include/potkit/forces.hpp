#pragma once

// Forces on a small test charge e. Radial scenarios report the signed radial
// component (positive outward).

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "potkit/domain.hpp"
#include "potkit/equilibrium.hpp"
#include "potkit/functional.hpp"
#include "potkit/radial_solver.hpp"

namespace potkit {

/// -e U'(rho). Throws KinkRadius at an interface radius where the one-sided
/// derivatives differ (a surface charge sits there).
double gradient_force(const PotentialField& field, double rho, double e);

enum class MollifierNormalization {
  /// 4 / (r |B(x, r)|): reproduces -e grad U for affine U.
  Consistent,
  /// 4 / |B(x, r)| without the 1/r; equals Consistent times r.
  VolumeOnly,
};

/// e N int_{B(x, r)} U(y) (x - y) / |x - y| dy for a radial U, x at radius
/// rho; radial component. The ball integral is done in (s, |y|) coordinates
/// with the |y| range split at the given kink radii. Throws InvalidInput for
/// r_moll <= 0.
double mollified_force(const std::function<double(double)>& potential, std::span<const double> kinks, double rho,
                       double e, double r_moll, MollifierNormalization norm = MollifierNormalization::Consistent);
/// Same for a solved field; its grid breakpoints are the kink radii.
double mollified_force(const PotentialField& field, double rho, double e, double r_moll,
                       MollifierNormalization norm = MollifierNormalization::Consistent);

/// e q x / |x|^3. Throws InvalidInput at x = 0.
Point coulomb_force_outside(double q, double e, const Point& x);

/// Charge of the distribution inside the open ball of radius rho.
double enclosed_charge(const ChargeDistribution& dist, double rho);

/// -e grad U_0 of the distribution (its Coulomb potential, k = 0) at radius
/// rho, from Gauss's law: e Q_enc(rho) / rho^2. For the ball equilibrium this
/// is e Q rho / r^3 inside, pointing to the centre when Q < 0.
double electric_only_force(const ChargeDistribution& dist, double rho, double e);
double electric_only_interior_force(const EquilibriumSolution& eq, double rho, double e);

/// Ball closed form with the constant 6, -6 e q rho / (r (3 - 4 pi k^2 r^2)),
/// kept for comparison with electric_only_force.
double electric_only_force_six(double r, double q, double k, double rho, double e);

/// M = 2 Q k^2 / |B(0, r)|; the collision force is M x. Throws InvalidInput
/// for r <= 0.
double collision_balance(double Q, double k, double r);

/// max |gradient_force| over grid nodes strictly inside the conductor that are
/// not kink radii, divided by |gradient_force| just outside the outer surface.
double interior_force_ratio(const EquilibriumSolution& eq, const ConductorGeometry& geometry);

/// CSV "rho,F_k,F_electric_only,F_collision" for an equilibrium on a ball of
/// radius r, 12 significant digits. At kink radii F_k uses the outer
/// derivative. F_collision = M rho inside the ball and 0 outside.
void write_force_profile(const EquilibriumSolution& eq, double r, double k, double e, std::span<const double> radii,
                         std::ostream& out);

}  // namespace potkit
