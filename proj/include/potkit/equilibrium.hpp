#pragma once

// The k-equilibrium distribution: the minimizer of W_k over distributions of
// total charge q supported on the conductor.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "potkit/domain.hpp"
#include "potkit/functional.hpp"
#include "potkit/radial_solver.hpp"

namespace potkit {

struct EquilibriumSolution {
  ChargeDistribution charges;
  PotentialField potential;
  double A = 0.0;      // constant potential on the conductor
  double Q = 0.0;      // total volume charge
  double q_hat = 0.0;  // total surface charge
  double W = 0.0;      // energy
  /// Unit-charge basis, its energy matrix and the optimal coefficients.
  EnergyMatrix matrix;
  Eigen::VectorXd coefficients;
};

/// Unit-charge basis: volume_shells uniform shells spread over the conductor
/// (in proportion to thickness) plus a sphere on every face.
std::vector<ChargeComponent> equilibrium_basis(const ConductorGeometry& geometry, std::size_t volume_shells);

/// Minimizes c^T G c subject to sum c = q through the saddle system
/// [G 1; 1^T 0] [c; mu] = [0; q]; A = -mu. Radial geometries only.
/// Throws IndefiniteForm, SingularSystem.
EquilibriumSolution solve_equilibrium(const ConductorGeometry& geometry, double q, double k, const RadialGridSpec& spec,
                                      std::size_t volume_shells = 32);
EquilibriumSolution solve_equilibrium(const ConductorGeometry& geometry, double q, double k);

struct BallClosedForm {
  double A;
  double Q;
  double q_hat;
};

/// A = q / (C - k^2 |E|), Q = -q k^2 |E| / (C - k^2 |E|), q_hat = q C / (C - k^2 |E|)
/// with C = r, |E| = 4 pi r^3 / 3. Throws DenominatorNonpositive.
BallClosedForm ball_closed_form(double r, double q, double k);

/// Uniform volume charge Q on [0, r] plus q_hat on the sphere r (the volume
/// part is omitted when Q = 0).
ChargeDistribution equilibrium_distribution_ball(double r, double q, double k);

/// Coulomb (k = 0) face charges for an inner ball with charge q inside
/// floating neutral shells: the potential is equal on both faces of each
/// shell. Returned innermost first. A zero-thickness outer sphere is neutral
/// and floating, so it carries nothing and is omitted.
/// Throws SingularSystem when faces touch.
std::vector<SurfaceSphere> nested_spheres_charges(const NestedShells& geometry, double q);

/// sum |q_n|.
double total_variation(const std::vector<SurfaceSphere>& charges);

struct ConvexityResult {
  double midpoint_energy;  // W((l1 + l2) / 2)
  double average_energy;   // (W(l1) + W(l2)) / 2
};

ConvexityResult convexity_check(const ChargeDistribution& l1, const ChargeDistribution& l2,
                                const ConductorGeometry& geometry, double k);
ConvexityResult convexity_check(const EnergyMatrix& g, const Eigen::VectorXd& c1, const Eigen::VectorXd& c2);

/// max |U - A| over grid nodes in the closed conductor.
double constancy_check(const EquilibriumSolution& sol);

/// max U - min U over grid nodes in the closed conductor.
double potential_deviation(const PotentialField& field, const ConductorGeometry& geometry);

/// "A = ...", "Q = ...", ... one per line, 6 significant digits.
void write_equilibrium_report(const EquilibriumSolution& sol, std::ostream& out);

/// CSV "component,r_inner,r_outer,charge"; spheres have r_inner = r_outer.
void write_charge_table(const ChargeDistribution& dist, std::ostream& out);

}  // namespace potkit
