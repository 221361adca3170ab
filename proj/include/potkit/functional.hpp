#pragma once

// The k-inner product, energies, capacity and the Poincare constant, plus the
// rearrangement, Hardy and density estimators used to check the existence
// argument numerically.
//
// Radial functions are stored by nodal values f_i. Wherever a gradient
// integral is taken, rho * f is treated as piecewise linear, i.e. the same
// trial space the radial solver uses, and f continues as f(R) R / rho beyond
// the last node.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "potkit/domain.hpp"
#include "potkit/radial_solver.hpp"

namespace potkit {

struct SampledRadialFunction {
  RadialGrid grid;
  std::vector<double> samples;
};

SampledRadialFunction sample(const RadialGrid& grid, const std::function<double(double)>& f);
SampledRadialFunction to_sampled(const PotentialField& field);

/// (f, g)_k = (1/4pi) int grad f . grad g - k^2 int_E f g. Conductor cells are
/// taken from the grid of f. Throws GridMismatch when the grids differ.
double inner_k(const SampledRadialFunction& f, const SampledRadialFunction& g, double k);

/// Same, with the conductor set given explicitly.
double inner_k(const SampledRadialFunction& f, const SampledRadialFunction& g, const ConductorGeometry& geometry,
               double k);

/// W_k(l) = l(U_k^l).
double energy(const ChargeDistribution& dist, const ConductorGeometry& geometry, double k, const RadialGridSpec& spec);
double energy(const ChargeDistribution& dist, const ConductorGeometry& geometry, double k);

struct EnergyMatrix {
  std::vector<ChargeComponent> basis;
  /// G_ij = l_i(U_j) = (U_i, U_j)_k.
  Eigen::MatrixXd entries;

  /// c^T G c.
  double energy(const Eigen::VectorXd& c) const { return c.dot(entries * c); }
};

/// One factorization, one back-substitution per basis element. The grid must
/// resolve every basis component. Throws IndefiniteForm.
EnergyMatrix assemble_energy_matrix(std::span<const ChargeComponent> basis, const RadialGrid& grid, double k);
EnergyMatrix assemble_energy_matrix(std::span<const ChargeComponent> basis, const ConductorGeometry& geometry,
                                    double k, const RadialGridSpec& spec);

/// (1/4pi) int |grad U|^2 over the exterior, U = 1 on the conductor.
double capacity(const ConductorGeometry& geometry, const RadialGridSpec& spec);
double capacity(const ConductorGeometry& geometry);

/// Smallest k with (1/4pi) int |grad f|^2 = k^2 int_F f^2 for radial f, found
/// by bisection on the inertia of K - 4 pi sigma M_F.
double poincare_constant(const ConductorGeometry& geometry, const RadialGridSpec& spec);
double poincare_constant(const ConductorGeometry& geometry);

/// The same quantity when the Rayleigh quotient omits the 1/4pi factor.
inline double poincare_without_factor(double k) { return std::sqrt(kFourPi) * k; }

/// (3 / (4 r sqrt(2 pi)), sqrt(3 / (4 pi)) / r).
std::pair<double, double> poincare_bounds(double r);

// ---------------------------------------------------------------------------
// Rearrangement

/// Volume carried by each node: the spherical shell between the neighbouring
/// cell midpoints (first node from 0, last node to r_max).
std::vector<double> dual_volumes(const RadialGrid& grid);

/// Measure of {f > t} at sample resolution.
double superlevel_volume(const SampledRadialFunction& f, double t);

/// Symmetric decreasing rearrangement of the piecewise-linear interpolant
/// (zero beyond the last node). Every sample value is kept and placed at the
/// radius whose ball has the measure of its superlevel set, so the sorted
/// samples are preserved exactly. Throws NegativeSamples.
SampledRadialFunction rearrange(const SampledRadialFunction& f);

/// Same for samples on a voxel lattice (x-fastest), each carrying h^3.
SampledRadialFunction rearrange(std::span<const double> values, double spacing);

struct RearrangementRatios {
  double l2_ratio;         // int f*^2 / int f^2
  double dirichlet_ratio;  // int |grad f*|^2 / int |grad f|^2
};

RearrangementRatios rearrangement_inequalities(const SampledRadialFunction& f);

/// int_0^r rho^2 (int_rho^r g)^2 drho divided by (4/9) int_0^r g^2 x^4 dx,
/// g piecewise linear in x. Exact for that g. 0 when g vanishes.
double hardy_check(const SampledRadialFunction& g);

using Point = std::array<double, 3>;

/// (1/|B|) int_{B(x,r)} f.
double density_ball(const std::function<double(const Point&)>& f, const Point& x, double r);
/// (4/|B|) int_{B(x,r)} (1 - |x - y| / r) f(y) dy.
double density_tent(const std::function<double(const Point&)>& f, const Point& x, double r);

}  // namespace potkit
