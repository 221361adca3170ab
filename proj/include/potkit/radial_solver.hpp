#pragma once

// Spherically symmetric k-potentials.
//
// The weak equation (phi, U)_k = l(phi) is discretized with the substitution
// v = rho * U. In that variable the radial energy becomes a plain 1D Dirichlet
// integral, v(0) = 0 encodes regularity at the origin, and the exterior
// harmonic tail U = A/rho beyond r_max turns into the natural condition
// v'(r_max) = 0. Continuous piecewise-linear v on a node set that contains
// every interface radius; surface charges enter the load vector directly and
// produce the jump [v'] = -s/a.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "potkit/domain.hpp"

namespace potkit {

/// Radial node set. Cell i is [nodes[i], nodes[i+1]].
struct RadialGrid {
  std::vector<double> nodes;
  /// Per cell: midpoint lies inside the conductor.
  std::vector<std::uint8_t> conductor;
  /// Interface radii (conductor faces, charge support ends). Always nodes,
  /// never 0 or r_max.
  std::vector<double> breakpoints;
  /// Closed conductor intervals the flags were generated from.
  std::vector<std::pair<double, double>> conductor_set;

  double r_max() const { return nodes.back(); }
  std::size_t node_count() const { return nodes.size(); }
  std::size_t cell_count() const { return nodes.size() - 1; }

  /// Index of the node at rho, if rho is a node (relative tolerance).
  std::optional<std::size_t> node_index(double rho, double tol = 1e-10) const;
  bool is_breakpoint(double rho, double tol = 1e-10) const;
  bool in_conductor(double rho) const;
  /// Cell containing rho; ties at a node go to the outer cell, except at r_max.
  std::size_t cell_of(double rho) const;
};

/// Piecewise-uniform grid with every conductor face and every extra radius
/// as a node. Cells are distributed over segments in proportion to length
/// (at least four per segment when node_count allows).
RadialGrid make_radial_grid(const ConductorGeometry& geometry, double r_max, std::size_t node_count,
                            std::span<const double> extra_radii = {});

/// Same construction without a conductor (all cells free space).
RadialGrid make_radial_grid(std::span<const double> interface_radii, double r_max, std::size_t node_count);

/// r_max = 10 * outer radius, 2000 nodes.
RadialGridSpec default_grid_spec(const ConductorGeometry& geometry);

/// Grid for a geometry plus the interface radii of a distribution.
RadialGrid make_radial_grid(const ConductorGeometry& geometry, const RadialGridSpec& spec,
                            const ChargeDistribution& dist = {});

/// Grid with no conductor, for sampled functions.
RadialGrid make_plain_grid(std::vector<double> nodes);
RadialGrid make_uniform_grid(double r_max, std::size_t node_count);

struct PotentialField {
  RadialGrid grid;
  /// U at every node; values[0] is the regular limit at the origin.
  std::vector<double> values;
  /// rho * U at every node.
  std::vector<double> scaled;
  /// U(rho) = far_coefficient / rho for rho >= r_max.
  double far_coefficient = 0.0;
};

/// Assembled operator K - 4 pi k^2 M_E in the v = rho U variable, factored
/// once (LDL^T of a symmetric tridiagonal matrix) and reused for many
/// right-hand sides.
class RadialOperator {
 public:
  /// Throws IndefiniteForm when the discrete form has a non-positive pivot.
  RadialOperator(RadialGrid grid, double k);

  const RadialGrid& grid() const { return grid_; }
  double k() const { return k_; }

  /// Load vector (indexed by node) of l(phi_i) for one component. Components
  /// must sit on nodes.
  std::vector<double> load(const ChargeComponent& c) const;
  std::vector<double> load(const ChargeDistribution& d) const;

  /// Returns v at every node (v[0] = 0).
  std::vector<double> solve(std::span<const double> load) const;

  PotentialField field(std::vector<double> v) const;

 private:
  RadialGrid grid_;
  double k_;
  std::vector<double> pivots_;
  std::vector<double> lower_;
  std::vector<double> offdiag_;
};

/// Throws UnresolvedComponent unless every component sits on the grid as
/// solve_radial_potential requires, InvalidInput for support outside the
/// conductor when k > 0.
void check_resolved(const RadialGrid& grid, const ChargeDistribution& dist, double k);

/// Solves the radial k-potential of a distribution. Throws IndefiniteForm
/// (k too large) or UnresolvedComponent (component not on grid nodes,
/// surface charge off a breakpoint, or fewer than 4 cells across a shell).
PotentialField solve_radial_potential(const RadialGrid& grid, const ChargeDistribution& dist, double k);

double eval_potential(const PotentialField& field, double rho);

enum class Side { Inner, Outer };

/// One-sided radial derivative U'(rho). Second-order within smooth segments;
/// at interface radii each side only sees its own segment.
double eval_radial_gradient(const PotentialField& field, double rho, Side side);

/// Surface charge implied by the derivative jump, -rho^2 (U'(+) - U'(-)).
double surface_charge_at(const PotentialField& field, double rho);

/// Largest |rho U| on the grid; the charge scale used for thresholds.
double charge_scale(const PotentialField& field);

/// Integral of U over the conductor cells of the grid.
double conductor_integral(const PotentialField& field);

/// U = sum q_n min(1/r_n, 1/rho), sampled exactly at nodes. The grid should
/// carry every sphere radius as a breakpoint.
PotentialField coulomb_superposition(std::span<const SurfaceSphere> spheres, const RadialGrid& grid);
/// Same on a default grid: r_max = 2 * max radius, 2000 nodes.
PotentialField coulomb_superposition(std::span<const SurfaceSphere> spheres);

/// Recovers the charge distribution behind a field: surface charges from
/// derivative jumps at interface radii, volume charges per conductor segment
/// from the boundary flux minus the k^2 U term. Throws NonConductorKink when
/// charge shows up outside the conductor.
ChargeDistribution decompose_distribution(const PotentialField& field, const ConductorGeometry& geometry, double k);

/// CSV rows "rho,U,dU_minus,dU_plus" with a header, 12 significant digits.
void write_potential_csv(const PotentialField& field, std::ostream& out);

}  // namespace potkit
