#pragma once

// k-potentials and equilibria for voxelized conductors.
//
// Cell-centred 7-point scheme. With c_i the charge of cell i the discrete
// equation is
//   (h / 4pi) (6 U_i - sum_nb U_nb) - k^2 h^3 chi_i U_i = c_i,
// on a box that pads the occupied cells on every side; the layer just outside
// the box holds U = A_far / |x - centre|. A_far is fixed by the discrete flux
// identity A_far = q + k^2 h^3 sum_E U, which is linear in the solution, so it
// is obtained exactly from two solves rather than by iteration.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "potkit/domain.hpp"

namespace potkit {

/// Solver box around the occupied cells of a mask.
struct VoxelBox {
  double spacing = 1.0;
  std::size_t nx = 0, ny = 0, nz = 0;
  /// Mask index of box cell (0, 0, 0); negative inside the padding.
  std::array<long, 3> offset{0, 0, 0};
  /// Centre of the occupied bounding box, in mask coordinates (the mask's
  /// cell (0, 0, 0) spans [0, h]^3).
  std::array<double, 3> centre{0.0, 0.0, 0.0};
  /// Per box cell: inside the conductor.
  std::vector<std::uint8_t> conductor;

  std::size_t size() const { return nx * ny * nz; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return i + nx * (j + ny * k); }
  std::array<double, 3> position(long i, long j, long k) const;
};

/// Box with pad cells = ceil(padding * diameter / h) on every side, diameter
/// being the largest extent of the occupied cells. Throws InvalidInput for an
/// empty mask.
VoxelBox make_voxel_box(const VoxelSet& mask, double padding);

struct VoxelField {
  VoxelBox box;
  std::vector<double> values;
  double a_far = 0.0;

  double at(std::size_t i, std::size_t j, std::size_t k) const { return values[box.index(i, j, k)]; }
  /// Value at the box cell holding mask cell (i, j, k).
  double at_mask_cell(long i, long j, long k) const;
  /// Trilinear interpolation between cell centres; a_far / |x - centre|
  /// outside the box.
  double eval(const std::array<double, 3>& x) const;
};

struct CgSettings {
  double tolerance = 1e-8;  // relative residual
  std::size_t max_iterations = 10000;
};

/// Applies the operator with zero values outside the box (and no fixed
/// cells); out has box.size() entries. Symmetric by construction.
void apply_voxel_operator(const VoxelBox& box, double k, std::span<const double> u, std::span<double> out);

/// charges is indexed like the mask (x-fastest) and must vanish off the mask.
/// Throws InvalidInput, IndefiniteForm (non-positive curvature met by CG),
/// NoConvergence.
VoxelField solve_voxel_potential(const VoxelSet& mask, std::span<const double> charges, double k, double padding = 0.5,
                                 const CgSettings& cg = {});

struct VoxelEquilibrium {
  /// Indexed like the mask; zero off the mask.
  std::vector<double> charges;
  double A = 0.0;
  double a_far = 0.0;
  /// Charge on mask cells with all six neighbours in the mask.
  double interior_charge = 0.0;
  /// Charge on mask cells with at least one face neighbour outside.
  double surface_charge = 0.0;
  VoxelField field;
};

/// Potential fixed to A on the mask; the exterior problem is solved for A = 1
/// and scaled so that the cell charges add up to q. Throws IndefiniteForm
/// when C - k^2 |E| is not positive on the grid, NoConvergence.
VoxelEquilibrium solve_voxel_equilibrium(const VoxelSet& mask, double q, double k, double padding = 0.5,
                                         const CgSettings& cg = {});

/// Cells whose centre lies in the closed ball of radius r about the centre of
/// an n^3 lattice, n = 2 ceil(r / h).
VoxelSet make_ball_mask(double radius, double spacing);

/// Mask cells with at least one face neighbour outside the mask.
std::vector<std::uint8_t> surface_cells(const VoxelSet& mask);

/// Poincare constant of the circumscribed ball about the box centre. A lower
/// bound for the conductor's own constant, used as a surrogate.
double voxel_poincare_surrogate(const VoxelSet& mask);

/// -e grad U at x, central differences of the interpolated field.
std::array<double, 3> voxel_gradient_force(const VoxelField& field, const std::array<double, 3>& x, double e);

/// Plain-text mask: "nx ny nz spacing", then run lengths alternating between
/// empty and occupied cells (starting with empty, x-fastest). Throws Io.
VoxelSet read_mask(std::istream& in);
void write_mask(const VoxelSet& mask, std::ostream& out);

/// Writes <stem>.bin (float64 little-endian, x-fastest) and <stem>.txt
/// describing dimensions, spacing, offset and ordering. Throws Io.
void write_voxel_field(const VoxelField& field, const std::string& stem);

}  // namespace potkit
