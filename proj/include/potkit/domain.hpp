#pragma once

// Core value types shared by every solver.
//
// Units: Gaussian-style and dimensionless. The potential of a unit point
// charge at distance rho is exactly 1/rho; lengths, k (1/length) and the pair
// separation delta all share one length scale.

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace potkit {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kFourPi = 4.0 * std::numbers::pi;

/// Pair separation used when a scenario does not set one.
inline constexpr double kDefaultDelta = 1.45e-8;

inline double ball_volume(double r) { return kFourPi * r * r * r / 3.0; }
inline double shell_volume(double a, double b) { return kFourPi * (b * b * b - a * a * a) / 3.0; }

// ---------------------------------------------------------------------------
// Geometry

struct Ball {
  double radius = 1.0;
};

struct ShellFace {
  double inner = 0.0;
  double outer = 0.0;
};

/// Inner conducting ball surrounded by concentric conducting shells and an
/// optional zero-thickness conducting sphere outside all of them.
struct NestedShells {
  double inner_radius = 0.5;
  std::vector<ShellFace> shell_faces;
  std::optional<double> outer_sphere_radius;
};

/// Occupancy mask on a uniform voxel lattice, x-fastest ordering.
struct VoxelSet {
  double spacing = 1.0;
  std::size_t nx = 0, ny = 0, nz = 0;
  std::vector<std::uint8_t> occupancy;

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return i + nx * (j + ny * k); }
  bool occupied(std::size_t i, std::size_t j, std::size_t k) const { return occupancy[index(i, j, k)] != 0; }
  std::size_t count() const;
};

using ConductorGeometry = std::variant<Ball, NestedShells, VoxelSet>;

bool is_radial(const ConductorGeometry& g);

/// Closed radial intervals making up a radial conductor; a zero-thickness
/// sphere appears as [R, R]. Throws InvalidInput for voxel geometry.
std::vector<std::pair<double, double>> conductor_intervals(const ConductorGeometry& g);

/// Outermost radius of a radial conductor.
double outer_radius(const ConductorGeometry& g);

/// Lebesgue measure |E|.
double conductor_volume(const ConductorGeometry& g);

/// True when rho lies in the closed conductor set (tolerance relative to rho).
bool in_conductor(const ConductorGeometry& g, double rho, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Charges

struct VolumeShell {
  double a = 0.0;
  double b = 0.0;
  double charge = 0.0;
};

struct SurfaceSphere {
  double radius = 0.0;
  double charge = 0.0;
};

using ChargeComponent = std::variant<VolumeShell, SurfaceSphere>;

/// Finite-rank signed charge distribution: uniform volume shells and
/// uniformly charged spheres.
struct ChargeDistribution {
  std::vector<ChargeComponent> components;

  double total() const;
  bool empty() const { return components.empty(); }

  /// Every radius at which a component starts, ends, or sits.
  std::vector<double> radii() const;

  ChargeDistribution scaled(double factor) const;
};

double component_charge(const ChargeComponent& c);
ChargeComponent with_charge(const ChargeComponent& c, double charge);

/// Splits a shell at an interior radius, dividing the charge by volume.
std::pair<VolumeShell, VolumeShell> split_shell(const VolumeShell& s, double at);

// ---------------------------------------------------------------------------
// Model parameters and scenario

struct ModelParams {
  double k = 0.0;
  double q = 1.0;
  double e = 1.0;
  double delta = kDefaultDelta;
};

struct RadialGridSpec {
  double r_max = 10.0;
  std::size_t node_count = 2000;
};

struct VoxelGridSpec {
  double spacing = 1.0 / 32.0;
  /// Padding on each side, as a multiple of the conductor diameter.
  double padding = 0.5;
};

using GridSpec = std::variant<RadialGridSpec, VoxelGridSpec>;

struct Scenario {
  ConductorGeometry geometry = Ball{};
  ModelParams params;
  GridSpec grid = RadialGridSpec{};
  std::vector<std::string> requested_outputs;
};

/// Report names a scenario may request.
const std::vector<std::string>& known_report_names();

/// Returns one message per violated invariant, "<field>: <rule>". Empty when
/// the scenario is valid. Pure and idempotent.
std::vector<std::string> validate(const Scenario& scenario);

/// Checks a distribution against a conductor: shell ordering and support.
std::vector<std::string> validate(const ChargeDistribution& dist, const ConductorGeometry& geometry);

/// sqrt(C(E)/|E|), the upper bound on admissible k for a radial conductor.
double k_upper_bound(const ConductorGeometry& g);

}  // namespace potkit
