#include "potkit/domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "potkit/error.hpp"

namespace potkit {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::IndefiniteForm: return "IndefiniteForm";
    case ErrorKind::UnresolvedComponent: return "UnresolvedComponent";
    case ErrorKind::NonConductorKink: return "NonConductorKink";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::DenominatorNonpositive: return "DenominatorNonpositive";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::NegativeSamples: return "NegativeSamples";
    case ErrorKind::KinkRadius: return "KinkRadius";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::OutOfInterval: return "OutOfInterval";
    case ErrorKind::TOutOfRange: return "TOutOfRange";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

std::size_t VoxelSet::count() const {
  return static_cast<std::size_t>(std::count_if(occupancy.begin(), occupancy.end(), [](auto v) { return v != 0; }));
}

bool is_radial(const ConductorGeometry& g) { return !std::holds_alternative<VoxelSet>(g); }

std::vector<std::pair<double, double>> conductor_intervals(const ConductorGeometry& g) {
  if (const auto* ball = std::get_if<Ball>(&g)) return {{0.0, ball->radius}};
  if (const auto* nested = std::get_if<NestedShells>(&g)) {
    std::vector<std::pair<double, double>> out{{0.0, nested->inner_radius}};
    for (const auto& f : nested->shell_faces) out.emplace_back(f.inner, f.outer);
    if (nested->outer_sphere_radius) out.emplace_back(*nested->outer_sphere_radius, *nested->outer_sphere_radius);
    return out;
  }
  throw Error(ErrorKind::InvalidInput, "radial operation requested on a voxel geometry");
}

double outer_radius(const ConductorGeometry& g) {
  double r = 0.0;
  for (const auto& [a, b] : conductor_intervals(g)) r = std::max(r, b);
  return r;
}

double conductor_volume(const ConductorGeometry& g) {
  if (const auto* vox = std::get_if<VoxelSet>(&g)) {
    return static_cast<double>(vox->count()) * vox->spacing * vox->spacing * vox->spacing;
  }
  double v = 0.0;
  for (const auto& [a, b] : conductor_intervals(g)) v += shell_volume(a, b);
  return v;
}

bool in_conductor(const ConductorGeometry& g, double rho, double tol) {
  const double slack = tol * std::max(1.0, std::abs(rho));
  for (const auto& [a, b] : conductor_intervals(g)) {
    if (rho >= a - slack && rho <= b + slack) return true;
  }
  return false;
}

double component_charge(const ChargeComponent& c) {
  return std::visit([](const auto& x) { return x.charge; }, c);
}

ChargeComponent with_charge(const ChargeComponent& c, double charge) {
  return std::visit(
      [charge](auto x) -> ChargeComponent {
        x.charge = charge;
        return x;
      },
      c);
}

double ChargeDistribution::total() const {
  double sum = 0.0;
  for (const auto& c : components) sum += component_charge(c);
  return sum;
}

std::vector<double> ChargeDistribution::radii() const {
  std::vector<double> out;
  for (const auto& c : components) {
    if (const auto* s = std::get_if<VolumeShell>(&c)) {
      out.push_back(s->a);
      out.push_back(s->b);
    } else {
      out.push_back(std::get<SurfaceSphere>(c).radius);
    }
  }
  return out;
}

ChargeDistribution ChargeDistribution::scaled(double factor) const {
  ChargeDistribution out;
  out.components.reserve(components.size());
  for (const auto& c : components) out.components.push_back(with_charge(c, factor * component_charge(c)));
  return out;
}

std::pair<VolumeShell, VolumeShell> split_shell(const VolumeShell& s, double at) {
  if (!(at > s.a && at < s.b)) throw Error(ErrorKind::InvalidInput, "split radius must lie strictly inside the shell");
  const double inner_fraction = shell_volume(s.a, at) / shell_volume(s.a, s.b);
  const double inner_charge = s.charge * inner_fraction;
  return {VolumeShell{s.a, at, inner_charge}, VolumeShell{at, s.b, s.charge - inner_charge}};
}

const std::vector<std::string>& known_report_names() {
  static const std::vector<std::string> names{"capacity", "poincare", "equilibrium", "potential",
                                              "forces",   "photoeffect", "nested", "voxel"};
  return names;
}

double k_upper_bound(const ConductorGeometry& g) {
  if (const auto* vox = std::get_if<VoxelSet>(&g)) {
    (void)vox;
    throw Error(ErrorKind::InvalidInput, "k upper bound needs a radial geometry");
  }
  return std::sqrt(outer_radius(g) / conductor_volume(g));
}

namespace {

std::string fmt4(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

void validate_geometry(const ConductorGeometry& g, std::vector<std::string>& out) {
  if (const auto* ball = std::get_if<Ball>(&g)) {
    if (!(ball->radius > 0.0)) out.push_back("geometry.radius: radius must be strictly positive");
    return;
  }
  if (const auto* n = std::get_if<NestedShells>(&g)) {
    if (!(n->inner_radius > 0.0)) out.push_back("geometry.inner_radius: radius must be strictly positive");
    double prev = n->inner_radius;
    for (std::size_t i = 0; i < n->shell_faces.size(); ++i) {
      const auto& f = n->shell_faces[i];
      const std::string field = "geometry.shell_faces[" + std::to_string(i) + "]";
      if (f.inner == f.outer) {
        out.push_back(field + ": degenerate shell (zero thickness)");
      } else if (f.inner > f.outer) {
        out.push_back(field + ": shell bounds reversed");
      }
      if (!(f.inner > prev)) out.push_back(field + ": faces must be strictly increasing and disjoint");
      prev = std::max(prev, f.outer);
    }
    if (n->outer_sphere_radius && !(*n->outer_sphere_radius > prev)) {
      out.push_back("geometry.outer_sphere_radius: must exceed every shell face");
    }
    return;
  }
  const auto& v = std::get<VoxelSet>(g);
  if (!(v.spacing > 0.0)) out.push_back("geometry.spacing: spacing must be strictly positive");
  if (v.occupancy.size() != v.nx * v.ny * v.nz) {
    out.push_back("geometry.occupancy: size does not match nx*ny*nz");
  } else if (v.count() == 0) {
    out.push_back("geometry.occupancy: mask is empty");
  }
}

}  // namespace

std::vector<std::string> validate(const Scenario& scenario) {
  std::vector<std::string> out;
  validate_geometry(scenario.geometry, out);
  const bool geometry_ok = out.empty();
  const auto& p = scenario.params;

  if (!(p.k >= 0.0)) out.push_back("params.k: k must be non-negative");
  if (!(p.delta > 0.0)) out.push_back("params.delta: delta must be strictly positive");
  if (!std::isfinite(p.q)) out.push_back("params.q: charge must be finite");
  if (!std::isfinite(p.e)) out.push_back("params.e: probe charge must be finite");

  if (geometry_ok && is_radial(scenario.geometry) && p.k >= 0.0) {
    const double bound = k_upper_bound(scenario.geometry);
    if (p.k >= bound) out.push_back("params.k: k exceeds upper bound √(C/|E|) ≈ " + fmt4(bound));
  }

  if (const auto* rg = std::get_if<RadialGridSpec>(&scenario.grid)) {
    if (!is_radial(scenario.geometry)) out.push_back("grid: radial grid given for a voxel geometry");
    if (rg->node_count < 16) out.push_back("grid.node_count: at least 16 nodes required");
    if (geometry_ok && is_radial(scenario.geometry) && !(rg->r_max > outer_radius(scenario.geometry))) {
      out.push_back("grid.r_max: must strictly exceed the outermost conductor radius");
    }
  } else {
    const auto& vg = std::get<VoxelGridSpec>(scenario.grid);
    if (!(vg.spacing > 0.0)) out.push_back("grid.voxel_spacing: spacing must be strictly positive");
    if (!(vg.padding > 0.0)) out.push_back("grid.padding: padding must be strictly positive");
  }

  const auto& names = known_report_names();
  for (const auto& r : scenario.requested_outputs) {
    if (std::find(names.begin(), names.end(), r) == names.end()) {
      out.push_back("requested_outputs: unknown report name '" + r + "'");
    }
  }
  return out;
}

std::vector<std::string> validate(const ChargeDistribution& dist, const ConductorGeometry& geometry) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < dist.components.size(); ++i) {
    const std::string field = "charges[" + std::to_string(i) + "]";
    const auto& c = dist.components[i];
    if (!std::isfinite(component_charge(c))) out.push_back(field + ": charge must be finite");
    if (const auto* s = std::get_if<VolumeShell>(&c)) {
      if (s->a > s->b) {
        out.push_back(field + ": shell bounds reversed");
        continue;
      }
      if (s->a == s->b) {
        out.push_back(field + ": degenerate shell (zero thickness)");
        continue;
      }
      if (s->a < 0.0) out.push_back(field + ": radius must be non-negative");
      if (is_radial(geometry)) {
        // The shell must lie inside a single conductor interval.
        bool inside = false;
        for (const auto& [lo, hi] : conductor_intervals(geometry)) {
          const double slack = 1e-12 * std::max(1.0, hi);
          if (s->a >= lo - slack && s->b <= hi + slack) inside = true;
        }
        if (!inside) out.push_back(field + ": support outside the conductor");
      }
    } else {
      const auto& sp = std::get<SurfaceSphere>(c);
      if (!(sp.radius > 0.0)) out.push_back(field + ": radius must be strictly positive");
      if (is_radial(geometry) && !in_conductor(geometry, sp.radius)) {
        out.push_back(field + ": support outside the conductor");
      }
    }
  }
  return out;
}

}  // namespace potkit
