#include "potkit/voxel_solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "potkit/error.hpp"
#include "potkit/format.hpp"
#include "potkit/functional.hpp"

namespace potkit {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Operator on the free cells; fixed cells and cells outside the box are
/// treated as zero and produce zero output.
void apply_free(const VoxelBox& b, double k, const std::uint8_t* fixed, const double* u, double* out) {
  const double h = b.spacing;
  const double c = h / kFourPi;
  const double shift = k * k * h * h * h;
  const std::size_t sx = 1, sy = b.nx, sz = b.nx * b.ny;
  for (std::size_t kk = 0; kk < b.nz; ++kk) {
    for (std::size_t j = 0; j < b.ny; ++j) {
      std::size_t idx = b.index(0, j, kk);
      for (std::size_t i = 0; i < b.nx; ++i, ++idx) {
        if (fixed && fixed[idx]) {
          out[idx] = 0.0;
          continue;
        }
        double nb = 0.0;
        if (i > 0) nb += u[idx - sx];
        if (i + 1 < b.nx) nb += u[idx + sx];
        if (j > 0) nb += u[idx - sy];
        if (j + 1 < b.ny) nb += u[idx + sy];
        if (kk > 0) nb += u[idx - sz];
        if (kk + 1 < b.nz) nb += u[idx + sz];
        double v = c * (6.0 * u[idx] - nb);
        if (b.conductor[idx]) v -= shift * u[idx];
        out[idx] = v;
      }
    }
  }
}

std::vector<double> conjugate_gradient(const VoxelBox& b, double k, const std::uint8_t* fixed,
                                       const std::vector<double>& rhs, const CgSettings& cg) {
  const std::size_t n = rhs.size();
  std::vector<double> x(n, 0.0), r = rhs, p = rhs, ap(n);
  const double bnorm = std::sqrt(dot(rhs, rhs));
  if (bnorm == 0.0) return x;
  double rr = dot(r, r);
  for (std::size_t it = 0; it < cg.max_iterations; ++it) {
    apply_free(b, k, fixed, p.data(), ap.data());
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) {
      throw Error(ErrorKind::IndefiniteForm, "voxel operator is not positive definite (k = " + format_sig(k) +
                                                 " exceeds the Poincare constant of the voxel set)");
    }
    const double alpha = rr / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rr_new = dot(r, r);
    if (std::sqrt(rr_new) <= cg.tolerance * bnorm) return x;
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  throw Error(ErrorKind::NoConvergence,
              "conjugate gradients did not reach the tolerance in " + std::to_string(cg.max_iterations) + " iterations");
}

double distance_to_centre(const VoxelBox& b, long i, long j, long k) {
  const auto x = b.position(i, j, k);
  return std::hypot(x[0] - b.centre[0], x[1] - b.centre[1], x[2] - b.centre[2]);
}

/// (h / 4pi) times the sum of known neighbour values (fixed cells and the
/// layer outside the box) for every free cell.
template <class Fixed, class Ghost>
std::vector<double> dirichlet_rhs(const VoxelBox& b, const std::uint8_t* fixed, Fixed fixed_value, Ghost ghost) {
  std::vector<double> rhs(b.size(), 0.0);
  const double c = b.spacing / kFourPi;
  const long nx = static_cast<long>(b.nx), ny = static_cast<long>(b.ny), nz = static_cast<long>(b.nz);
  const long d[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
  for (long k = 0; k < nz; ++k) {
    for (long j = 0; j < ny; ++j) {
      for (long i = 0; i < nx; ++i) {
        const std::size_t idx = b.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k));
        if (fixed && fixed[idx]) continue;
        double s = 0.0;
        for (const auto& o : d) {
          const long a = i + o[0], bb = j + o[1], cc = k + o[2];
          if (a < 0 || a >= nx || bb < 0 || bb >= ny || cc < 0 || cc >= nz) {
            s += ghost(a, bb, cc);
          } else {
            const std::size_t nidx =
                b.index(static_cast<std::size_t>(a), static_cast<std::size_t>(bb), static_cast<std::size_t>(cc));
            if (fixed && fixed[nidx]) s += fixed_value(nidx);
          }
        }
        rhs[idx] = c * s;
      }
    }
  }
  return rhs;
}

/// Sum of the Laplacian part (h / 4pi)(6 U_i - sum U_nb) over conductor cells;
/// neighbours outside the box never occur for a padded box.
double conductor_laplacian_sum(const VoxelBox& b, const std::vector<double>& u, std::vector<double>* per_cell = nullptr) {
  const double c = b.spacing / kFourPi;
  const std::size_t sy = b.nx, sz = b.nx * b.ny;
  double total = 0.0;
  for (std::size_t idx = 0; idx < b.size(); ++idx) {
    if (!b.conductor[idx]) continue;
    const double v = c * (6.0 * u[idx] - u[idx - 1] - u[idx + 1] - u[idx - sy] - u[idx + sy] - u[idx - sz] - u[idx + sz]);
    if (per_cell) (*per_cell)[idx] = v;
    total += v;
  }
  return total;
}

}  // namespace

std::array<double, 3> VoxelBox::position(long i, long j, long k) const {
  return {(static_cast<double>(i + offset[0]) + 0.5) * spacing, (static_cast<double>(j + offset[1]) + 0.5) * spacing,
          (static_cast<double>(k + offset[2]) + 0.5) * spacing};
}

VoxelBox make_voxel_box(const VoxelSet& mask, double padding) {
  if (!(mask.spacing > 0.0)) throw Error(ErrorKind::InvalidInput, "voxel spacing must be positive");
  if (mask.occupancy.size() != mask.nx * mask.ny * mask.nz) {
    throw Error(ErrorKind::InvalidInput, "mask occupancy size does not match its dimensions");
  }
  if (!(padding > 0.0)) throw Error(ErrorKind::InvalidInput, "padding must be positive");
  long lo[3] = {std::numeric_limits<long>::max(), std::numeric_limits<long>::max(), std::numeric_limits<long>::max()};
  long hi[3] = {-1, -1, -1};
  for (std::size_t k = 0; k < mask.nz; ++k) {
    for (std::size_t j = 0; j < mask.ny; ++j) {
      for (std::size_t i = 0; i < mask.nx; ++i) {
        if (!mask.occupied(i, j, k)) continue;
        const long p[3] = {static_cast<long>(i), static_cast<long>(j), static_cast<long>(k)};
        for (int a = 0; a < 3; ++a) {
          lo[a] = std::min(lo[a], p[a]);
          hi[a] = std::max(hi[a], p[a]);
        }
      }
    }
  }
  if (hi[0] < 0) throw Error(ErrorKind::InvalidInput, "mask is empty");
  const long extent = std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]}) + 1;
  const auto pad = static_cast<long>(std::ceil(padding * static_cast<double>(extent) - 1e-9));
  VoxelBox b;
  b.spacing = mask.spacing;
  b.nx = static_cast<std::size_t>(hi[0] - lo[0] + 1 + 2 * pad);
  b.ny = static_cast<std::size_t>(hi[1] - lo[1] + 1 + 2 * pad);
  b.nz = static_cast<std::size_t>(hi[2] - lo[2] + 1 + 2 * pad);
  b.offset = {lo[0] - pad, lo[1] - pad, lo[2] - pad};
  for (int a = 0; a < 3; ++a) b.centre[static_cast<std::size_t>(a)] = 0.5 * static_cast<double>(lo[a] + hi[a] + 1) * mask.spacing;
  b.conductor.assign(b.size(), 0);
  for (std::size_t k = 0; k < b.nz; ++k) {
    for (std::size_t j = 0; j < b.ny; ++j) {
      for (std::size_t i = 0; i < b.nx; ++i) {
        const long mi = static_cast<long>(i) + b.offset[0], mj = static_cast<long>(j) + b.offset[1],
                   mk = static_cast<long>(k) + b.offset[2];
        if (mi < 0 || mj < 0 || mk < 0 || mi >= static_cast<long>(mask.nx) || mj >= static_cast<long>(mask.ny) ||
            mk >= static_cast<long>(mask.nz)) {
          continue;
        }
        b.conductor[b.index(i, j, k)] =
            mask.occupied(static_cast<std::size_t>(mi), static_cast<std::size_t>(mj), static_cast<std::size_t>(mk)) ? 1 : 0;
      }
    }
  }
  return b;
}

double VoxelField::at_mask_cell(long i, long j, long k) const {
  const long a = i - box.offset[0], b = j - box.offset[1], c = k - box.offset[2];
  if (a < 0 || b < 0 || c < 0 || a >= static_cast<long>(box.nx) || b >= static_cast<long>(box.ny) ||
      c >= static_cast<long>(box.nz)) {
    throw Error(ErrorKind::InvalidInput, "cell outside the solver box");
  }
  return at(static_cast<std::size_t>(a), static_cast<std::size_t>(b), static_cast<std::size_t>(c));
}

double VoxelField::eval(const std::array<double, 3>& x) const {
  double g[3];
  const std::size_t n[3] = {box.nx, box.ny, box.nz};
  bool inside = true;
  for (int a = 0; a < 3; ++a) {
    g[a] = x[static_cast<std::size_t>(a)] / box.spacing - 0.5 - static_cast<double>(box.offset[static_cast<std::size_t>(a)]);
    if (g[a] < 0.0 || g[a] > static_cast<double>(n[a] - 1)) inside = false;
  }
  if (!inside) {
    const double r = std::hypot(x[0] - box.centre[0], x[1] - box.centre[1], x[2] - box.centre[2]);
    return a_far / r;
  }
  std::size_t i0[3];
  double t[3];
  for (int a = 0; a < 3; ++a) {
    i0[a] = std::min(static_cast<std::size_t>(g[a]), n[a] >= 2 ? n[a] - 2 : 0);
    t[a] = g[a] - static_cast<double>(i0[a]);
  }
  double v = 0.0;
  for (int c = 0; c < 8; ++c) {
    const std::size_t di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
    const double w = (di ? t[0] : 1.0 - t[0]) * (dj ? t[1] : 1.0 - t[1]) * (dk ? t[2] : 1.0 - t[2]);
    if (w != 0.0) v += w * at(i0[0] + di, i0[1] + dj, i0[2] + dk);
  }
  return v;
}

void apply_voxel_operator(const VoxelBox& box, double k, std::span<const double> u, std::span<double> out) {
  if (u.size() != box.size() || out.size() != box.size()) throw Error(ErrorKind::GridMismatch, "vector size mismatch");
  apply_free(box, k, nullptr, u.data(), out.data());
}

VoxelField solve_voxel_potential(const VoxelSet& mask, std::span<const double> charges, double k, double padding,
                                 const CgSettings& cg) {
  if (charges.size() != mask.occupancy.size()) throw Error(ErrorKind::GridMismatch, "one charge per mask cell required");
  for (std::size_t i = 0; i < charges.size(); ++i) {
    if (charges[i] != 0.0 && !mask.occupancy[i]) throw Error(ErrorKind::InvalidInput, "charge outside the conductor");
  }
  VoxelField field;
  field.box = make_voxel_box(mask, padding);
  const auto& b = field.box;
  std::vector<double> rhs(b.size(), 0.0);
  double q = 0.0;
  for (std::size_t kk = 0; kk < b.nz; ++kk) {
    for (std::size_t j = 0; j < b.ny; ++j) {
      for (std::size_t i = 0; i < b.nx; ++i) {
        const std::size_t idx = b.index(i, j, kk);
        if (!b.conductor[idx]) continue;
        const auto mi = static_cast<std::size_t>(static_cast<long>(i) + b.offset[0]);
        const auto mj = static_cast<std::size_t>(static_cast<long>(j) + b.offset[1]);
        const auto mk = static_cast<std::size_t>(static_cast<long>(kk) + b.offset[2]);
        rhs[idx] = charges[mask.index(mi, mj, mk)];
        q += rhs[idx];
      }
    }
  }
  field.values.assign(b.size(), 0.0);
  if (std::all_of(rhs.begin(), rhs.end(), [](double c) { return c == 0.0; })) return field;

  const double cell = b.spacing * b.spacing * b.spacing;
  auto conductor_sum = [&](const std::vector<double>& u) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (b.conductor[i]) s += u[i];
    }
    return s * cell;
  };
  const auto u_charge = conjugate_gradient(b, k, nullptr, rhs, cg);
  const auto boundary_rhs = dirichlet_rhs(
      b, nullptr, [](std::size_t) { return 0.0; },
      [&](long i, long j, long kk) { return 1.0 / distance_to_centre(b, i, j, kk); });
  const auto u_boundary = conjugate_gradient(b, k, nullptr, boundary_rhs, cg);
  const double denominator = 1.0 - k * k * conductor_sum(u_boundary);
  if (!(denominator > 0.0)) throw Error(ErrorKind::IndefiniteForm, "flux identity has no positive far-field solution");
  field.a_far = (q + k * k * conductor_sum(u_charge)) / denominator;
  for (std::size_t i = 0; i < b.size(); ++i) field.values[i] = u_charge[i] + field.a_far * u_boundary[i];
  return field;
}

VoxelEquilibrium solve_voxel_equilibrium(const VoxelSet& mask, double q, double k, double padding,
                                         const CgSettings& cg) {
  if (!std::isfinite(q)) throw Error(ErrorKind::InvalidInput, "charge must be finite");
  VoxelEquilibrium eq;
  eq.field.box = make_voxel_box(mask, padding);
  const auto& b = eq.field.box;
  eq.charges.assign(mask.occupancy.size(), 0.0);
  eq.field.values.assign(b.size(), 0.0);
  if (q == 0.0) return eq;

  const std::uint8_t* fixed = b.conductor.data();
  const auto rhs_inner = dirichlet_rhs(
      b, fixed, [](std::size_t) { return 1.0; }, [](long, long, long) { return 0.0; });
  auto u_inner = conjugate_gradient(b, 0.0, fixed, rhs_inner, cg);
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b.conductor[i]) u_inner[i] = 1.0;
  }
  const auto rhs_outer = dirichlet_rhs(
      b, fixed, [](std::size_t) { return 0.0; },
      [&](long i, long j, long kk) { return 1.0 / distance_to_centre(b, i, j, kk); });
  const auto u_outer = conjugate_gradient(b, 0.0, fixed, rhs_outer, cg);

  // Flux through the box equals a_far: a = Q_inner + a Q_outer.
  const double q_inner = conductor_laplacian_sum(b, u_inner);
  const double q_outer = conductor_laplacian_sum(b, u_outer);
  if (!(q_outer < 1.0)) throw Error(ErrorKind::NoConvergence, "box too small for the monopole boundary condition");
  const double a = q_inner / (1.0 - q_outer);
  const double cell = b.spacing * b.spacing * b.spacing;
  const double volume = cell * static_cast<double>(mask.count());
  const double unit_charge = a - k * k * volume;
  if (!(unit_charge > 0.0)) {
    throw Error(ErrorKind::IndefiniteForm, "C - k^2 |E| = " + format_sig(unit_charge) + " is not positive on this grid");
  }
  eq.A = q / unit_charge;
  eq.a_far = eq.A * a;
  eq.field.a_far = eq.a_far;
  for (std::size_t i = 0; i < b.size(); ++i) eq.field.values[i] = eq.A * (u_inner[i] + a * u_outer[i]);

  std::vector<double> lap(b.size(), 0.0);
  conductor_laplacian_sum(b, eq.field.values, &lap);
  const auto surface = surface_cells(mask);
  for (std::size_t kk = 0; kk < b.nz; ++kk) {
    for (std::size_t j = 0; j < b.ny; ++j) {
      for (std::size_t i = 0; i < b.nx; ++i) {
        const std::size_t idx = b.index(i, j, kk);
        if (!b.conductor[idx]) continue;
        const std::size_t m = mask.index(static_cast<std::size_t>(static_cast<long>(i) + b.offset[0]),
                                         static_cast<std::size_t>(static_cast<long>(j) + b.offset[1]),
                                         static_cast<std::size_t>(static_cast<long>(kk) + b.offset[2]));
        const double c = lap[idx] - k * k * cell * eq.A;
        eq.charges[m] = c;
        (surface[m] ? eq.surface_charge : eq.interior_charge) += c;
      }
    }
  }
  return eq;
}

VoxelSet make_ball_mask(double radius, double spacing) {
  if (!(radius > 0.0) || !(spacing > 0.0)) throw Error(ErrorKind::InvalidInput, "radius and spacing must be positive");
  const auto n = static_cast<std::size_t>(2.0 * std::ceil(radius / spacing - 1e-12));
  VoxelSet m{spacing, n, n, n, std::vector<std::uint8_t>(n * n * n, 0)};
  const double c = 0.5 * static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        const double x = (static_cast<double>(i) + 0.5 - c) * spacing;
        const double y = (static_cast<double>(j) + 0.5 - c) * spacing;
        const double z = (static_cast<double>(k) + 0.5 - c) * spacing;
        if (x * x + y * y + z * z <= radius * radius) m.occupancy[m.index(i, j, k)] = 1;
      }
    }
  }
  return m;
}

std::vector<std::uint8_t> surface_cells(const VoxelSet& mask) {
  std::vector<std::uint8_t> s(mask.occupancy.size(), 0);
  auto occ = [&](long i, long j, long k) {
    if (i < 0 || j < 0 || k < 0 || i >= static_cast<long>(mask.nx) || j >= static_cast<long>(mask.ny) ||
        k >= static_cast<long>(mask.nz)) {
      return false;
    }
    return mask.occupied(static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k));
  };
  for (long k = 0; k < static_cast<long>(mask.nz); ++k) {
    for (long j = 0; j < static_cast<long>(mask.ny); ++j) {
      for (long i = 0; i < static_cast<long>(mask.nx); ++i) {
        if (!occ(i, j, k)) continue;
        if (!occ(i - 1, j, k) || !occ(i + 1, j, k) || !occ(i, j - 1, k) || !occ(i, j + 1, k) || !occ(i, j, k - 1) ||
            !occ(i, j, k + 1)) {
          s[mask.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k))] = 1;
        }
      }
    }
  }
  return s;
}

double voxel_poincare_surrogate(const VoxelSet& mask) {
  const auto box = make_voxel_box(mask, 1.0);
  const double h = mask.spacing;
  double r2 = 0.0;
  for (std::size_t k = 0; k < mask.nz; ++k) {
    for (std::size_t j = 0; j < mask.ny; ++j) {
      for (std::size_t i = 0; i < mask.nx; ++i) {
        if (!mask.occupied(i, j, k)) continue;
        // Farthest corner of the cell.
        double d2 = 0.0;
        const std::size_t p[3] = {i, j, k};
        for (int a = 0; a < 3; ++a) {
          const double lo = static_cast<double>(p[a]) * h - box.centre[static_cast<std::size_t>(a)];
          const double far = std::max(std::abs(lo), std::abs(lo + h));
          d2 += far * far;
        }
        r2 = std::max(r2, d2);
      }
    }
  }
  return poincare_constant(Ball{std::sqrt(r2)});
}

std::array<double, 3> voxel_gradient_force(const VoxelField& field, const std::array<double, 3>& x, double e) {
  const double h = field.box.spacing;
  std::array<double, 3> f{};
  for (std::size_t a = 0; a < 3; ++a) {
    auto xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    f[a] = -e * (field.eval(xp) - field.eval(xm)) / (2.0 * h);
  }
  return f;
}

VoxelSet read_mask(std::istream& in) {
  VoxelSet m;
  if (!(in >> m.nx >> m.ny >> m.nz >> m.spacing)) throw Error(ErrorKind::Io, "mask header must be 'nx ny nz spacing'");
  if (m.nx == 0 || m.ny == 0 || m.nz == 0 || !(m.spacing > 0.0)) throw Error(ErrorKind::Io, "mask header out of range");
  const std::size_t total = m.nx * m.ny * m.nz;
  m.occupancy.reserve(total);
  std::uint8_t state = 0;
  long long run = 0;
  while (in >> run) {
    if (run < 0 || m.occupancy.size() + static_cast<std::size_t>(run) > total) {
      throw Error(ErrorKind::Io, "mask runs exceed nx*ny*nz");
    }
    m.occupancy.insert(m.occupancy.end(), static_cast<std::size_t>(run), state);
    state ^= 1;
  }
  if (!in.eof()) throw Error(ErrorKind::Io, "mask runs must be non-negative integers");
  if (m.occupancy.size() != total) throw Error(ErrorKind::Io, "mask runs cover fewer than nx*ny*nz cells");
  return m;
}

void write_mask(const VoxelSet& mask, std::ostream& out) {
  out << mask.nx << ' ' << mask.ny << ' ' << mask.nz << ' ' << format_sig(mask.spacing, 17) << '\n';
  std::uint8_t state = 0;
  std::size_t run = 0, written = 0;
  auto emit = [&](std::size_t r) {
    out << r << (++written % 16 == 0 ? '\n' : ' ');
  };
  for (std::uint8_t v : mask.occupancy) {
    const std::uint8_t s = v ? 1 : 0;
    if (s != state) {
      emit(run);
      run = 0;
      state = s;
    }
    ++run;
  }
  emit(run);
  out << '\n';
}

void write_voxel_field(const VoxelField& field, const std::string& stem) {
  std::ofstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw Error(ErrorKind::Io, "cannot write " + stem + ".bin");
  bin.write(reinterpret_cast<const char*>(field.values.data()),
            static_cast<std::streamsize>(field.values.size() * sizeof(double)));
  std::ofstream txt(stem + ".txt");
  if (!txt) throw Error(ErrorKind::Io, "cannot write " + stem + ".txt");
  const auto& b = field.box;
  txt << "format = float64 little-endian\n"
      << "ordering = x-fastest (index = i + nx * (j + ny * k))\n"
      << "nx = " << b.nx << "\nny = " << b.ny << "\nnz = " << b.nz << "\n"
      << "spacing = " << format_sig(b.spacing, 17) << "\n"
      << "offset = " << b.offset[0] << ' ' << b.offset[1] << ' ' << b.offset[2] << "\n"
      << "cell_centre(i,j,k) = ((i + offset_x + 0.5) h, (j + offset_y + 0.5) h, (k + offset_z + 0.5) h)\n"
      << "centre = " << format_sig(b.centre[0], 17) << ' ' << format_sig(b.centre[1], 17) << ' '
      << format_sig(b.centre[2], 17) << "\n"
      << "a_far = " << format_sig(field.a_far, 17) << "\n";
  if (!bin || !txt) throw Error(ErrorKind::Io, "write failed for " + stem);
}

}  // namespace potkit
