#pragma once

// Symmetric tridiagonal LDL^T, shared by the radial solvers.

#include <cstddef>
#include <span>
#include <vector>

#include "potkit/radial_solver.hpp"

namespace potkit::detail {

struct SymTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;  // off[i] couples i and i+1

  explicit SymTridiagonal(std::size_t n = 0) : diag(n, 0.0), off(n > 0 ? n - 1 : 0, 0.0) {}
  std::size_t size() const { return diag.size(); }
};

struct LdltFactor {
  std::vector<double> pivots;
  std::vector<double> lower;  // lower[i] multiplies row i+1
  std::vector<double> off;
  std::size_t negative_pivots = 0;
  std::size_t zero_pivots = 0;
};

inline LdltFactor factor(const SymTridiagonal& m) {
  LdltFactor f;
  const std::size_t n = m.size();
  f.pivots.resize(n);
  f.lower.resize(n > 0 ? n - 1 : 0);
  f.off = m.off;
  for (std::size_t i = 0; i < n; ++i) {
    double d = m.diag[i];
    if (i > 0) {
      // Exact zero pivots are pushed off zero so the inertia count survives.
      const double prev = f.pivots[i - 1] != 0.0 ? f.pivots[i - 1] : 1e-300;
      f.lower[i - 1] = m.off[i - 1] / prev;
      d -= f.lower[i - 1] * m.off[i - 1];
    }
    f.pivots[i] = d;
    if (d < 0.0) ++f.negative_pivots;
    if (d == 0.0) ++f.zero_pivots;
  }
  return f;
}

inline void solve_in_place(const LdltFactor& f, std::span<double> x) {
  const std::size_t n = f.pivots.size();
  for (std::size_t i = 1; i < n; ++i) x[i] -= f.lower[i - 1] * x[i - 1];
  for (std::size_t i = 0; i < n; ++i) x[i] /= f.pivots[i];
  for (std::size_t i = n; i-- > 1;) x[i - 1] -= f.lower[i - 1] * x[i];
}

/// K - mass * M_E in the v = rho U variable on nodes 1..n (node 0 carries
/// the Dirichlet condition v = 0). Consistent mass on conductor cells.
inline SymTridiagonal assemble_k_form(const RadialGrid& g, double mass) {
  const std::size_t n = g.cell_count();
  SymTridiagonal m(n);
  for (std::size_t c = 0; c < n; ++c) {
    const double h = g.nodes[c + 1] - g.nodes[c];
    const double stiff = 1.0 / h;
    const double cm = g.conductor[c] ? mass * h / 6.0 : 0.0;
    if (c > 0) {
      m.diag[c - 1] += stiff - 2.0 * cm;
      m.off[c - 1] += -stiff - cm;
    }
    m.diag[c] += stiff - 2.0 * cm;
  }
  return m;
}

}  // namespace potkit::detail
