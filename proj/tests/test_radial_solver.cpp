#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "potkit/error.hpp"
#include "potkit/radial_solver.hpp"

using namespace potkit;

namespace {

double max_error(const PotentialField& f, const std::function<double(double)>& exact) {
  double e = 0.0;
  for (std::size_t i = 0; i < f.grid.node_count(); ++i) e = std::max(e, std::abs(f.values[i] - exact(f.grid.nodes[i])));
  return e;
}

ChargeDistribution unit_sphere(double r) { return {{SurfaceSphere{r, 1.0}}}; }

}  // namespace

TEST_CASE("grid carries every interface as a node") {
  const double extra[] = {0.25, 0.75};
  auto g = make_radial_grid(Ball{1.0}, 10.0, 2000, extra);
  CHECK(g.node_count() == 2000);
  CHECK(g.nodes.front() == 0.0);
  CHECK(g.r_max() == doctest::Approx(10.0));
  for (double r : {0.25, 0.75, 1.0}) {
    CHECK(g.node_index(r).has_value());
    CHECK(g.is_breakpoint(r));
  }
  for (std::size_t i = 1; i < g.node_count(); ++i) CHECK(g.nodes[i] > g.nodes[i - 1]);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const double mid = 0.5 * (g.nodes[c] + g.nodes[c + 1]);
    CHECK((g.conductor[c] != 0) == (mid <= 1.0));
  }
  CHECK_THROWS_AS(make_radial_grid(Ball{1.0}, 1.0, 100), Error);
}

TEST_CASE("unit surface sphere at k=0 gives min(1, 1/rho)") {
  auto g = make_radial_grid(Ball{1.0}, 10.0, 2000);
  auto f = solve_radial_potential(g, unit_sphere(1.0), 0.0);
  CHECK(max_error(f, [](double r) { return std::min(1.0, 1.0 / r); }) < 1e-10);
  CHECK(eval_potential(f, 2.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(eval_potential(f, 0.3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eval_potential(f, 20.0) == doctest::Approx(f.far_coefficient / 20.0).epsilon(1e-14));
  CHECK(f.far_coefficient == doctest::Approx(1.0).epsilon(1e-10));
  // Robin closure holds exactly at r_max.
  CHECK(f.values.back() == doctest::Approx(f.far_coefficient / g.r_max()).epsilon(1e-14));
}

TEST_CASE("uniform ball charge at k=0 matches the Newton potential") {
  auto g = make_radial_grid(Ball{1.0}, 10.0, 2000);
  ChargeDistribution d{{VolumeShell{0.0, 1.0, 1.0}}};
  auto f = solve_radial_potential(g, d, 0.0);
  const double density = 3.0 / (4.0 * oracle::pi);
  for (double rho : {0.0, 0.2, 0.5, 0.9, 1.0, 1.5, 4.0}) {
    const double ref = oracle::newton_potential([&](double) { return density; }, 1.0, rho);
    CHECK(eval_potential(f, rho) == doctest::Approx(ref).epsilon(1e-6));
  }
  CHECK(f.values[0] == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("zero distribution gives the zero field") {
  auto g = make_radial_grid(Ball{1.0}, 10.0, 500);
  auto f = solve_radial_potential(g, {}, 0.3);
  for (double u : f.values) CHECK(u == 0.0);
  CHECK(f.far_coefficient == 0.0);
}

TEST_CASE("one-sided gradients and the surface jump") {
  auto g = make_radial_grid(Ball{1.0}, 10.0, 2000);
  auto f = solve_radial_potential(g, unit_sphere(1.0), 0.0);
  CHECK(eval_radial_gradient(f, 2.0, Side::Inner) == doctest::Approx(-0.25).epsilon(1e-10));
  CHECK(eval_radial_gradient(f, 2.0, Side::Outer) == doctest::Approx(-0.25).epsilon(1e-10));
  CHECK(std::abs(eval_radial_gradient(f, 1.0, Side::Inner)) < 1e-10);
  CHECK(eval_radial_gradient(f, 1.0, Side::Outer) == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(surface_charge_at(f, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(eval_radial_gradient(f, 12.0, Side::Outer) == doctest::Approx(-1.0 / 144.0));

  auto zero = solve_radial_potential(g, {}, 0.0);
  CHECK(eval_radial_gradient(zero, 0.5, Side::Inner) == 0.0);
}

TEST_CASE("screened uniform ball converges at second order") {
  const double k = 0.4;
  oracle::ScreenedBall exact(1.0, 1.0, k);
  std::vector<double> errors;
  for (std::size_t n : {250, 500, 1000, 2000}) {
    auto g = make_radial_grid(Ball{1.0}, 4.0, n);
    auto f = solve_radial_potential(g, {{VolumeShell{0.0, 1.0, 1.0}}}, k);
    errors.push_back(max_error(f, [&](double r) { return exact(r); }));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double order = std::log2(errors[i - 1] / errors[i]);
    CHECK(order > 1.8);
  }
  CHECK(errors.back() < 1e-4);
}

TEST_CASE("flux identity A_far = q + k^2 int_E U") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> charge(-2.0, 2.0);
  for (double k : {0.0, 0.2, 0.35, 0.42}) {
    ChargeDistribution d{{VolumeShell{0.0, 0.4, charge(rng)}, SurfaceSphere{0.4, charge(rng)},
                          VolumeShell{0.6, 1.0, charge(rng)}, SurfaceSphere{1.0, charge(rng)}}};
    const auto radii = d.radii();
    auto g = make_radial_grid(Ball{1.0}, 10.0, 2000, radii);
    auto f = solve_radial_potential(g, d, k);
    const double rhs = d.total() + k * k * conductor_integral(f);
    CHECK(f.far_coefficient == doctest::Approx(rhs).epsilon(5e-3));
    CHECK(std::abs(f.far_coefficient - rhs) < 1e-9 * (1.0 + std::abs(rhs)));
  }
}

TEST_CASE("linearity in the distribution") {
  const double k = 0.3;
  ChargeDistribution d1{{VolumeShell{0.0, 0.5, 1.0}}};
  ChargeDistribution d2{{SurfaceSphere{0.5, -0.7}, VolumeShell{0.5, 1.0, 0.4}}};
  const double alpha = 1.7, beta = -0.6;
  ChargeDistribution mix = d1.scaled(alpha);
  for (const auto& c : d2.scaled(beta).components) mix.components.push_back(c);
  const double radii[] = {0.5};
  auto g = make_radial_grid(Ball{1.0}, 8.0, 1200, radii);
  auto f1 = solve_radial_potential(g, d1, k);
  auto f2 = solve_radial_potential(g, d2, k);
  auto fm = solve_radial_potential(g, mix, k);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    CHECK(fm.values[i] == doctest::Approx(alpha * f1.values[i] + beta * f2.values[i]).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("indefinite form and unresolved components are rejected") {
  auto g = make_radial_grid(Ball{1.0}, 10.0, 1000);
  CHECK_THROWS_AS(solve_radial_potential(g, unit_sphere(1.0), 0.5), Error);
  try {
    solve_radial_potential(g, unit_sphere(1.0), 0.5);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IndefiniteForm);
  }
  try {
    solve_radial_potential(g, unit_sphere(0.5013), 0.0);
    FAIL("expected UnresolvedComponent");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnresolvedComponent);
  }
  auto coarse = make_uniform_grid(10.0, 1001);
  try {
    solve_radial_potential(coarse, {{VolumeShell{0.5, 0.52, 1.0}}}, 0.0);
    FAIL("expected UnresolvedComponent");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnresolvedComponent);
  }
}

TEST_CASE("coulomb superposition") {
  const SurfaceSphere pair[] = {{0.7, 1.0}, {0.8, -1.0}};
  auto f = coulomb_superposition(pair);
  CHECK(eval_potential(f, 0.5) == doctest::Approx(1.0 / 0.7 - 1.0 / 0.8).epsilon(1e-12));
  CHECK(eval_potential(f, 0.5) == doctest::Approx(0.178571).epsilon(1e-6));
  CHECK(std::abs(eval_potential(f, 1.2)) < 1e-14);

  const SurfaceSphere single[] = {{1.0, 1.0}};
  auto s = coulomb_superposition(single);
  CHECK(eval_potential(s, 0.5) == doctest::Approx(1.0));

  auto empty = coulomb_superposition(std::span<const SurfaceSphere>{});
  for (double u : empty.values) CHECK(u == 0.0);

  // Agrees with the k=0 solver on the same grid.
  auto g = make_radial_grid(Ball{0.9}, 5.0, 1500, std::vector<double>{0.7, 0.8});
  auto solved = solve_radial_potential(g, {{SurfaceSphere{0.7, 1.0}, SurfaceSphere{0.8, -1.0}}}, 0.0);
  auto sup = coulomb_superposition(pair, g);
  for (std::size_t i = 0; i < g.node_count(); ++i) CHECK(solved.values[i] == doctest::Approx(sup.values[i]).scale(1.0));
}

TEST_CASE("decomposition recovers the source") {
  auto g = make_radial_grid(Ball{1.0}, 10.0, 2000);
  SUBCASE("Coulomb sphere") {
    const SurfaceSphere one[] = {{1.0, 1.0}};
    auto d = decompose_distribution(coulomb_superposition(one, g), Ball{1.0}, 0.0);
    REQUIRE(d.components.size() == 1);
    const auto& s = std::get<SurfaceSphere>(d.components[0]);
    CHECK(s.radius == doctest::Approx(1.0));
    CHECK(s.charge == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("zero field") {
    auto d = decompose_distribution(solve_radial_potential(g, {}, 0.0), Ball{1.0}, 0.0);
    CHECK(d.empty());
  }
  SUBCASE("screened mix") {
    const double k = 0.4;
    ChargeDistribution src{{VolumeShell{0.0, 1.0, -2.0}, SurfaceSphere{1.0, 3.0}}};
    auto d = decompose_distribution(solve_radial_potential(g, src, k), Ball{1.0}, k);
    REQUIRE(d.components.size() == 2);
    CHECK(std::get<VolumeShell>(d.components[0]).charge == doctest::Approx(-2.0).epsilon(0.02));
    CHECK(std::get<SurfaceSphere>(d.components[1]).charge == doctest::Approx(3.0).epsilon(0.02));
  }
  SUBCASE("corrupted exterior is detected") {
    auto f = solve_radial_potential(g, unit_sphere(1.0), 0.0);
    f.scaled[1500] += 1e-3;
    f.values[1500] = f.scaled[1500] / g.nodes[1500];
    try {
      decompose_distribution(f, Ball{1.0}, 0.0);
      FAIL("expected NonConductorKink");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NonConductorKink);
    }
  }
}

TEST_CASE("round trip on random distributions") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    // Three disjoint pieces inside the unit ball.
    const double r1 = 0.2 + 0.2 * u(rng), r2 = r1 + 0.1 + 0.2 * u(rng), r3 = std::min(0.97, r2 + 0.1 + 0.3 * u(rng));
    const double k = 0.4 * u(rng);
    ChargeDistribution src{{VolumeShell{0.0, r1, 2.0 * u(rng) - 1.0}, SurfaceSphere{r2, 2.0 * u(rng) + 0.2},
                            VolumeShell{r2, r3, -(2.0 * u(rng) + 0.2)}, SurfaceSphere{1.0, 1.0 + u(rng)}}};
    const auto radii = src.radii();
    auto g = make_radial_grid(Ball{1.0}, 3.0, 3000, radii);
    auto back = decompose_distribution(solve_radial_potential(g, src, k), Ball{1.0}, k);
    for (const auto& c : src.components) {
      const double q = component_charge(c);
      if (std::abs(q) < 0.05) continue;  // below the recovery threshold
      bool found = false;
      for (const auto& b : back.components) {
        if (c.index() != b.index()) continue;
        const double lo = std::holds_alternative<VolumeShell>(c) ? std::get<VolumeShell>(c).a : std::get<SurfaceSphere>(c).radius;
        const double lo2 = std::holds_alternative<VolumeShell>(b) ? std::get<VolumeShell>(b).a : std::get<SurfaceSphere>(b).radius;
        if (std::abs(lo - lo2) > 1e-9) continue;
        found = true;
        CHECK(component_charge(b) == doctest::Approx(q).epsilon(0.02));
      }
      CHECK(found);
    }
  }
}

TEST_CASE("potential table export") {
  auto g = make_radial_grid(Ball{1.0}, 2.0, 21);
  auto f = solve_radial_potential(g, unit_sphere(1.0), 0.0);
  std::ostringstream os;
  write_potential_csv(f, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "rho,U,dU_minus,dU_plus");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 21);
  CHECK(os.str().find("\n1,1,") != std::string::npos);
}
