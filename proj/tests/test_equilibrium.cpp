#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "potkit/equilibrium.hpp"
#include "potkit/error.hpp"

using namespace potkit;

namespace {

// 30-digit evaluations of q/(C - k^2|E|) and friends (mpmath).
constexpr double kA_1_1_04 = 3.0321998345405;
constexpr double kQ_1_1_04 = -2.0321998345405;
constexpr double kA_2_1_01 = 0.600637835234;
constexpr double kQ_2_1_01 = -0.201275670468;
constexpr double kQhat_2_1_01 = 1.201275670468;

}  // namespace

TEST_CASE("ball at k = 0 keeps all charge on the surface") {
  const auto sol = solve_equilibrium(Ball{1.0}, 1.0, 0.0);
  CHECK(sol.q_hat == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(sol.Q) < 1e-6);
  CHECK(sol.A == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sol.W == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("ball at k = 0.4 carries interior charge") {
  const auto sol = solve_equilibrium(Ball{1.0}, 1.0, 0.4);
  CHECK(sol.A == doctest::Approx(3.032201).epsilon(0.02));
  CHECK(sol.Q == doctest::Approx(-2.032201).epsilon(0.02));
  CHECK(sol.q_hat == doctest::Approx(3.032201).epsilon(0.02));
  CHECK(sol.A == doctest::Approx(kA_1_1_04).epsilon(1e-3));
  CHECK(sol.Q == doctest::Approx(kQ_1_1_04).epsilon(1e-3));
  CHECK(sol.W == doctest::Approx(1.0 * sol.A).epsilon(1e-10));
  CHECK(sol.charges.total() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.Q + sol.q_hat == doctest::Approx(1.0).epsilon(1e-12));
  // The charge is not confined to the boundary once k > 0.
  CHECK(std::abs(sol.Q) > 0.1 * std::abs(sol.q_hat));
  // Uniform interior density: every shell has the same charge per volume.
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (const auto& c : sol.charges.components) {
    if (const auto* s = std::get_if<VolumeShell>(&c)) {
      const double density = s->charge / shell_volume(s->a, s->b);
      lo = std::min(lo, density);
      hi = std::max(hi, density);
    }
  }
  CHECK(hi - lo < 0.01 * std::abs(hi));
}

TEST_CASE("zero charge gives the zero distribution") {
  const auto sol = solve_equilibrium(Ball{1.0}, 0.0, 0.3);
  CHECK(sol.charges.empty());
  CHECK(sol.W == 0.0);
  CHECK(sol.A == 0.0);
}

TEST_CASE("k beyond the Poincare constant is indefinite") {
  try {
    solve_equilibrium(Ball{1.0}, 1.0, 0.45);
    FAIL("expected IndefiniteForm");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IndefiniteForm);
  }
  CHECK_THROWS_AS(solve_equilibrium(VoxelSet{0.1, 1, 1, 1, {1}}, 1.0, 0.0), Error);
}

TEST_CASE("closed form for the ball") {
  const auto a = ball_closed_form(1.0, 1.0, 0.4);
  CHECK(a.A == doctest::Approx(kA_1_1_04).epsilon(1e-12));
  CHECK(a.Q == doctest::Approx(kQ_1_1_04).epsilon(1e-12));
  CHECK(a.q_hat == doctest::Approx(kA_1_1_04).epsilon(1e-12));
  CHECK(a.Q + a.q_hat == doctest::Approx(1.0).epsilon(1e-14));

  const auto b = ball_closed_form(1.0, 1.0, 0.0);
  CHECK(b.A == 1.0);
  CHECK(b.Q == 0.0);
  CHECK(b.q_hat == 1.0);

  const auto c = ball_closed_form(2.0, 1.0, 0.1);
  CHECK(c.A == doctest::Approx(kA_2_1_01).epsilon(1e-11));
  CHECK(c.Q == doctest::Approx(kQ_2_1_01).epsilon(1e-11));
  CHECK(c.q_hat == doctest::Approx(kQhat_2_1_01).epsilon(1e-11));
  CHECK(c.Q + c.q_hat == doctest::Approx(1.0).epsilon(1e-14));

  try {
    ball_closed_form(1.0, 1.0, 0.5);
    FAIL("expected DenominatorNonpositive");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DenominatorNonpositive);
  }
}

TEST_CASE("closed-form distribution matches the minimizer") {
  const auto d0 = equilibrium_distribution_ball(1.0, 1.0, 0.0);
  REQUIRE(d0.components.size() == 1);
  CHECK(std::holds_alternative<SurfaceSphere>(d0.components[0]));

  for (double k : {0.0, 0.1, 0.2, 0.3, 0.4}) {
    const auto d = equilibrium_distribution_ball(1.0, 1.0, k);
    CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-14));
    const auto f = ball_closed_form(1.0, 1.0, k);
    const auto sol = solve_equilibrium(Ball{1.0}, 1.0, k);
    CHECK(sol.A == doctest::Approx(f.A).epsilon(0.02));
    CHECK(sol.q_hat == doctest::Approx(f.q_hat).epsilon(0.02));
    if (k > 0.0) {
      CHECK(sol.Q == doctest::Approx(f.Q).epsilon(0.02));
    } else {
      CHECK(std::abs(sol.Q) < 1e-6);
    }
  }
}

TEST_CASE("uniqueness across grids and bases") {
  const auto a = solve_equilibrium(Ball{1.0}, 1.0, 0.35);
  const auto b = solve_equilibrium(Ball{1.0}, 1.0, 0.35, RadialGridSpec{6.0, 3001}, 24);
  CHECK(a.A == doctest::Approx(b.A).epsilon(0.02));
  CHECK(a.Q == doctest::Approx(b.Q).epsilon(0.02));
  CHECK(a.q_hat == doctest::Approx(b.q_hat).epsilon(0.02));
}

TEST_CASE("equilibrium minimizes the energy") {
  const auto sol = solve_equilibrium(Ball{1.0}, 1.0, 0.4);
  std::mt19937 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  const auto m = sol.coefficients.size();
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd d(m);
    for (Eigen::Index i = 0; i < m; ++i) d(i) = n(rng);
    d.array() -= d.mean();
    for (double t : {1e-2, -1e-2, 1e-1, -1e-1}) {
      CHECK(sol.matrix.energy(sol.coefficients + t * d) >= sol.W);
    }
  }
}

TEST_CASE("potential is constant on the conductor") {
  for (double k : {0.0, 0.4}) {
    const auto sol = solve_equilibrium(Ball{1.0}, 1.0, k);
    CHECK(constancy_check(sol) <= 0.005 * sol.A);
  }
  // A volume-only charge is not in equilibrium.
  auto grid = make_radial_grid(Ball{1.0}, 10.0, 2000);
  auto field = solve_radial_potential(grid, {{VolumeShell{0.0, 1.0, 1.0}}}, 0.0);
  CHECK(potential_deviation(field, Ball{1.0}) > 0.4);
  const auto sol = solve_equilibrium(Ball{1.0}, 1.0, 0.0);
  CHECK(potential_deviation(sol.potential, Ball{1.0}) < 0.005);
}

TEST_CASE("nested shells at k = 0") {
  const NestedShells g{0.5, {{0.6, 0.7}, {0.8, 0.9}}, std::nullopt};
  const auto charges = nested_spheres_charges(g, 1.0);
  REQUIRE(charges.size() == 5);
  const double expected[] = {1.0, -1.0, 1.0, -1.0, 1.0};
  const double radii[] = {0.5, 0.6, 0.7, 0.8, 0.9};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(charges[i].radius == radii[i]);
    CHECK(charges[i].charge == doctest::Approx(expected[i]).epsilon(1e-12));
  }
  CHECK(total_variation(charges) == doctest::Approx(5.0));

  auto field = coulomb_superposition(charges);
  for (double rho : {0.6, 0.65, 0.7}) {
    CHECK(eval_potential(field, rho) == doctest::Approx(1.0 / 0.7 - 1.0 / 0.8 + 1.0 / 0.9).epsilon(1e-12));
    CHECK(eval_potential(field, rho) == doctest::Approx(1.289683).epsilon(1e-6));
  }

  const auto single = nested_spheres_charges(NestedShells{0.5, {}, std::nullopt}, 1.0);
  REQUIRE(single.size() == 1);
  CHECK(single[0].charge == 1.0);
  auto sf = coulomb_superposition(single);
  CHECK(eval_potential(sf, 0.8) == doctest::Approx(1.0 / 0.8));
  CHECK(eval_potential(sf, 0.2) == doctest::Approx(2.0));

  for (std::size_t m = 0; m < 6; ++m) {
    NestedShells many{0.5, {}, 0.99};
    for (std::size_t s = 0; s < m; ++s) many.shell_faces.push_back({0.55 + 0.07 * s, 0.58 + 0.07 * s});
    CHECK(total_variation(nested_spheres_charges(many, -2.0)) == doctest::Approx((2.0 * m + 1.0) * 2.0));
  }

  try {
    nested_spheres_charges(NestedShells{0.5, {{0.5, 0.7}}, std::nullopt}, 1.0);
    FAIL("expected SingularSystem");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularSystem);
  }
}

TEST_CASE("convexity of the energy") {
  const ChargeDistribution surface{{SurfaceSphere{1.0, 1.0}}};
  const ChargeDistribution volume{{VolumeShell{0.0, 1.0, 1.0}}};
  const auto same = convexity_check(surface, surface, Ball{1.0}, 0.3);
  CHECK(same.midpoint_energy == doctest::Approx(same.average_energy).epsilon(1e-12));
  const auto strict = convexity_check(surface, volume, Ball{1.0}, 0.3);
  CHECK(strict.midpoint_energy < strict.average_energy - 1e-3);

  const auto sol = solve_equilibrium(Ball{1.0}, 1.0, 0.3);
  std::mt19937 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  const auto m = sol.coefficients.size();
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd c1(m), c2(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      c1(i) = n(rng);
      c2(i) = n(rng);
    }
    c1.array() += (1.0 - c1.sum()) / static_cast<double>(m);
    c2.array() += (1.0 - c2.sum()) / static_cast<double>(m);
    const auto r = convexity_check(sol.matrix, c1, c2);
    CHECK(r.midpoint_energy <= r.average_energy + 1e-10);
  }
}

TEST_CASE("nested conductor as a single equipotential") {
  const NestedShells g{0.5, {{0.6, 0.7}}, std::nullopt};
  const auto sol = solve_equilibrium(g, 1.0, 0.0);
  // All faces of one conductor at the same potential: only the outermost face
  // is charged at k = 0.
  CHECK(sol.q_hat == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.A == doctest::Approx(1.0 / 0.7).epsilon(0.01));
  CHECK(constancy_check(sol) <= 0.005 * sol.A);
}

TEST_CASE("report and charge table") {
  const auto sol = solve_equilibrium(Ball{1.0}, 1.0, 0.4, RadialGridSpec{10.0, 2000}, 4);
  std::ostringstream os;
  write_equilibrium_report(sol, os);
  CHECK(os.str().find("A = 3.03") == 0);
  CHECK(os.str().find("grid_nodes = 2000") != std::string::npos);
  std::ostringstream table;
  write_charge_table(sol.charges, table);
  std::istringstream is(table.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "component,r_inner,r_outer,charge");
  std::getline(is, line);
  CHECK(line.rfind("shell,0,0.25,", 0) == 0);
  int rows = 1;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 5);
}
