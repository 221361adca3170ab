#include <doctest.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "potkit/error.hpp"
#include "potkit/functional.hpp"

using namespace potkit;

namespace {

double closed_form_A(double r, double q, double k) { return q / (r - k * k * ball_volume(r)); }

}  // namespace

TEST_CASE("inner product of the unit-sphere potential is the capacity") {
  auto g = make_radial_grid(Ball{1.0}, 10.0, 2000);
  auto f = sample(g, [](double r) { return std::min(1.0, 1.0 / r); });
  CHECK(inner_k(f, f, 0.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(inner_k(f, f, Ball{1.0}, 0.0) == doctest::Approx(1.0).epsilon(1e-10));
  // Subtracting k^2 int_B 1 = k^2 |B|.
  CHECK(inner_k(f, f, 0.3) == doctest::Approx(1.0 - 0.09 * ball_volume(1.0)).epsilon(1e-10));
}

TEST_CASE("inner_k is symmetric and bilinear") {
  auto g = make_radial_grid(Ball{1.0}, 6.0, 800);
  std::mt19937 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  auto random_fn = [&] {
    const double a = n(rng), b = n(rng), c = n(rng);
    return sample(g, [=](double r) { return (a + b * r + c * std::cos(3.0 * r)) / (1.0 + r * r); });
  };
  for (int t = 0; t < 20; ++t) {
    auto f = random_fn(), h = random_fn(), w = random_fn();
    const double k = 0.4;
    const double fh = inner_k(f, h, k);
    CHECK(fh == doctest::Approx(inner_k(h, f, k)).epsilon(1e-10));
    const double alpha = n(rng), beta = n(rng);
    SampledRadialFunction mix{g, f.samples};
    for (std::size_t i = 0; i < mix.samples.size(); ++i) mix.samples[i] = alpha * f.samples[i] + beta * h.samples[i];
    const double lhs = inner_k(mix, w, k);
    const double rhs = alpha * inner_k(f, w, k) + beta * inner_k(h, w, k);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * (std::abs(alpha * inner_k(f, w, k)) + std::abs(beta * inner_k(h, w, k)) + 1e-300));
    // Below the Poincare constant the form is positive.
    CHECK(inner_k(f, f, k) > 0.0);
    CHECK(inner_k(f, f, 0.0) >= 0.0);
  }
}

TEST_CASE("grid mismatch is reported") {
  auto a = sample(make_uniform_grid(1.0, 11), [](double) { return 1.0; });
  auto b = sample(make_uniform_grid(1.0, 12), [](double) { return 1.0; });
  CHECK_THROWS_AS(inner_k(a, b, 0.0), Error);
  auto c = sample(make_uniform_grid(2.0, 11), [](double) { return 1.0; });
  try {
    inner_k(a, c, 0.0);
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GridMismatch);
  }
}

TEST_CASE("energies") {
  const ConductorGeometry ball = Ball{1.0};
  CHECK(energy({{SurfaceSphere{1.0, 1.0}}}, ball, 0.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(energy({}, ball, 0.4) == 0.0);

  // Closed-form ball equilibrium at k = 0.4: W = q A.
  const double k = 0.4, A = closed_form_A(1.0, 1.0, k);
  const double Q = -k * k * ball_volume(1.0) * A;
  ChargeDistribution eq{{VolumeShell{0.0, 1.0, Q}, SurfaceSphere{1.0, 1.0 - Q}}};
  const double w = energy(eq, ball, k);
  CHECK(w == doctest::Approx(3.0321998345405).epsilon(1e-3));
  CHECK(w == doctest::Approx(3.032201).epsilon(0.02));

  // W = l(U): integrate the solved potential against the distribution.
  auto grid = make_radial_grid(ball, RadialGridSpec{10.0, 2000}, eq);
  auto field = solve_radial_potential(grid, eq, k);
  const double density = Q / ball_volume(1.0);
  const double lU = (1.0 - Q) * eval_potential(field, 1.0) +
                    boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                        [&](double r) { return 4.0 * oracle::pi * r * r * density * eval_potential(field, r); }, 0.0, 1.0,
                        10, 1e-12);
  CHECK(w == doctest::Approx(lU).epsilon(1e-6));
  // And W = inner_k(U, U).
  auto s = to_sampled(field);
  CHECK(inner_k(s, s, k) == doctest::Approx(w).epsilon(1e-10));
}

TEST_CASE("energy matrix of two spheres") {
  const std::vector<ChargeComponent> basis{SurfaceSphere{0.5, 1.0}, SurfaceSphere{1.0, 1.0}};
  auto G = assemble_energy_matrix(basis, Ball{1.0}, 0.0, RadialGridSpec{10.0, 2000});
  CHECK(G.entries(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(G.entries(0, 1) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(G.entries(1, 0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(G.entries(1, 1) == doctest::Approx(1.0).epsilon(1e-10));

  const std::vector<ChargeComponent> swapped{basis[1], basis[0]};
  auto H = assemble_energy_matrix(swapped, Ball{1.0}, 0.0, RadialGridSpec{10.0, 2000});
  CHECK(H.entries(0, 0) == doctest::Approx(G.entries(1, 1)));
  CHECK(H.entries(1, 1) == doctest::Approx(G.entries(0, 0)));
  CHECK(H.entries(0, 1) == doctest::Approx(G.entries(1, 0)));

  const std::vector<ChargeComponent> single{SurfaceSphere{1.0, 1.0}};
  CHECK(assemble_energy_matrix(single, Ball{1.0}, 0.2, RadialGridSpec{10.0, 2000}).entries(0, 0) > 0.0);
}

TEST_CASE("energy matrix is symmetric positive definite below the Poincare constant") {
  std::vector<ChargeComponent> basis;
  for (int i = 0; i < 8; ++i) basis.push_back(VolumeShell{i / 8.0, (i + 1) / 8.0, 1.0});
  basis.push_back(SurfaceSphere{1.0, 1.0});
  for (double k : {0.0, 0.2, 0.4, 0.44}) {
    auto G = assemble_energy_matrix(basis, Ball{1.0}, k, RadialGridSpec{10.0, 2000});
    const double scale = G.entries.cwiseAbs().maxCoeff();
    CHECK((G.entries - G.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (G.entries + G.entries.transpose()));
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
  try {
    assemble_energy_matrix(basis, Ball{1.0}, 0.45, RadialGridSpec{10.0, 2000});
    FAIL("expected IndefiniteForm");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IndefiniteForm);
  }
}

TEST_CASE("capacity of balls equals the radius") {
  for (double r : {0.5, 1.0, 2.5}) {
    const double c = capacity(Ball{r});
    CHECK(c / r == doctest::Approx(1.0).epsilon(0.01));
    CHECK(c / r == doctest::Approx(1.0).epsilon(1e-9));
  }
  // A bare sphere outside an inner ball has the same exterior problem.
  CHECK(capacity(NestedShells{0.5, {}, 1.0}) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(capacity(NestedShells{0.5, {{0.6, 0.7}}, std::nullopt}) == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("Poincare constant of balls") {
  const double k1 = poincare_constant(Ball{1.0});
  CHECK(k1 == doctest::Approx(std::sqrt(oracle::pi) / 4.0).epsilon(0.01));
  CHECK(k1 == doctest::Approx(oracle::poincare_by_shooting(1.0)).epsilon(1e-4));
  CHECK(poincare_without_factor(k1) == doctest::Approx(oracle::pi / 2.0).epsilon(1e-4));
  CHECK(poincare_constant(Ball{2.0}) == doctest::Approx(0.2216).epsilon(0.01));

  for (double r : {0.5, 1.0, 2.0, 4.0}) {
    const double k = poincare_constant(Ball{r});
    CHECK(k * r == doctest::Approx(k1).epsilon(0.005));
    const auto [lo, hi] = poincare_bounds(r);
    CHECK(k > lo);
    CHECK(k < hi);
  }
  // Insensitive to the outer radius once it is large enough.
  const double near = poincare_constant(Ball{1.0}, RadialGridSpec{10.0, 4000});
  const double far = poincare_constant(Ball{1.0}, RadialGridSpec{40.0, 16000});
  CHECK(far == doctest::Approx(near).epsilon(1e-3));
}

TEST_CASE("Poincare bounds") {
  const auto [lo, hi] = poincare_bounds(1.0);
  CHECK(lo == doctest::Approx(0.299206710301).epsilon(1e-11));
  CHECK(hi == doctest::Approx(0.488602511903).epsilon(1e-11));
  const auto [lo2, hi2] = poincare_bounds(2.0);
  CHECK(lo2 == doctest::Approx(lo / 2.0));
  CHECK(hi2 == doctest::Approx(hi / 2.0));
  CHECK_THROWS_AS(poincare_bounds(0.0), Error);
}

TEST_CASE("rearrangement") {
  auto g = make_uniform_grid(2.0, 401);

  SUBCASE("decreasing input is unchanged") {
    auto f = sample(g, [](double r) { return std::exp(-r * r); });
    auto s = rearrange(f);
    CHECK(s.grid.nodes == f.grid.nodes);
    CHECK(s.samples == f.samples);
    const auto ratios = rearrangement_inequalities(f);
    CHECK(ratios.l2_ratio == doctest::Approx(1.0));
    CHECK(ratios.dirichlet_ratio == doctest::Approx(1.0));
  }

  SUBCASE("two bumps merge into a decreasing profile") {
    auto bump = [](double r, double c, double w) { return std::exp(-(r - c) * (r - c) / (w * w)); };
    auto f = sample(g, [&](double r) { return 0.6 * bump(r, 0.0, 0.2) + bump(r, 1.0, 0.15) * (r < 1.9 ? 1.0 : 0.0); });
    for (auto& x : f.samples) x = std::max(0.0, x - 1e-12);
    f.samples.back() = 0.0;
    auto s = rearrange(f);
    CHECK(std::is_sorted(s.samples.rbegin(), s.samples.rend()));
    auto a = f.samples, b = s.samples;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    for (double t : {0.05, 0.2, 0.5, 0.8}) {
      CHECK(superlevel_volume(s, t) == doctest::Approx(superlevel_volume(f, t)).epsilon(0.02));
    }
    const auto ratios = rearrangement_inequalities(f);
    CHECK(ratios.l2_ratio == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(ratios.dirichlet_ratio <= 1.0 + 1e-3);

    SampledRadialFunction scaled{f.grid, f.samples};
    for (auto& x : scaled.samples) x *= 7.5;
    const auto r2 = rearrangement_inequalities(scaled);
    CHECK(r2.l2_ratio == doctest::Approx(ratios.l2_ratio).epsilon(1e-12));
    CHECK(r2.dirichlet_ratio == doctest::Approx(ratios.dirichlet_ratio).epsilon(1e-12));
  }

  SUBCASE("indicator of a shell becomes indicator of a ball") {
    auto f = sample(g, [](double r) { return r >= 0.8 && r <= 1.2 ? 1.0 : 0.0; });
    const double v = superlevel_volume(f, 0.5);
    auto s = rearrange(f);
    const double radius = std::cbrt(3.0 * v / (4.0 * oracle::pi));
    for (std::size_t i = 0; i < s.grid.node_count(); ++i) {
      if (s.grid.nodes[i] < 0.98 * radius) CHECK(s.samples[i] == 1.0);
      if (s.grid.nodes[i] > 1.02 * radius) CHECK(s.samples[i] == 0.0);
    }
  }

  SUBCASE("voxel samples") {
    const std::size_t n = 20;
    const double h = 0.1;
    std::vector<double> cube(n * n * n, 0.0);
    // Occupy a 6x5x4 box of voxels.
    for (std::size_t k = 0; k < 4; ++k)
      for (std::size_t j = 0; j < 5; ++j)
        for (std::size_t i = 0; i < 6; ++i) cube[(i + 3) + n * ((j + 7) + n * (k + 2))] = 1.0;
    auto s = rearrange(cube, h);
    const double radius = std::cbrt(3.0 * 120 * h * h * h / (4.0 * oracle::pi));
    const auto last_one = std::find(s.samples.begin(), s.samples.end(), 0.0) - s.samples.begin() - 1;
    CHECK(s.grid.nodes[static_cast<std::size_t>(last_one)] < radius);
    CHECK(s.grid.nodes[static_cast<std::size_t>(last_one) + 1] > radius);
  }

  SUBCASE("negative samples") {
    auto f = sample(g, [](double r) { return 0.5 - r; });
    try {
      rearrange(f);
      FAIL("expected NegativeSamples");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NegativeSamples);
    }
  }
}

TEST_CASE("weighted Hardy inequality") {
  auto g = make_uniform_grid(1.0, 401);
  for (int s = 0; s <= 2; ++s) {
    auto f = sample(g, [s](double x) { return std::pow(x, s); });
    // Exact ratio for x^s: both sides are monomial integrals.
    const double lhs = 1.0 / ((s + 1.0) * (s + 1.0)) * (1.0 / 3.0 - 2.0 / (s + 4.0) + 1.0 / (2.0 * s + 5.0));
    const double rhs = 4.0 / 9.0 / (2.0 * s + 5.0);
    const double ratio = hardy_check(f);
    CHECK(ratio < 1.0);
    CHECK(ratio == doctest::Approx(lhs / rhs).epsilon(1e-4));
  }
  CHECK(hardy_check(sample(g, [](double) { return 0.0; })) == 0.0);

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + rng() % 30;
    std::vector<double> x(n);
    x[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) x[i] = x[i - 1] + 0.01 + u(rng);
    SampledRadialFunction f{make_plain_grid(x), std::vector<double>(n)};
    for (auto& y : f.samples) y = u(rng) < 0.3 ? 0.0 : std::pow(u(rng), 3.0) * 10.0;
    CHECK(hardy_check(f) <= 1.0);
  }

  // x^(-5/2) truncated near 0 approaches the sharp constant, slowly.
  double previous = 0.0;
  for (double a : {1e-2, 1e-4, 1e-8, 1e-16}) {
    std::vector<double> x{0.0};
    const int per_decade = 200;
    const int m = static_cast<int>(std::round(-std::log10(a) * per_decade));
    for (int i = 0; i <= m; ++i) x.push_back(a * std::pow(10.0, static_cast<double>(i) / per_decade));
    x.back() = 1.0;
    SampledRadialFunction f{make_plain_grid(x), {}};
    for (double xi : x) f.samples.push_back(xi < a ? 0.0 : std::pow(xi, -2.5));
    const double ratio = hardy_check(f);
    CHECK(ratio <= 1.0);
    CHECK(ratio > previous);
    previous = ratio;
  }
  CHECK(previous > 0.85);
}

TEST_CASE("ball and tent densities") {
  const Point origin{0.0, 0.0, 0.0};
  auto constant = [](const Point&) { return 2.5; };
  CHECK(density_ball(constant, origin, 0.3) == doctest::Approx(2.5).epsilon(1e-13));
  CHECK(density_tent(constant, {1.0, 2.0, 3.0}, 0.7) == doctest::Approx(2.5).epsilon(1e-13));

  auto norm2 = [](const Point& y) { return y[0] * y[0] + y[1] * y[1] + y[2] * y[2]; };
  for (double r : {1.0, 0.1, 0.01}) {
    CHECK(density_ball(norm2, origin, r) == doctest::Approx(3.0 * r * r / 5.0).epsilon(1e-12));
    CHECK(density_tent(norm2, origin, r) == doctest::Approx(2.0 * r * r / 5.0).epsilon(1e-12));
  }

  auto affine = [](const Point& y) { return 1.0 + 2.0 * y[0] - 3.0 * y[1] + 0.5 * y[2]; };
  const Point x{0.3, -0.4, 0.9};
  CHECK(density_ball(affine, x, 0.25) == doctest::Approx(affine(x)).epsilon(1e-13));

  auto smooth = [](const Point& y) { return std::exp(y[0]) * std::cos(2.0 * y[1]) + y[2] * y[2] * y[2]; };
  std::vector<double> rs{0.1, 0.05, 0.025}, diffs;
  for (double r : rs) diffs.push_back(std::abs(density_ball(smooth, x, r) - density_tent(smooth, x, r)));
  // Least-squares slope on log-log axes.
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    mx += std::log(rs[i]) / 3.0;
    my += std::log(diffs[i]) / 3.0;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    sxy += (std::log(rs[i]) - mx) * (std::log(diffs[i]) - my);
    sxx += (std::log(rs[i]) - mx) * (std::log(rs[i]) - mx);
  }
  CHECK(sxy / sxx >= 1.9);
  CHECK(density_ball(smooth, x, 0.025) == doctest::Approx(smooth(x)).epsilon(1e-3));
}
