#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's solvers.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <functional>
#include <numbers>
#include <utility>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

/// Coulomb potential of a radial density by the shell theorem:
/// U(rho) = int_0^R 4 pi s^2 f(s) min(1/s, 1/rho) ds.
inline double newton_potential(const std::function<double(double)>& density, double r_support, double rho) {
  auto integrand = [&](double s) { return 4.0 * pi * s * s * density(s) * (s > rho ? 1.0 / s : 1.0 / rho); };
  using boost::math::quadrature::gauss_kronrod;
  if (rho > 0.0 && rho < r_support) {
    return gauss_kronrod<double, 31>::integrate(integrand, 0.0, rho, 15, 1e-14) +
           gauss_kronrod<double, 31>::integrate(integrand, rho, r_support, 15, 1e-14);
  }
  return gauss_kronrod<double, 31>::integrate(integrand, 0.0, r_support, 15, 1e-14);
}

/// k-potential of a uniform ball charge Q of radius R when the conductor is
/// exactly that ball: constant particular solution plus sin(kappa rho)/rho
/// inside, A/rho outside, C^1 matching at R.
struct ScreenedBall {
  double c, b, a, kappa, r;
  ScreenedBall(double q, double radius, double k) : r(radius) {
    kappa = std::sqrt(4.0 * pi) * k;
    const double f = q / (4.0 * pi * radius * radius * radius / 3.0);
    c = -f / (k * k);
    b = -c / (kappa * std::cos(kappa * radius));
    a = -b * (kappa * radius * std::cos(kappa * radius) - std::sin(kappa * radius));
  }
  double operator()(double rho) const {
    if (rho >= r) return a / rho;
    if (rho == 0.0) return c + b * kappa;
    return c + b * std::sin(kappa * rho) / rho;
  }
  double derivative(double rho) const {
    if (rho >= r) return -a / (rho * rho);
    return b * (kappa * rho * std::cos(kappa * rho) - std::sin(kappa * rho)) / (rho * rho);
  }
};

/// Radial shooting for the smallest eigenvalue of
/// -(1/4pi) Lap f = lambda 1_B f on all of space, ball radius r.
/// Integrates v'' = -kappa^2 v from v(0)=0, v'(0)=1 with RK4 and brackets the
/// root of the matching condition v'(r) = 0 (exterior v = const).
inline double poincare_by_shooting(double r) {
  auto mismatch = [r](double kappa) {
    const int steps = 4000;
    const double h = r / steps;
    double v = 0.0, dv = 1.0;
    for (int i = 0; i < steps; ++i) {
      auto f = [kappa](double vv, double dd) { return std::pair{dd, -kappa * kappa * vv}; };
      auto [k1v, k1d] = f(v, dv);
      auto [k2v, k2d] = f(v + 0.5 * h * k1v, dv + 0.5 * h * k1d);
      auto [k3v, k3d] = f(v + 0.5 * h * k2v, dv + 0.5 * h * k2d);
      auto [k4v, k4d] = f(v + h * k3v, dv + h * k3d);
      v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
      dv += h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
    }
    return dv;
  };
  boost::math::tools::eps_tolerance<double> tol(50);
  std::uintmax_t iters = 200;
  auto [lo, hi] = boost::math::tools::bisect(mismatch, 0.1 / r, 2.5 / r, tol, iters);
  const double kappa = 0.5 * (lo + hi);
  return kappa / std::sqrt(4.0 * pi);
}

/// Equilibrium of a ball conductor. Inside U = A, so the volume density is
/// -k^2 A; outside U = a/rho with a = q + k^2 A |B| (flux) and a = A r
/// (continuity). Solved here without the library.
struct BallEquilibrium {
  double A, Q, q_hat;
  BallEquilibrium(double q, double r, double k) {
    const double volume = 4.0 * pi * r * r * r / 3.0;
    A = q / (r - k * k * volume);
    Q = -k * k * A * volume;
    q_hat = q - Q;
  }
};

/// Root of the pair balance (3t - a)/(3 - a) = -((r+d)/(r+2d))^2 with
/// a = 4 pi k^2 r^2, found by bisection rather than the explicit formula.
inline double pair_t_by_bisection(double r, double delta, double k) {
  const double a = 4.0 * pi * k * k * r * r;
  const double c = std::pow((r + delta) / (r + 2.0 * delta), 2);
  auto g = [&](double t) { return (3.0 * t - a) / (3.0 - a) + c; };
  boost::math::tools::eps_tolerance<double> tol(52);
  std::uintmax_t iters = 200;
  auto [lo, hi] = boost::math::tools::bisect(g, -10.0, 10.0, tol, iters);
  return 0.5 * (lo + hi);
}

}  // namespace oracle
