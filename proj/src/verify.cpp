#include "potkit/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>

#include "potkit/equilibrium.hpp"
#include "potkit/error.hpp"
#include "potkit/forces.hpp"
#include "potkit/format.hpp"
#include "potkit/functional.hpp"
#include "potkit/photoeffect.hpp"
#include "potkit/radial_solver.hpp"
#include "potkit/voxel_solver.hpp"

namespace potkit {

namespace {

class Suite {
 public:
  explicit Suite(std::string name, std::vector<CheckResult>& out) : name_(std::move(name)), out_(out) {}

  /// body returns the verdict and fills the detail.
  void check(const std::string& name, const std::function<bool(std::string&)>& body) {
    CheckResult r{name_, name, false, "", false};
    try {
      r.pass = body(r.detail);
    } catch (const Error& e) {
      r.detail = std::string(to_string(e.kind())) + ": " + e.what();
    } catch (const std::exception& e) {
      r.detail = e.what();
    }
    out_.push_back(std::move(r));
  }

  void info(const std::string& name, const std::string& detail) {
    out_.push_back({name_, name, true, detail, true});
  }

 private:
  std::string name_;
  std::vector<CheckResult>& out_;
};

std::string f6(double x) { return format_sig(x); }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

void radial_suite(std::vector<CheckResult>& out) {
  Suite s("radial", out);
  for (double r : {0.5, 1.0, 2.5}) {
    s.check("capacity of the ball r=" + f6(r), [r](std::string& d) {
      const auto t0 = std::chrono::steady_clock::now();
      const double c = capacity(Ball{r}, RadialGridSpec{10.0 * r, 2000});
      const double t = seconds_since(t0);
      d = "C=" + f6(c) + ", err=" + f6(rel(c, r)) + ", " + f6(t) + " s";
      return rel(c, r) <= 0.01 && t < 1.0;
    });
  }
  s.check("unit sphere charge gives min(1, 1/rho)", [](std::string& d) {
    const auto f = solve_radial_potential(make_radial_grid(Ball{1.0}, 10.0, 2000), {{SurfaceSphere{1.0, 1.0}}}, 0.0);
    double err = 0.0;
    for (std::size_t i = 0; i < f.grid.node_count(); ++i) {
      const double rho = f.grid.nodes[i];
      err = std::max(err, std::abs(f.values[i] - std::min(1.0, rho > 0.0 ? 1.0 / rho : 1.0)));
    }
    d = "max error " + f6(err);
    return err < 1e-10;
  });
  s.check("uniform ball Coulomb potential q(3R^2 - rho^2)/(2R^3)", [](std::string& d) {
    const auto f = solve_radial_potential(make_radial_grid(Ball{1.0}, 10.0, 2000), {{VolumeShell{0.0, 1.0, 1.0}}}, 0.0);
    double err = 0.0;
    for (std::size_t i = 0; i < f.grid.node_count(); ++i) {
      const double rho = f.grid.nodes[i];
      const double exact = rho <= 1.0 ? (3.0 - rho * rho) / 2.0 : 1.0 / rho;
      err = std::max(err, std::abs(f.values[i] - exact));
    }
    d = "max error " + f6(err);
    return err < 1e-4;
  });
  s.check("flux identity A_far = q + k^2 int_E U", [](std::string& d) {
    double worst = 0.0;
    for (double k : {0.0, 0.2, 0.4}) {
      const ChargeDistribution dist{{VolumeShell{0.0, 0.5, 0.7}, SurfaceSphere{0.5, -0.3}, SurfaceSphere{1.0, 1.1}}};
      const auto g = make_radial_grid(Ball{1.0}, RadialGridSpec{10.0, 2000}, dist);
      const auto f = solve_radial_potential(g, dist, k);
      worst = std::max(worst, std::abs(f.far_coefficient - dist.total() - k * k * conductor_integral(f)));
    }
    d = "max mismatch " + f6(worst);
    return worst < 1e-9;
  });
  s.check("zero distribution gives the zero field", [](std::string& d) {
    const auto f = solve_radial_potential(make_radial_grid(Ball{1.0}, 10.0, 500), {}, 0.3);
    const bool zero = std::all_of(f.values.begin(), f.values.end(), [](double v) { return v == 0.0; });
    d = zero ? "all zero" : "nonzero values";
    return zero;
  });
}

void functional_suite(std::vector<CheckResult>& out) {
  Suite s("functional", out);
  double k1 = 0.0;
  s.check("k(B1) inside the interval and near sqrt(pi)/4", [&k1](std::string& d) {
    k1 = poincare_constant(Ball{1.0});
    const auto [lo, hi] = poincare_bounds(1.0);
    const double target = std::sqrt(kPi) / 4.0;
    d = "k=" + f6(k1) + " in [" + f6(lo) + ", " + f6(hi) + "], target " + f6(target) + ", err " + f6(rel(k1, target));
    return k1 >= lo && k1 <= hi && rel(k1, target) <= 0.01;
  });
  s.info("Poincare constant conventions", "with the 1/4pi factor k=" + f6(k1) + "; without it kappa=" +
                                              f6(poincare_without_factor(k1)) + " (pi/2=" + f6(kPi / 2.0) + ")");
  s.check("k(B_r) scales like 1/r", [](std::string& d) {
    const double k1 = poincare_constant(Ball{1.0});
    double worst = 0.0;
    for (double r : {0.5, 2.0, 4.0}) worst = std::max(worst, rel(poincare_constant(Ball{r}) * r, k1));
    d = "max deviation of r k(B_r) " + f6(worst);
    return worst <= 0.005;
  });
  s.check("rearrangement keeps the distribution and lowers the Dirichlet integral", [](std::string& d) {
    const auto g = make_uniform_grid(2.0, 401);
    auto bump = [](double r, double c, double w) { return std::exp(-(r - c) * (r - c) / (w * w)); };
    double worst = 0.0;
    bool equimeasurable = true;
    for (double c : {0.6, 1.0, 1.3}) {
      auto f = sample(g, [&](double r) { return 0.5 * bump(r, 0.0, 0.3) + bump(r, c, 0.15); });
      f.samples.back() = 0.0;
      const auto star = rearrange(f);
      auto a = f.samples, b = star.samples;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      equimeasurable = equimeasurable && a == b;
      worst = std::max(worst, rearrangement_inequalities(f).dirichlet_ratio);
    }
    d = "sorted samples identical: " + std::string(equimeasurable ? "yes" : "no") + ", max Dirichlet ratio " + f6(worst);
    return equimeasurable && worst <= 1.0 + 1e-3;
  });
  s.check("weighted Hardy ratio <= 1 on 1000 random inputs", [](std::string& d) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const std::size_t n = 2 + rng() % 30;
      std::vector<double> x(n, 0.0);
      for (std::size_t i = 1; i < n; ++i) x[i] = x[i - 1] + 0.01 + u(rng);
      SampledRadialFunction f{make_plain_grid(x), std::vector<double>(n)};
      for (auto& y : f.samples) y = u(rng) < 0.3 ? 0.0 : std::pow(u(rng), 3.0) * 10.0;
      worst = std::max(worst, hardy_check(f));
    }
    d = "max ratio " + f6(worst);
    return worst <= 1.0;
  });
  s.check("ball and tent densities agree at second order", [](std::string& d) {
    auto smooth = [](const Point& y) { return std::exp(y[0]) * std::cos(2.0 * y[1]) + y[2] * y[2] * y[2]; };
    const Point x{0.3, -0.4, 0.9};
    std::vector<double> rs{0.1, 0.05, 0.025}, diffs;
    for (double r : rs) diffs.push_back(std::abs(density_ball(smooth, x, r) - density_tent(smooth, x, r)));
    const double slope = fit_slope(rs, diffs);
    d = "slope " + f6(slope);
    return slope >= 1.9;
  });
}

void equilibrium_suite(std::vector<CheckResult>& out) {
  Suite s("equilibrium", out);
  s.check("ball r=1, q=1, k=0.4 against the closed form", [](std::string& d) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sol = solve_equilibrium(Ball{1.0}, 1.0, 0.4);
    const double t = seconds_since(t0);
    const auto c = ball_closed_form(1.0, 1.0, 0.4);
    const double worst = std::max({rel(sol.A, c.A), rel(sol.Q, c.Q), rel(sol.q_hat, c.q_hat)});
    const double constancy = constancy_check(sol) / sol.A;
    d = "A=" + f6(sol.A) + " Q=" + f6(sol.Q) + " q_hat=" + f6(sol.q_hat) + " (closed form " + f6(c.A) + ", " + f6(c.Q) +
        ", " + f6(c.q_hat) + "), constancy " + f6(constancy) + ", " + f6(t) + " s";
    return worst <= 0.02 && constancy <= 0.005 && t < 5.0;
  });
  s.check("closed form Q + q_hat = q", [](std::string& d) {
    const auto c = ball_closed_form(1.0, 1.0, 0.4);
    d = "Q + q_hat - 1 = " + f6(c.Q + c.q_hat - 1.0);
    return std::abs(c.Q + c.q_hat - 1.0) <= 1e-15;
  });
  s.check("nested spheres alternate +q, -q", [](std::string& d) {
    const auto ch = nested_spheres_charges(NestedShells{0.5, {{0.6, 0.7}, {0.8, 0.9}}, std::nullopt}, 1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < ch.size(); ++i) worst = std::max(worst, std::abs(ch[i].charge - (i % 2 ? -1.0 : 1.0)));
    d = std::to_string(ch.size()) + " faces, max deviation " + f6(worst);
    return ch.size() == 5 && worst <= 1e-8;
  });
  s.check("total variation grows linearly with the shell count", [](std::string& d) {
    double worst = 0.0;
    for (std::size_t m = 0; m <= 8; ++m) {
      NestedShells g{0.5, {}, std::nullopt};
      for (std::size_t i = 0; i < m; ++i) g.shell_faces.push_back({0.6 + 0.1 * i, 0.65 + 0.1 * i});
      worst = std::max(worst, std::abs(total_variation(nested_spheres_charges(g, 1.0)) - (2.0 * m + 1.0)));
    }
    d = "max deviation from 2m + 1: " + f6(worst);
    return worst <= 1e-8;
  });
  s.check("midpoint energy inequality on 1000 random pairs", [](std::string& d) {
    const auto sol = solve_equilibrium(Ball{1.0}, 1.0, 0.3);
    std::mt19937 rng(17);
    std::normal_distribution<double> n(0.0, 1.0);
    const auto m = sol.coefficients.size();
    int violations = 0;
    for (int t = 0; t < 1000; ++t) {
      Eigen::VectorXd c1(m), c2(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        c1(i) = n(rng);
        c2(i) = n(rng);
      }
      c1.array() += (1.0 - c1.sum()) / static_cast<double>(m);
      c2.array() += (1.0 - c2.sum()) / static_cast<double>(m);
      const auto r = convexity_check(sol.matrix, c1, c2);
      if (r.midpoint_energy > r.average_energy + 1e-10 * std::abs(r.average_energy)) ++violations;
    }
    d = std::to_string(violations) + " violations";
    return violations == 0;
  });
  s.check("two discretizations agree", [](std::string& d) {
    const auto a = solve_equilibrium(Ball{1.0}, 1.0, 0.35);
    const auto b = solve_equilibrium(Ball{1.0}, 1.0, 0.35, RadialGridSpec{6.0, 3001}, 24);
    const double worst = std::max({rel(a.A, b.A), rel(a.Q, b.Q), rel(a.q_hat, b.q_hat)});
    d = "max relative difference " + f6(worst);
    return worst <= 0.02;
  });
}

void voxel_suite(std::vector<CheckResult>& out) {
  Suite s("voxel", out);
  s.check("voxel ball h=1/32 against the closed form", [](std::string& d) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto eq = solve_voxel_equilibrium(make_ball_mask(1.0, 1.0 / 32.0), 1.0, 0.4);
    const double t = seconds_since(t0);
    const double a = ball_closed_form(1.0, 1.0, 0.4).A;
    d = "A=" + f6(eq.A) + " (closed form " + f6(a) + "), err " + f6(rel(eq.A, a)) + ", " + f6(t) + " s";
    return rel(eq.A, a) <= 0.05 && t < 60.0;
  });
  s.check("k=0 voxel equilibrium leaves the interior uncharged", [](std::string& d) {
    const auto eq = solve_voxel_equilibrium(make_ball_mask(1.0, 1.0 / 16.0), 1.0, 0.0);
    d = "interior " + f6(eq.interior_charge) + ", surface " + f6(eq.surface_charge);
    return std::abs(eq.interior_charge) < 1e-10 && std::abs(eq.surface_charge - 1.0) < 1e-10;
  });
  s.info("voxel Poincare estimate", "circumscribed-ball surrogate for the h=1/32 unit ball: " +
                                        f6(voxel_poincare_surrogate(make_ball_mask(1.0, 1.0 / 32.0))));
}

void forces_suite(std::vector<CheckResult>& out) {
  Suite s("forces", out);
  s.check("exterior force eq/|x|^2 at k=0", [](std::string& d) {
    const auto eq = solve_equilibrium(Ball{1.0}, 1.0, 0.0);
    double worst = 0.0;
    for (double rho : {1.5, 2.0, 4.0}) worst = std::max(worst, rel(gradient_force(eq.potential, rho, 1.0), 1.0 / (rho * rho)));
    d = "max relative error " + f6(worst);
    return worst <= 0.01;
  });
  s.check("interior k-force of the equilibrium ball", [](std::string& d) {
    const auto eq = solve_equilibrium(Ball{1.0}, 1.0, 0.4);
    const double ratio = interior_force_ratio(eq, Ball{1.0});
    d = "max interior / surface " + f6(ratio);
    return ratio <= 0.005;
  });
  s.check("mollified force converges at second order", [](std::string& d) {
    const ChargeDistribution dist{{SurfaceSphere{1.0, 1.0}}};
    const auto field = solve_radial_potential(make_radial_grid(Ball{1.0}, 4.0, 8001), dist, 0.3);
    const double g = gradient_force(field, 0.5, 1.0);
    std::vector<double> rs{0.2, 0.1, 0.05}, errs;
    for (double r : rs) errs.push_back(std::abs(mollified_force(field, 0.5, 1.0, r) - g));
    const double slope = fit_slope(rs, errs);
    d = "slope " + f6(slope) + " at rho=0.5 inside a k=0.3 conductor";
    return slope >= 1.9;
  });
  s.check("electric-only interior force e Q rho / r^3", [](std::string& d) {
    const auto eq = solve_equilibrium(Ball{1.0}, 1.0, 0.4);
    const double f = electric_only_interior_force(eq, 0.5, 1.0);
    const double exact = ball_closed_form(1.0, 1.0, 0.4).Q * 0.5;
    d = "F=" + f6(f) + " (uniform-ball field " + f6(exact) + ")";
    return rel(f, exact) <= 0.01;
  });
  const double six = electric_only_force_six(1.0, 1.0, 0.4, 0.5, 1.0);
  const double derived = ball_closed_form(1.0, 1.0, 0.4).Q * 0.5;
  s.info("electric-only constant", "-6eq x/(r(3 - 4 pi k^2 r^2)) gives " + f6(six) +
                                       "; the uniform-ball field -4 pi k^2 eq x/(r(3 - 4 pi k^2 r^2)) gives " +
                                       f6(derived) + "; they agree only if 4 pi k^2 = 6");
  s.info("collision balance", "M = 2Qk^2/|B| = " + f6(collision_balance(ball_closed_form(1.0, 1.0, 0.4).Q, 0.4, 1.0)) +
                                  " for r=1, q=1, k=0.4 (no factor e; a model posit)");
  s.info("exterior force at k>0", "far coefficient is q_hat = " + f6(ball_closed_form(1.0, 1.0, 0.4).q_hat) +
                                      " at k=0.4, so the exterior force is e q_hat/|x|^2 rather than eq/|x|^2");
}

void photoeffect_suite(std::vector<CheckResult>& out) {
  Suite s("photoeffect", out);
  s.check("t(1, 0.1, 0.4) and its defining equation", [](std::string& d) {
    const double t = pair_parameter_t(1.0, 0.1, 0.4);
    const double res = pair_parameter_residual(1.0, 0.1, 0.4, t);
    d = "t=" + format_sig(t, 12) + ", residual " + f6(res);
    return std::abs(t - 0.393088226964882) <= 1e-9 && std::abs(res) <= 1e-12;
  });
  s.check("threshold energy E_min(1, 0.1, 1, 1)", [](std::string& d) {
    const auto e = threshold_energy(1.0, 0.1, 1.0, 1.0);
    d = "closed form " + format_sig(e.closed_form, 12) + ", quadrature " + format_sig(e.quadrature, 12) +
        ", relative difference " + f6(e.relative_difference());
    return std::abs(e.closed_form - 6.3131e-4) <= 5e-9 && e.relative_difference() <= 1e-10;
  });
  s.check("restoring force negative across the gap", [](std::string& d) {
    int violations = 0, evaluated = 0;
    for (double r : {0.5, 1.0, 2.0}) {
      for (double ratio : {0.05, 0.1}) {
        for (double kr : {0.35, 0.44}) {
          const auto m = make_pair_model(r, ratio * r, kr / r, 1.0, 1.0);
          for (int i = 1; i <= 100; ++i) {
            ++evaluated;
            if (!(restoring_force(r + m.delta * i / 101.0, m) < 0.0)) ++violations;
          }
        }
      }
    }
    d = std::to_string(violations) + " violations in " + std::to_string(evaluated) + " points";
    return violations == 0;
  });
  s.check("threshold scaling at fixed delta", [](std::string& d) {
    const std::vector<double> r{10.0, 20.0, 40.0, 80.0};
    const double slope = threshold_scaling(r, 0.1, 1.0, 1.0);
    d = "slope " + f6(slope) + " (fixed delta/r: " + f6(threshold_scaling_fixed_ratio(r, 0.1, 1.0, 1.0)) + ")";
    return std::abs(slope + 4.0) <= 0.1;
  });
  const double t_small = pair_parameter_t(1.0, kDefaultDelta, 0.4);
  s.info("pair separation 1.45e-8", "delta=" + f6(kDefaultDelta) + " with r=1, k=0.4: t=" + format_sig(t_small, 12) +
                              ", E_min=" + f6(threshold_energy(1.0, kDefaultDelta, 1.0, 1.0).closed_form));
}

}  // namespace

const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> names{"radial", "functional", "equilibrium", "voxel",
                                              "forces", "photoeffect", "all"};
  return names;
}

std::vector<CheckResult> run_suite(const std::string& name) {
  const auto& names = known_suites();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw Error(ErrorKind::InvalidInput, "unknown suite '" + name + "'");
  }
  std::vector<CheckResult> out;
  const bool all = name == "all";
  if (all || name == "radial") radial_suite(out);
  if (all || name == "functional") functional_suite(out);
  if (all || name == "equilibrium") equilibrium_suite(out);
  if (all || name == "voxel") voxel_suite(out);
  if (all || name == "forces") forces_suite(out);
  if (all || name == "photoeffect") photoeffect_suite(out);
  return out;
}

void write_suite_report(const std::vector<CheckResult>& results, std::ostream& out) {
  std::size_t passed = 0, total = 0;
  for (const auto& r : results) {
    if (r.informational) {
      out << "INFO " << r.suite << ": " << r.name << " (" << r.detail << ")\n";
      continue;
    }
    ++total;
    if (r.pass) ++passed;
    out << (r.pass ? "PASS " : "FAIL ") << r.suite << ": " << r.name << " (" << r.detail << ")\n";
  }
  out << "passed " << passed << "/" << total << "\n";
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.informational || r.pass; });
}

}  // namespace potkit
