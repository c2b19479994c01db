#include <cmath>
#include <random>

#include "doctest.h"
#include "hnls/nonlinear.hpp"
#include "hnls/presets.hpp"
#include "hnls/verification.hpp"

using namespace hnls;

TEST_SUITE("nonlinear") {

TEST_CASE("right-hand side assembly") {
  GridSpec g(3.0, 1.0, 16, 16);
  std::mt19937_64 rng(5);
  SpaceTimeField v = random_smooth_field(g, rng);
  SpaceTimeField f = random_smooth_field(g, rng);
  const cplx I(0, 1);

  NonlinearSources zero = nonlinear_rhs(SpaceTimeField(g, false), EquationParams(0, 1, 1, 0, 0, 2, 1), f);
  CHECK(zero.f1.is_zero_placeholder());
  CHECK(zero.f0.at(3) == f.at(3));

  // Cubic case, pointwise oracle.
  NonlinearSources cubic = nonlinear_rhs(v, EquationParams(0, 1, 1, 0, 0, 2, 1), f);
  for (int n = 0; n <= g.Nt; n += 5)
    for (int j = 0; j < g.nodes(); ++j) {
      cplx z = v.at(n)[j];
      cplx want = f.at(n)[j] - std::norm(z) * z;
      CHECK(std::abs(cubic.f0.at(n)[j] - want) <= 1e-13 * (1 + std::abs(want)));
      CHECK(cubic.f1.at(n)[j] == cplx(0.0));
    }

  // Derivative terms, pointwise oracle with centered differences inside.
  const double beta = 0.4, gamma = -0.7, p1 = 1.5;
  NonlinearSources d = nonlinear_rhs(v, EquationParams(0, 1, 0, beta, gamma, 2, p1), f);
  for (int n = 0; n <= g.Nt; n += 4)
    for (int j = 1; j <= g.Nx; ++j) {
      ComplexField s = v.at(n);
      cplx vx = (s[j + 1] - s[j - 1]) / (2 * g.dx());
      double m = std::pow(std::abs(s[j]), p1);
      cplx want0 = f.at(n)[j] + I * gamma * m * vx;
      cplx want1 = I * (beta + gamma) * m * s[j];
      CHECK(std::abs(d.f0.at(n)[j] - want0) <= 1e-12 * (1 + std::abs(want0)));
      CHECK(std::abs(d.f1.at(n)[j] - want1) <= 1e-12 * (1 + std::abs(want1)));
    }
}

TEST_CASE("theta map on trivial problems") {
  GridSpec g(3.0, 1.0, 16, 64);
  ControlProblem empty(EquationParams(1, 1, 1, 0, 0, 2, 1), g);
  ThetaResult t = theta_map(SpaceTimeField(g, false), empty);
  CHECK(t.converged);
  CHECK(t.h.cwiseAbs().maxCoeff() == 0.0);
  CHECK(t.u.value_norm() == 0.0);

  // Nonlinearity off: the map ignores its argument.
  ControlProblem lin(EquationParams(1, 1, 0, 0, 0, 2, 1), g);
  lin.uT = gaussian_bump(g, 1.5, 0.3, 1e-2);
  lin.uT[0] = lin.uT[g.Nx + 1] = 0.0;
  std::mt19937_64 rng(1);
  ThetaResult a = theta_map(SpaceTimeField(g, false), lin);
  ThetaResult b = theta_map(random_smooth_field(g, rng), lin);
  CHECK(series_norm(a.h - b.h, g) == 0.0);
}

TEST_CASE("radius rule") {
  for (auto [C, p0, p1] : {std::tuple{0.3, 2.0, 1.0}, {10.0, 4.0, 2.0}, {1e-3, 1.0, 1.0}}) {
    double r = radius_from_constant(C, p0, p1);
    CHECK(std::pow(r, p0) + std::pow(r, p1) == doctest::Approx(1 / (4 * C)).epsilon(1e-12));
  }
  CHECK(std::isinf(radius_from_constant(0.0, 2, 1)));
}

TEST_CASE("picard on zero data converges at once") {
  ControlProblem pb(EquationParams(1, 1, 1, 0, 0, 2, 1), GridSpec(3.0, 1.0, 16, 64));
  ControlSolution s = picard_solve(pb);
  CHECK(s.status == PicardStatus::converged);
  CHECK(s.iterations == 1);
  CHECK(x_norm(s.u) == 0.0);
}

TEST_CASE("picard on the small cubic scenario") {
  ControlProblem pb = standard_cubic_problem(32, 256, 1e-3);
  CHECK(pb.c0 == doctest::Approx(1e-3).epsilon(1e-12));
  PicardConfig cfg;
  ControlSolution s = picard_solve(pb, cfg);
  CHECK(s.status == PicardStatus::converged);
  CHECK(s.verified);
  for (double q : s.contraction_ratios) CHECK(q < 0.5);
  for (size_t k = 1; k < s.step_norms.size(); ++k) CHECK(s.step_norms[k] < s.step_norms[k - 1]);
  for (double nv : s.iterate_norms) CHECK(nv <= s.radius);
  CHECK(s.certificate <= 2 * cfg.fp_tol);
  CHECK(s.terminal_residual <= 1e-6);
  CHECK(s.pde_residual <= 1e-6 * pb.c0);
  // The returned pair solves the nonlinear equation when replayed.
  SpaceTimeField replay = solve_nonlinear_forward(pb, pb.u0, s.h);
  CHECK(x_norm(replay - s.u) <= 1e-8 * x_norm(s.u));
}

TEST_CASE("picard fails gracefully on large data") {
  ControlProblem pb = standard_cubic_problem(32, 256, 1e2);
  ControlSolution s = picard_solve(pb);
  CHECK((s.status == PicardStatus::divergence || s.status == PicardStatus::ball_escape));
  CHECK_FALSE(s.verified);
}

TEST_CASE("picard config validation") {
  ControlProblem pb(EquationParams(1, 1, 1, 0, 0, 2, 1), GridSpec(3.0, 1.0, 16, 64));
  PicardConfig bad;
  bad.fp_tol = 0.0;
  CHECK_THROWS_AS(picard_solve(pb, bad), ConfigError);
  bad = {};
  bad.under_relaxation = 1.5;
  CHECK_THROWS_AS(picard_solve(pb, bad), ConfigError);
  bad = {};
  bad.r = -1.0;
  CHECK_THROWS_AS(picard_solve(pb, bad), ConfigError);
}

TEST_CASE("two starting guesses reach the same fixed point") {
  ControlProblem pb = standard_cubic_problem(32, 256, 1e-3);
  PicardConfig cfg;
  ControlSolution a = picard_solve(pb, cfg);
  cfg.start_from_zero = true;
  ControlSolution b = picard_solve(pb, cfg);
  REQUIRE(a.status == PicardStatus::converged);
  REQUIRE(b.status == PicardStatus::converged);
  CHECK(x_norm(a.u - b.u) <= 10 * cfg.fp_tol * x_norm(a.u));
}

TEST_CASE("smallness scan") {
  ControlProblem base = standard_cubic_problem(16, 128, 1.0);
  SmallnessTable t = smallness_scan(base, {0.0, 1e-4, 1e-3, 1e2});
  REQUIRE(t.rows.size() == 4);
  CHECK(t.rows[0].converged);
  CHECK(t.rows[1].converged);
  CHECK(t.rows[2].converged);
  CHECK_FALSE(t.rows[3].converged);
  CHECK(t.delta_hat == 1e-3);
  CHECK_THROWS_AS(smallness_scan(base, {1e-3, 1e-4}), ConfigError);
  CHECK_THROWS_AS(smallness_scan(base, {-1.0}), ConfigError);
}

TEST_CASE("gronwall check") {
  ControlProblem pb = standard_cubic_problem(32, 128, 1e-1);
  TimeSeries h = zero_series(pb.grid);
  SpaceTimeField u = solve_nonlinear_forward(pb, pb.u0, h);
  GronwallReport same = uniqueness_check(pb, u, u);
  CHECK(same.max_difference == 0.0);
  CHECK(same.holds);

  ComplexField pert = pb.u0 + sine_mode(pb.grid, 2, cplx(1e-3, 0.0));
  SpaceTimeField w = solve_nonlinear_forward(pb, pert, h);
  GronwallReport r = uniqueness_check(pb, u, w);
  CHECK(r.holds);
  CHECK(r.initial_difference > 0.0);
  for (size_t n = 0; n < r.bound.size(); ++n) CHECK(r.weighted_energy[n] <= r.bound[n] * (1 + 1e-10));

  ControlProblem other = standard_cubic_problem(16, 128, 1e-1);
  CHECK_THROWS_AS(uniqueness_check(other, u, w), ConfigError);
}

TEST_CASE("gronwall rate reduces to the linear part for zero states") {
  EquationParams p(1.5, 2.0, 1.0, 0.5, 0.5, 2, 1);
  CHECK(gronwall_rate(p, 3.0, 0.0, 0.0, 0.0) == doctest::Approx(2.0 + 2.25));
  EquationParams q(1.0, -1.0, 0, 0, 0, 2, 1);
  CHECK(gronwall_rate(q, 3.0, 0.0, 0.0, 0.0) == doctest::Approx(1.0));
}

}
