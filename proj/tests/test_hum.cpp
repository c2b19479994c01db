#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hnls/adjoint.hpp"
#include "hnls/hum.hpp"
#include "hnls/presets.hpp"

using namespace hnls;

namespace {

EquationParams coeffs(double a, double b) { return EquationParams(a, b, 0, 0, 0, 2, 1); }

ComplexField random_interior(const GridSpec& g, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  ComplexField v = zero_field(g);
  for (int j = 1; j <= g.Nx; ++j) {
    double re = nd(rng);
    v[j] = cplx(re, nd(rng));
  }
  return v;
}

ComplexField clamped_bump(const GridSpec& g, double c, double w, cplx amp) {
  ComplexField f = gaussian_bump(g, c, w, amp);
  f[0] = f[g.Nx + 1] = 0.0;
  return f;
}

}  // namespace

TEST_SUITE("hum") {

TEST_CASE("gramian action: zero, symmetry, positivity") {
  GridSpec g(3.0, 1.0, 32, 128);
  CrankNicolson cn(coeffs(1, 1), g);
  CHECK(apply_B(cn, zero_field(g)).cwiseAbs().maxCoeff() == 0.0);
  std::mt19937_64 rng(21);
  for (int s = 0; s < 5; ++s) {
    ComplexField phi = random_interior(g, rng), psi = random_interior(g, rng);
    cplx lhs = inner_product(apply_B(cn, phi), psi, g);
    cplx rhs = inner_product(phi, apply_B(cn, psi), g);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
    cplx q = inner_product(apply_B(cn, phi), phi, g);
    double lam = std::pow(series_norm(lambda_op(cn, phi), g), 2);
    CHECK(std::abs(q.imag()) <= 1e-12 * lam);
    CHECK(std::abs(q.real() - lam) <= 1e-12 * lam);
  }
}

TEST_CASE("solve_B round trip") {
  GridSpec g(3.0, 1.0, 24, 192);
  CrankNicolson cn(coeffs(0, 1), g);
  CgOptions o;
  o.tol = 1e-9;
  auto [zero, rep0] = solve_B(cn, zero_field(g), o);
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);
  CHECK(rep0.cg_iterations == 0);

  ComplexField target = clamped_bump(g, 1.5, 0.3, 1.0);
  auto [phi, rep] = solve_B(cn, target, o);
  ComplexField back = apply_B(cn, phi);
  CHECK(l2_norm(back - target, g) <= o.tol * l2_norm(target, g));
  CHECK(rep.cg_residual <= o.tol);
  CHECK_THROWS_AS(cg_solve_B(cn, target, CgOptions{0.0}), ConfigError);
}

TEST_CASE("non-convergence is reported") {
  GridSpec g(3.0, 1.0, 32, 128);
  CrankNicolson cn(coeffs(0, 1), g);
  CgOptions o;
  o.tol = 1e-14;
  o.max_iter = 2;
  CHECK_THROWS_AS(solve_B(cn, clamped_bump(g, 1.5, 0.3, 1.0), o), NonConvergence);
}

TEST_CASE("dense gramian structure") {
  EquationParams p = coeffs(0, 1);
  DenseGramian regular = assemble_gramian_dense(p, GridSpec(3.0, 1.0, 16, 256));
  CHECK(regular.report.hermitian_defect <= 1e-12);
  CHECK(regular.report.min_eig > 0.0);
  DenseGramian r5 = assemble_gramian_dense(p, GridSpec(5.0, 1.0, 16, 256));
  DenseGramian crit = assemble_gramian_dense(p, GridSpec(2 * std::numbers::pi, 1.0, 16, 256));
  CHECK(r5.report.min_eig > 0.0);
  CHECK(crit.report.min_eig <= 1e-3 * r5.report.min_eig);
  CHECK_THROWS_AS(assemble_gramian_dense(p, GridSpec(3.0, 1.0, 129, 16)), ConfigError);
}

TEST_CASE("CG effort grows at a critical length") {
  EquationParams p = coeffs(0, 1);
  auto iterations = [&](double R) {
    GridSpec g(R, 1.0, 64, 512);
    CrankNicolson cn(p, g);
    CgOptions o;
    o.tol = 1e-6;
    return cg_solve_B(cn, clamped_bump(g, R / 2, R / 10, 1.0), o).report.cg_iterations;
  };
  CHECK(iterations(2 * std::numbers::pi) >= 5 * iterations(5.0));
}

TEST_CASE("control of a reachable target is zero") {
  GridSpec g(3.0, 1.0, 24, 192);
  EquationParams p = coeffs(1, 1);
  LinearProblem lp(p, g);
  lp.u0 = clamped_bump(g, 1.2, 0.3, 1.0);
  ForwardInput in(p, g);
  in.u0 = lp.u0;
  lp.uT = terminal_slice(solve_forward(in));
  LinearControlResult r = control_linear(lp);
  CHECK(r.converged);
  CHECK(r.h.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("linear control reaches a bump target") {
  GridSpec g(3.0, 0.5, 64, 256);
  LinearProblem lp(coeffs(0, 1), g);
  lp.uT = gaussian_bump(g, 1.5, 0.3, 1.0);
  CgOptions o;
  o.tol = 1e-10;
  LinearControlResult r = control_linear(lp, o);
  CHECK(r.converged);
  CHECK(r.terminal_residual <= 1e-8);
  // Independent re-simulation with the returned control.
  ForwardInput in(coeffs(0, 1), g);
  in.h = r.h;
  ComplexField reached = terminal_slice(solve_forward(in));
  CHECK(l2_norm(reached - lp.uT, g) <= 1e-8 * l2_norm(lp.uT, g));
}

TEST_CASE("control is linear in the data") {
  GridSpec g(3.0, 1.0, 24, 192);
  EquationParams p = coeffs(1, 1);
  CgOptions o;
  o.tol = 1e-12;
  LinearProblem both(p, g), first(p, g), second(p, g);
  both.u0 = first.u0 = clamped_bump(g, 1.0, 0.3, 1.0);
  both.uT = second.uT = clamped_bump(g, 2.0, 0.3, cplx(0.0, 1.0));
  TimeSeries h = control_linear(both, o).h;
  TimeSeries h1 = control_linear(first, o).h, h2 = control_linear(second, o).h;
  CHECK(series_norm(h - h1 - h2, g) <= 1e-10 * series_norm(h, g));
}

TEST_CASE("critical length warns") {
  GridSpec g(2 * std::numbers::pi, 1.0, 16, 64);
  LinearProblem lp(coeffs(0, 1), g);
  lp.uT = clamped_bump(g, 3.0, 0.5, 1.0);
  CgOptions o;
  o.tikhonov = 1e-6;
  LinearControlResult r = control_linear(lp, o);
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("two different controls reach the same terminal state") {
  CgOptions o;
  o.tol = 1e-10;
  NonUniquenessReport r = two_control_construction(coeffs(0, 1), GridSpec(3.0, 1.0, 32, 256), 1.0, o);
  CHECK(r.converged);
  CHECK(r.residual_zero_control <= 1e-8);
  CHECK(r.residual_pulse_control <= 1e-8);
  CHECK(r.norm_zero_control == 0.0);
  CHECK(r.norm_difference >= 0.1 * std::max(r.norm_zero_control, r.norm_pulse_control));
  CHECK(r.norm_pulse_control > 0.1);
  CHECK_THROWS_AS(two_control_construction(coeffs(0, 1), GridSpec(3.0, 1.0, 32, 255), 1.0, o),
                  ConfigError);
}

}
