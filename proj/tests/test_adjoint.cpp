#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hnls/adjoint.hpp"
#include "hnls/presets.hpp"

using namespace hnls;

namespace {

EquationParams coeffs(double a, double b) { return EquationParams(a, b, 0, 0, 0, 2, 1); }

cplx draw(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  double re = nd(rng);
  return {re, nd(rng)};
}

}  // namespace

TEST_SUITE("adjoint") {

TEST_CASE("trace of the homogeneous problem") {
  GridSpec g(3.0, 1.0, 48, 96);
  CrankNicolson cn(coeffs(1, 1), g);
  CHECK(trace_P(cn, zero_field(g)).cwiseAbs().maxCoeff() == 0.0);
  ComplexField u0 = gaussian_bump(g, 1.0, 0.3, cplx(1.0, 0.5));
  u0[0] = u0[g.Nx + 1] = 0.0;
  TimeSeries P = trace_P(cn, u0);
  ForwardInput in(coeffs(1, 1), g);
  in.u0 = u0;
  CHECK((P - solve_forward(in).theta).norm() <= 1e-14 * P.norm());
  CHECK(series_norm(P, g) <= l2_norm(u0, g) + 1e-6);
}

TEST_CASE("lambda matches a brute-force adjoint") {
  // Lambda phi(t_n) = conj(<S e_n, phi>) / w_n with e_n the n-th unit series.
  GridSpec g(2.5, 0.7, 12, 12);
  CrankNicolson cn(coeffs(0.8, 1.2), g);
  std::mt19937_64 rng(4);
  ComplexField phi = zero_field(g);
  for (int j = 1; j <= g.Nx; ++j) phi[j] = draw(rng);
  TimeSeries lam = lambda_op(cn, phi);
  for (int n = 0; n <= g.Nt; ++n) {
    TimeSeries e = TimeSeries::Zero(g.Nt + 1);
    e[n] = 1.0;
    double w = (n == 0 || n == g.Nt) ? g.dt() / 2 : g.dt();
    cplx oracle = std::conj(inner_product(embed(control_to_state(cn, e), 0, 0), phi, g)) / w;
    CHECK(std::abs(lam[n] - oracle) <= 1e-12 * std::max(1.0, std::abs(oracle)));
  }
}

TEST_CASE("lambda bounds") {
  GridSpec g(3.0, 1.0, 48, 96);
  CrankNicolson cn(coeffs(0, 1), g);
  CHECK(lambda_op(cn, zero_field(g)).cwiseAbs().maxCoeff() == 0.0);
  std::mt19937_64 rng(2);
  for (int s = 0; s < 5; ++s) {
    ComplexField phi = gaussian_bump(g, 0.5 + 0.4 * s, 0.3, draw(rng));
    phi[0] = phi[g.Nx + 1] = 0.0;
    CHECK(series_norm(lambda_op(cn, phi), g) <= l2_norm(phi, g) + 1e-6);
  }
}

TEST_CASE("adjoint-defined lambda approaches the reflected trace") {
  std::vector<double> gaps;
  for (int Nx : {32, 64, 128}) {
    GridSpec g(3.0, 1.0, Nx, 4 * Nx);
    CrankNicolson cn(coeffs(1, 1), g);
    ComplexField phi = gaussian_bump(g, 1.5, 0.4, cplx(1.0, 0.5));
    gaps.push_back(series_norm(lambda_op(cn, phi) - lambda_via_reflection(cn, phi), g));
  }
  CHECK(gaps[1] < gaps[0]);
  CHECK(gaps[2] < gaps[1]);
  CHECK(gaps[2] < 0.1);
}

TEST_CASE("duality residual") {
  GridSpec g(3.0, 1.0, 64, 128);
  CrankNicolson cn(coeffs(1, 1), g);
  std::mt19937_64 rng(77);
  ComplexField phi = zero_field(g);
  for (int j = 1; j <= g.Nx; ++j) phi[j] = draw(rng);
  CHECK(check_duality(cn, TimeSeries::Zero(g.Nt + 1), phi) == 0.0);
  for (int s = 0; s < 10; ++s) {
    TimeSeries h(g.Nt + 1);
    for (auto& v : h) v = draw(rng);
    for (int j = 1; j <= g.Nx; ++j) phi[j] = draw(rng);
    double r = check_duality(cn, h, phi);
    CHECK(r <= 1e-12);
    double r2 = check_duality(cn, cplx(3.0, -1.0) * h, cplx(0.0, 7.0) * phi);
    CHECK(std::abs(r2 - r) <= 1e-12);
  }
}

TEST_CASE("observability constant is grid stable away from critical lengths") {
  EquationParams p = coeffs(0, 1);
  double r1 = observability_scan(p, GridSpec(3.0, 1.0, 32, 64)).ratio;
  double r2 = observability_scan(p, GridSpec(3.0, 1.0, 64, 128)).ratio;
  CHECK(std::isfinite(r1));
  CHECK(std::abs(r2 - r1) / r1 < 0.2);
  ObservabilityOptions none;
  none.samples = 0;
  CHECK_THROWS_AS(observability_scan(p, GridSpec(3.0, 1.0, 32, 64), none), ConfigError);
}

TEST_CASE("observability constant at a critical length grows under refinement") {
  EquationParams p = coeffs(0, 1);
  const double R = 2 * std::numbers::pi;
  double c1 = observability_scan(p, GridSpec(R, 1.0, 32, 64)).ratio;
  double c2 = observability_scan(p, GridSpec(R, 1.0, 64, 128)).ratio;
  double c3 = observability_scan(p, GridSpec(R, 1.0, 128, 256)).ratio;
  CHECK(c2 > c1);
  CHECK(c3 > c2);
  CHECK(c3 >= 10 * c1);
}

}
