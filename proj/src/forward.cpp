#include "hnls/forward.hpp"

#include <cmath>

#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace hnls {

ForwardInput::ForwardInput(const EquationParams& p, const GridSpec& g)
    : grid(g), params(p), u0(zero_field(g)), f0(g, false), f1(g, false) {}

CrankNicolson::CrankNicolson(const EquationParams& params, const GridSpec& grid)
    : op_(build_operator(params, grid)) {
  const int n = grid.Nx, kl = 2, ku = 2;
  ldab_ = 2 * kl + ku + 1;
  band_.assign(static_cast<size_t>(ldab_) * n, cplx{});
  pivots_.assign(n, 0);
  const double half = 0.5 * grid.dt();
  // Column-major band storage: A(i,j) -> band[kl+ku+i-j + j*ldab].
  for (int i = 0; i < n; ++i)
    for (int k = 0; k <= 4; ++k) {
      int j = i + k - 2;
      if (j < 0 || j >= n) continue;
      cplx v = -half * op_.diag[k][i];
      if (i == j) v += 1.0;
      band_[kl + ku + i - j + static_cast<size_t>(j) * ldab_] = v;
    }
  int info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku, band_.data(), ldab_, pivots_.data());
  if (info != 0) throw SingularStep("Crank-Nicolson matrix is singular", 0);
}

Vec CrankNicolson::explicit_part(const Vec& u) const {
  return u + 0.5 * grid().dt() * op_.apply(u);
}

Vec CrankNicolson::solve(const Vec& r) const {
  Vec x = r;
  const int n = grid().Nx;
  int info = LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', n, 2, 2, 1, band_.data(), ldab_,
                            pivots_.data(), x.data(), n);
  if (info != 0) throw SingularStep("banded solve failed", 0);
  return x;
}

Vec CrankNicolson::solve_adjoint(const Vec& z) const {
  Vec x = z;
  const int n = grid().Nx;
  int info = LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'C', n, 2, 2, 1, band_.data(), ldab_,
                            pivots_.data(), x.data(), n);
  if (info != 0) throw SingularStep("banded adjoint solve failed", 0);
  return x;
}

Vec CrankNicolson::explicit_adjoint(const Vec& y) const {
  const int n = grid().Nx;
  const double half = 0.5 * grid().dt();
  Vec r = y;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k <= 4; ++k) {
      int j = i + k - 2;
      if (j >= 0 && j < n) r[j] += half * std::conj(op_.diag[k][i]) * y[i];
    }
  return r;
}

Vec CrankNicolson::advance(const Vec& u, const Vec& forcing) const {
  return solve(explicit_part(u) + grid().dt() * forcing);
}

Vec source_forcing(const ComplexField& f0, const ComplexField& f1, const GridSpec& grid) {
  const int n = grid.Nx;
  const double dx = grid.dx();
  const cplx I{0.0, 1.0};
  Vec r(n);
  for (int j = 1; j <= n; ++j) r[j - 1] = -I * f0[j] + I * (f1[j + 1] - f1[j - 1]) / (2 * dx);
  return r;
}

Vec step_forcing(const CrankNicolson& cn, const ForwardInput& in, int n) {
  const auto& op = cn.op();
  Vec g = 0.5 * (op.boundary_vector(sample(in.mu, n), sample(in.nu, n), sample(in.h, n)) +
                 op.boundary_vector(sample(in.mu, n + 1), sample(in.nu, n + 1),
                                    sample(in.h, n + 1)));
  if (!in.f0.is_zero_placeholder() || !in.f1.is_zero_placeholder()) {
    ComplexField f0 = 0.5 * (in.f0.at(n) + in.f0.at(n + 1));
    ComplexField f1 = 0.5 * (in.f1.at(n) + in.f1.at(n + 1));
    g += source_forcing(f0, f1, cn.grid());
  }
  return g;
}

cplx left_trace(const ComplexField& u, double dx) {
  return (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx);
}

ForwardOutput solve_forward(const ForwardInput& input) {
  CrankNicolson cn(input.params, input.grid);
  return solve_forward(input, cn);
}

ForwardOutput solve_forward(const ForwardInput& input, const CrankNicolson& cn) {
  const GridSpec& g = input.grid;
  if (!(cn.grid() == g)) throw ConfigError("solve_forward: stepper grid mismatch");
  if (input.u0.size() != g.nodes()) throw ConfigError("solve_forward: u0 length mismatch");
  for (const TimeSeries* s : {&input.mu, &input.nu, &input.h})
    if (s->size() != 0 && s->size() != g.Nt + 1)
      throw ConfigError("solve_forward: time series length mismatch");

  ForwardOutput out;
  out.input = std::make_shared<const ForwardInput>(input);
  const double tol = 1e-10 * std::max(1.0, input.u0.cwiseAbs().maxCoeff());
  if (std::abs(input.u0[0] - sample(input.mu, 0)) > tol ||
      std::abs(input.u0[g.Nx + 1] - sample(input.nu, 0)) > tol)
    out.warnings.emplace_back("u0 boundary values differ from mu(0), nu(0)");

  out.u = SpaceTimeField(g, false);
  out.u.snapshots.reserve(g.Nt + 1);
  out.theta = zero_series(g);
  const double dx = g.dx();

  Vec u = interior(input.u0);
  out.u.snapshots.push_back(embed(u, sample(input.mu, 0), sample(input.nu, 0)));
  out.theta[0] = left_trace(out.u.snapshots[0], dx);
  for (int n = 0; n < g.Nt; ++n) {
    u = cn.advance(u, step_forcing(cn, input, n));
    if (!u.allFinite()) throw SingularStep("non-finite state", n + 1);
    out.u.snapshots.push_back(embed(u, sample(input.mu, n + 1), sample(input.nu, n + 1)));
    out.theta[n + 1] = left_trace(out.u.snapshots[n + 1], dx);
  }
  out.energy_ledger = energy_ledger(out, Weight::unit);
  return out;
}

ComplexField terminal_slice(const ForwardOutput& output) { return output.u.snapshots.back(); }

namespace {

struct SpatialTerms {
  double mass, gradient, drift, dispersion, source0, source1;
};

SpatialTerms spatial_terms(const ComplexField& u, const ComplexField& f0, const ComplexField& f1,
                           const GridSpec& g, Weight weight) {
  const double dx = g.dx();
  const double slope = weight_slope(weight);
  SpatialTerms s{};
  s.mass = l2_norm(u, g, weight);
  s.mass *= s.mass;
  // rho' is constant, so |u|^2 rho' integrates with the unit weight.
  s.drift = slope * std::pow(l2_norm(u, g, Weight::unit), 2);
  s.source0 = (2.0 * inner_product(f0, u, g, weight)).imag();
  double grad = 0.0, disp = 0.0, src1 = 0.0;
  for (int j = 0; j <= g.Nx; ++j) {
    cplx du = (u[j + 1] - u[j]) / dx;
    cplx um = 0.5 * (u[j + 1] + u[j]);
    grad += std::norm(du) * dx;
    disp += (du * std::conj(um)).imag() * dx;
    cplx urho = (u[j + 1] * weight_at(g.x(j + 1), weight) - u[j] * weight_at(g.x(j), weight)) / dx;
    cplx f1m = 0.5 * (f1[j + 1] + f1[j]);
    src1 += (f1m * std::conj(urho)).imag() * dx;
  }
  s.gradient = 3.0 * slope * grad;
  s.dispersion = 2.0 * slope * disp;
  s.source1 = 2.0 * src1;
  return s;
}

}  // namespace

std::vector<EnergyRow> energy_ledger(const ForwardOutput& output, Weight weight) {
  const GridSpec& g = output.u.grid;
  const ForwardInput& in = *output.input;
  const double a = in.params.a, b = in.params.b, dt = g.dt();
  std::vector<EnergyRow> rows;
  rows.reserve(g.Nt + 1);
  SpatialTerms prev{};
  EnergyRow acc;
  double mass0 = 0.0;
  for (int n = 0; n <= g.Nt; ++n) {
    SpatialTerms s = spatial_terms(output.u.snapshots[n], in.f0.at(n), in.f1.at(n), g, weight);
    if (n == 0) {
      mass0 = s.mass;
    } else {
      acc.trace_flux += 0.5 * dt * (std::norm(output.theta[n - 1]) + std::norm(output.theta[n]));
      acc.gradient += 0.5 * dt * (prev.gradient + s.gradient);
      acc.drift += 0.5 * dt * b * (prev.drift + s.drift);
      acc.dispersion += 0.5 * dt * a * (prev.dispersion + s.dispersion);
      acc.source0 += 0.5 * dt * (prev.source0 + s.source0);
      acc.source1 += 0.5 * dt * (prev.source1 + s.source1);
    }
    EnergyRow row = acc;
    row.t = g.t(n);
    row.mass = s.mass;
    row.imbalance = s.mass - mass0 + acc.trace_flux + acc.gradient - acc.drift - acc.dispersion -
                    acc.source0 - acc.source1;
    rows.push_back(row);
    prev = s;
  }
  return rows;
}

double check_energy_identity(const ForwardOutput& output, Weight weight) {
  double worst = 0.0;
  for (const auto& row : energy_ledger(output, weight))
    worst = std::max(worst, std::abs(row.imbalance));
  return worst;
}

}  // namespace hnls
