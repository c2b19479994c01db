#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hnls/discretization.hpp"

namespace hnls {

// Empty series/fields stand for zero data.
struct ForwardInput {
  GridSpec grid;
  EquationParams params;
  ComplexField u0;
  TimeSeries mu, nu, h;
  SpaceTimeField f0, f1;

  ForwardInput() = default;
  ForwardInput(const EquationParams& p, const GridSpec& g);
};

// One row per time node of the weighted energy balance. Integrals are
// accumulated from t=0 to t_n.
struct EnergyRow {
  double t = 0.0;
  double mass = 0.0;          // int |u|^2 rho
  double trace_flux = 0.0;    // int |u_x(.,0)|^2 dt
  double gradient = 0.0;      // 3 iint |u_x|^2 rho'
  double drift = 0.0;         // b iint |u|^2 rho'
  double dispersion = 0.0;    // 2a Im iint u_x conj(u) rho'
  double source0 = 0.0;       // 2 Im iint f0 conj(u) rho
  double source1 = 0.0;       // 2 Im iint f1 (conj(u) rho)_x
  double imbalance = 0.0;
};

struct ForwardOutput {
  SpaceTimeField u;
  TimeSeries theta;
  std::vector<EnergyRow> energy_ledger;
  std::shared_ptr<const ForwardInput> input;
  std::vector<std::string> warnings;
};

// Crank-Nicolson step with a banded LU of (I - dt/2 A).
class CrankNicolson {
 public:
  CrankNicolson(const EquationParams& params, const GridSpec& grid);

  const DiscreteOperator& op() const { return op_; }
  const GridSpec& grid() const { return op_.grid; }
  const EquationParams& params() const { return op_.params; }

  // Solves (I - dt/2 A) u+ = (I + dt/2 A) u + dt forcing.
  Vec advance(const Vec& u, const Vec& forcing) const;
  Vec explicit_part(const Vec& u) const;
  // (I - dt/2 A)^{-1} r
  Vec solve(const Vec& r) const;
  // (I - dt/2 A)^{-H} z
  Vec solve_adjoint(const Vec& z) const;
  // (I + dt/2 A)^H y
  Vec explicit_adjoint(const Vec& y) const;

 private:
  DiscreteOperator op_;
  std::vector<cplx> band_;
  std::vector<int> pivots_;
  int ldab_ = 0;
};

// Interior forcing -i f0 + i d/dx f1 for midpoint samples of the sources.
Vec source_forcing(const ComplexField& f0, const ComplexField& f1, const GridSpec& grid);
// Midpoint-averaged forcing of step n -> n+1 from boundary data and sources.
Vec step_forcing(const CrankNicolson& cn, const ForwardInput& in, int n);

// One-sided 3-point derivative at x=0.
cplx left_trace(const ComplexField& u, double dx);

ForwardOutput solve_forward(const ForwardInput& input);
ForwardOutput solve_forward(const ForwardInput& input, const CrankNicolson& cn);
ComplexField terminal_slice(const ForwardOutput& output);

std::vector<EnergyRow> energy_ledger(const ForwardOutput& output, Weight weight);
double check_energy_identity(const ForwardOutput& output, Weight weight);

}  // namespace hnls
