#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hnls/analysis.hpp"
#include "hnls/hum.hpp"
#include "hnls/problem.hpp"

namespace hnls {

struct NonlinearSources {
  SpaceTimeField f0, f1;
};

// f0 = f - lambda |v|^p0 v + i gamma |v|^p1 v_x,  f1 = i (beta + gamma) |v|^p1 v.
NonlinearSources nonlinear_rhs(const SpaceTimeField& v, const EquationParams& params,
                               const SpaceTimeField& f);

struct ThetaResult {
  SpaceTimeField u;
  TimeSeries h;
  bool converged = false;
  double terminal_residual = 0.0;
  GramianReport gramian;
};

// Linear HUM control with the nonlinearity frozen at v.
ThetaResult theta_map(const SpaceTimeField& v, const ControlProblem& problem,
                      const CrankNicolson& cn, const CgOptions& cg = {});
ThetaResult theta_map(const SpaceTimeField& v, const ControlProblem& problem,
                      const CgOptions& cg = {});

enum class PicardStatus { converged, divergence, ball_escape, max_iter, cg_failure };
std::string to_string(PicardStatus s);

struct PicardConfig {
  // Ball radius; calibrated from the contraction constant when unset.
  std::optional<double> r;
  int max_iter = 50;
  double fp_tol = 1e-9;
  double under_relaxation = 1.0;
  // Start from v = 0 instead of the linear-control solution.
  bool start_from_zero = false;
  // Relative to c0.
  double pde_tol = 1e-6;
  double terminal_tol = 1e-6;
  CgOptions cg;
  int calibration_samples = 4;
  std::uint64_t seed = 2024;
};

struct ControlSolution {
  PicardStatus status = PicardStatus::max_iter;
  TimeSeries h;
  SpaceTimeField u;
  int iterations = 0;
  std::vector<double> step_norms;
  std::vector<double> contraction_ratios;
  std::vector<double> iterate_norms;
  double radius = 0.0;
  double contraction_constant = 0.0;
  double terminal_residual = 0.0;
  double pde_residual = 0.0;
  // ||Theta u - u||_X / ||u||_X after convergence.
  double certificate = 0.0;
  // All post-convergence checks passed.
  bool verified = false;
};

ControlSolution picard_solve(const ControlProblem& problem, const PicardConfig& config = {});

// Empirical constant C in
//   ||Theta v1 - Theta v2|| <= C (|v1|^p0 + |v2|^p0 + |v1|^p1 + |v2|^p1) |v1 - v2|
//   ||Theta v||             <= C c0 + C (|v|^{p0+1} + |v|^{p1+1})
// over random smooth fields of X norm `amplitude`.
double calibrate_contraction_constant(const ControlProblem& problem, const CrankNicolson& cn,
                                      const CgOptions& cg, int samples, std::uint64_t seed,
                                      double amplitude = 0.05);
// Positive root of r^p0 + r^p1 = 1 / (4 C).
double radius_from_constant(double C, double p0, double p1);

// L2(Q_T) norm of the Crank-Nicolson residual of the full nonlinear equation
// with nodal nonlinear terms averaged over each step.
double discrete_pde_residual(const SpaceTimeField& u, const TimeSeries& h,
                             const ControlProblem& problem);

// Nonlinear forward solve with prescribed control h (fixed point per step).
SpaceTimeField solve_nonlinear_forward(const ControlProblem& problem, const ComplexField& u0,
                                       const TimeSeries& h);

struct SmallnessRow {
  double scale = 0.0;
  bool converged = false;
  PicardStatus status = PicardStatus::max_iter;
  int iterations = 0;
  double terminal_residual = 0.0;
};

struct SmallnessTable {
  std::vector<SmallnessRow> rows;
  // Largest converging scale; 0 when none converged.
  double delta_hat = 0.0;
};

SmallnessTable smallness_scan(const ControlProblem& problem_template,
                              const std::vector<double>& scales, const PicardConfig& config = {});

struct GronwallReport {
  std::vector<double> weighted_energy;  // int (1+x)|w|^2 at t_n
  std::vector<double> bound;            // E(0) exp(int_0^{t_n} omega)
  double max_difference = 0.0;          // max_n ||w(t_n)||, weighted
  double initial_difference = 0.0;
  bool holds = false;
};

// Pointwise majorant omega(t) of the growth rate of int (1+x)|w|^2 for two
// solutions with the same boundary data and control.
double gronwall_rate(const EquationParams& params, double R, double sup_u, double sup_v,
                     double sup_vx);

GronwallReport uniqueness_check(const ControlProblem& problem, const SpaceTimeField& u1,
                                const SpaceTimeField& u2, double tol = 1e-12);

}  // namespace hnls
