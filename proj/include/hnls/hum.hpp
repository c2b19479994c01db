#pragma once

#include "hnls/adjoint.hpp"

namespace hnls {

struct GramianReport {
  double hermitian_defect = 0.0;
  double min_eig = 0.0;
  double max_eig = 0.0;
  int cg_iterations = 0;
  double cg_residual = 0.0;
};

struct CgOptions {
  double tol = 1e-10;
  int max_iter = 500;
  // Shift for B + eps I.
  double tikhonov = 0.0;
  // Full reorthogonalization of the residuals against the Krylov basis.
  bool reorthogonalize = true;
};

struct CgResult {
  ComplexField phi;
  GramianReport report;
  bool converged = false;
};

// B = S_0T o Lambda on interior states; boundary entries of the result are 0.
ComplexField apply_B(const CrankNicolson& cn, const ComplexField& phi0);

// Conjugate gradients on B (+ eps I). The reported residual is the true
// relative residual ||B phi - target|| / ||target|| of the returned iterate,
// which is the best one seen.
CgResult cg_solve_B(const CrankNicolson& cn, const ComplexField& target, const CgOptions& options);

// Throws NonConvergence when the tolerance is not met.
std::pair<ComplexField, GramianReport> solve_B(const CrankNicolson& cn, const ComplexField& target,
                                               const CgOptions& options);

struct DenseGramian {
  Mat matrix;
  Eigen::VectorXd eigenvalues;
  GramianReport report;
};

DenseGramian assemble_gramian_dense(const EquationParams& params, const GridSpec& grid);

struct LinearProblem {
  EquationParams params;
  GridSpec grid;
  ComplexField u0, uT;
  TimeSeries mu, nu;
  SpaceTimeField f0, f1;

  LinearProblem() = default;
  LinearProblem(const EquationParams& p, const GridSpec& g);
};

struct LinearControlResult {
  TimeSeries h;
  SpaceTimeField trajectory;
  double terminal_residual = 0.0;
  double defect_norm = 0.0;
  bool converged = false;
  GramianReport gramian;
  std::vector<std::string> warnings;
};

// ||u(T) - uT|| / max(||uT||, ||defect||); absolute when both vanish.
double terminal_residual(const ComplexField& uT_reached, const ComplexField& uT,
                         double defect_norm, const GridSpec& grid);

LinearControlResult control_linear(const LinearProblem& problem, const CgOptions& options = {});
LinearControlResult control_linear(const LinearProblem& problem, const CrankNicolson& cn,
                                   const CgOptions& options);

// Two controls steering u0=0 to uT=0: h = 0, and a nonzero pulse on the
// first half followed by the HUM control that removes its effect.
struct NonUniquenessReport {
  double residual_zero_control = 0.0;
  double residual_pulse_control = 0.0;
  double norm_zero_control = 0.0;
  double norm_pulse_control = 0.0;
  double norm_difference = 0.0;
  TimeSeries pulse_first_half, hum_second_half;
  bool converged = false;
};

NonUniquenessReport two_control_construction(const EquationParams& params, const GridSpec& grid,
                                             double amplitude, const CgOptions& options);

}  // namespace hnls
