#include "hnls/hum.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "hnls/analysis.hpp"

namespace hnls {

LinearProblem::LinearProblem(const EquationParams& p, const GridSpec& g)
    : params(p), grid(g), u0(zero_field(g)), uT(zero_field(g)), f0(g, false), f1(g, false) {}

ComplexField apply_B(const CrankNicolson& cn, const ComplexField& phi0) {
  return embed(control_to_state(cn, lambda_op(cn, phi0)), 0.0, 0.0);
}

namespace {

cplx dot(const Vec& u, const Vec& v, double dx) { return dx * v.dot(u); }

}  // namespace

CgResult cg_solve_B(const CrankNicolson& cn, const ComplexField& target, const CgOptions& opt) {
  if (!(opt.tol > 0.0)) throw ConfigError("cg: tol must be positive");
  const GridSpec& g = cn.grid();
  const double dx = g.dx();
  const int N = g.Nx;
  auto B = [&](const Vec& p) {
    Vec r = control_to_state(cn, lambda_op(cn, embed(p, 0.0, 0.0)));
    if (opt.tikhonov != 0.0) r += opt.tikhonov * p;
    return r;
  };

  CgResult res;
  const Vec d = interior(target);
  const double n0 = std::sqrt(dot(d, d, dx).real());
  res.phi = zero_field(g);
  if (n0 == 0.0) {
    res.converged = true;
    return res;
  }

  Vec x = Vec::Zero(N), r = d, p = d;
  double rr = dot(r, r, dx).real();
  std::vector<Vec> basis{r / std::sqrt(rr)};
  Vec best = x;
  double best_res = 1.0;
  int it = 0;
  while (it < opt.max_iter) {
    ++it;
    Vec Bp = B(p);
    double curvature = dot(Bp, p, dx).real();
    if (!(curvature > 0.0)) break;
    double alpha = rr / curvature;
    x += alpha * p;
    r -= alpha * Bp;
    if (opt.reorthogonalize)
      for (const Vec& q : basis) r -= dot(r, q, dx) * q;

    Vec true_r = d - B(x);
    double tr = std::sqrt(dot(true_r, true_r, dx).real()) / n0;
    if (tr < best_res) {
      best_res = tr;
      best = x;
    }
    if (tr <= opt.tol) break;

    double rn = dot(r, r, dx).real();
    // The recurrence has converged but rounding keeps the true residual away.
    if (!(rn > 0.0) || std::sqrt(rn) <= 1e-3 * opt.tol * n0) break;
    if (opt.reorthogonalize) {
      if (static_cast<int>(basis.size()) >= N) break;
      basis.push_back(r / std::sqrt(rn));
    }
    p = r + (rn / rr) * p;
    rr = rn;
  }
  res.phi = embed(best, 0.0, 0.0);
  res.report.cg_iterations = it;
  res.report.cg_residual = best_res;
  res.converged = best_res <= opt.tol;
  return res;
}

std::pair<ComplexField, GramianReport> solve_B(const CrankNicolson& cn, const ComplexField& target,
                                               const CgOptions& options) {
  CgResult r = cg_solve_B(cn, target, options);
  if (!r.converged)
    throw NonConvergence("conjugate gradients did not reach the tolerance", r.report.cg_residual,
                         r.report.cg_iterations);
  return {r.phi, r.report};
}

DenseGramian assemble_gramian_dense(const EquationParams& params, const GridSpec& grid) {
  if (grid.Nx > 128) throw ConfigError("assemble_gramian_dense: Nx > 128");
  CrankNicolson cn(params, grid);
  const int N = grid.Nx;
  DenseGramian out;
  out.matrix.resize(N, N);
  for (int j = 0; j < N; ++j) {
    Vec e = Vec::Zero(N);
    e[j] = 1.0;
    out.matrix.col(j) = control_to_state(cn, lambda_op(cn, embed(e, 0.0, 0.0)));
  }
  const Mat& B = out.matrix;
  out.report.hermitian_defect = (B - B.adjoint()).norm() / B.norm();
  Eigen::SelfAdjointEigenSolver<Mat> es((B + B.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
  out.eigenvalues = es.eigenvalues();
  out.report.min_eig = out.eigenvalues.minCoeff();
  out.report.max_eig = out.eigenvalues.maxCoeff();
  return out;
}

double terminal_residual(const ComplexField& reached, const ComplexField& uT, double defect_norm,
                         const GridSpec& grid) {
  double err = l2_norm(reached - uT, grid);
  double scale = std::max(l2_norm(uT, grid), defect_norm);
  return scale > 0.0 ? err / scale : err;
}

LinearControlResult control_linear(const LinearProblem& problem, const CgOptions& options) {
  CrankNicolson cn(problem.params, problem.grid);
  return control_linear(problem, cn, options);
}

LinearControlResult control_linear(const LinearProblem& pb, const CrankNicolson& cn,
                                   const CgOptions& options) {
  LinearControlResult out;
  if (auto v = is_critical_length(pb.grid.R, pb.params.a, pb.params.b, 1e-6); v.is_critical)
    out.warnings.emplace_back("interval length is critical; the Gramian is degenerate");

  ForwardInput in(pb.params, pb.grid);
  in.u0 = pb.u0;
  in.mu = pb.mu;
  in.nu = pb.nu;
  in.f0 = pb.f0;
  in.f1 = pb.f1;
  ForwardOutput free_run = solve_forward(in, cn);
  ComplexField defect = pb.uT - terminal_slice(free_run);
  out.defect_norm = l2_norm(defect, pb.grid);

  CgResult cg = cg_solve_B(cn, embed(interior(defect), 0.0, 0.0), options);
  out.gramian = cg.report;
  out.converged = cg.converged;
  if (!cg.converged) out.warnings.emplace_back("conjugate gradients did not reach the tolerance");

  out.h = lambda_op(cn, cg.phi);
  in.h = out.h;
  ForwardOutput run = solve_forward(in, cn);
  out.trajectory = std::move(run.u);
  out.terminal_residual =
      terminal_residual(out.trajectory.snapshots.back(), pb.uT, out.defect_norm, pb.grid);
  return out;
}

NonUniquenessReport two_control_construction(const EquationParams& params, const GridSpec& grid,
                                             double amplitude, const CgOptions& options) {
  if (grid.Nt % 2 != 0) throw ConfigError("two_control_construction: Nt must be even");
  GridSpec half(grid.R, grid.T / 2, grid.Nx, grid.Nt / 2);
  CrankNicolson cn(params, half);
  NonUniquenessReport rep;

  // Control 1: h = 0 keeps u = 0, so the terminal state is reached exactly.
  ForwardInput zero_in(params, grid);
  ForwardOutput zero_run = solve_forward(zero_in);
  rep.residual_zero_control =
      terminal_residual(terminal_slice(zero_run), zero_field(grid), 0.0, grid);
  rep.norm_zero_control = 0.0;

  // Control 2: a pulse vanishing at both ends of the first half.
  rep.pulse_first_half = zero_series(half);
  for (int n = 0; n <= half.Nt; ++n) {
    double s = std::sin(std::numbers::pi * half.t(n) / half.T);
    rep.pulse_first_half[n] = amplitude * s * s;
  }
  ForwardInput first(params, half);
  first.h = rep.pulse_first_half;
  ComplexField mid_state = terminal_slice(solve_forward(first, cn));

  LinearProblem second(params, half);
  second.u0 = mid_state;
  LinearControlResult hum = control_linear(second, cn, options);
  rep.hum_second_half = hum.h;
  rep.residual_pulse_control = hum.terminal_residual;
  rep.converged = hum.converged;

  double n1 = series_norm(rep.pulse_first_half, half);
  double n2 = series_norm(rep.hum_second_half, half);
  rep.norm_pulse_control = std::sqrt(n1 * n1 + n2 * n2);
  rep.norm_difference = rep.norm_pulse_control;
  return rep;
}

}  // namespace hnls
