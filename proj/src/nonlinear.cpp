#include "hnls/nonlinear.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace hnls {

namespace {

ComplexField power_times(const ComplexField& v, double p, const ComplexField& w) {
  ComplexField r(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) r[j] = std::pow(std::abs(v[j]), p) * w[j];
  return r;
}

}  // namespace

NonlinearSources nonlinear_rhs(const SpaceTimeField& v, const EquationParams& prm,
                               const SpaceTimeField& f) {
  NonlinearSources s;
  const GridSpec& g = f.grid;
  if (prm.linear() || v.is_zero_placeholder()) {
    s.f0 = f;
    s.f1 = SpaceTimeField(g, false);
    return s;
  }
  const cplx I{0.0, 1.0};
  const double dx = g.dx();
  s.f0 = SpaceTimeField(g);
  s.f1 = SpaceTimeField(g);
  for (int n = 0; n <= g.Nt; ++n) {
    const ComplexField& vn = v.snapshots[n];
    ComplexField f0 = f.at(n);
    if (prm.lambda != 0.0) f0 -= prm.lambda * power_times(vn, prm.p0, vn);
    if (prm.gamma != 0.0) f0 += I * prm.gamma * power_times(vn, prm.p1, nodal_derivative(vn, dx));
    s.f0.snapshots[n] = f0;
    if (prm.beta + prm.gamma != 0.0)
      s.f1.snapshots[n] = I * (prm.beta + prm.gamma) * power_times(vn, prm.p1, vn);
  }
  return s;
}

ThetaResult theta_map(const SpaceTimeField& v, const ControlProblem& pb, const CgOptions& cg) {
  CrankNicolson cn(pb.params, pb.grid);
  return theta_map(v, pb, cn, cg);
}

ThetaResult theta_map(const SpaceTimeField& v, const ControlProblem& pb, const CrankNicolson& cn,
                      const CgOptions& cg) {
  NonlinearSources src = nonlinear_rhs(v, pb.params, pb.f.is_zero_placeholder()
                                                         ? SpaceTimeField(pb.grid, false)
                                                         : pb.f);
  LinearProblem lp(pb.params, pb.grid);
  lp.u0 = pb.u0;
  lp.uT = pb.uT;
  lp.mu = pb.mu;
  lp.nu = pb.nu;
  lp.f0 = std::move(src.f0);
  lp.f1 = std::move(src.f1);
  LinearControlResult lin = control_linear(lp, cn, cg);
  ThetaResult r;
  r.u = std::move(lin.trajectory);
  r.h = std::move(lin.h);
  r.converged = lin.converged;
  r.terminal_residual = lin.terminal_residual;
  r.gramian = lin.gramian;
  return r;
}

std::string to_string(PicardStatus s) {
  switch (s) {
    case PicardStatus::converged: return "Converged";
    case PicardStatus::divergence: return "Divergence";
    case PicardStatus::ball_escape: return "BallEscape";
    case PicardStatus::max_iter: return "MaxIter";
    case PicardStatus::cg_failure: return "NonConvergence";
  }
  return "Unknown";
}

double radius_from_constant(double C, double p0, double p1) {
  if (!(C > 0.0)) return std::numeric_limits<double>::infinity();
  const double target = 1.0 / (4.0 * C);
  double lo = 0.0, hi = 1.0;
  while (std::pow(hi, p0) + std::pow(hi, p1) < target) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (std::pow(mid, p0) + std::pow(mid, p1) < target ? lo : hi) = mid;
  }
  return lo;
}

double calibrate_contraction_constant(const ControlProblem& pb, const CrankNicolson& cn,
                                      const CgOptions& cg, int samples, std::uint64_t seed,
                                      double amplitude) {
  if (pb.params.linear()) return 0.0;
  const double p0 = pb.params.p0, p1 = pb.params.p1;
  std::mt19937_64 rng(seed);
  double C = 0.0;
  for (int s = 0; s < samples; ++s) {
    SpaceTimeField v1 = random_smooth_field(pb.grid, rng);
    SpaceTimeField v2 = random_smooth_field(pb.grid, rng);
    v1 = v1.scaled(amplitude / x_norm(v1));
    v2 = v2.scaled(amplitude / x_norm(v2));
    ThetaResult t1 = theta_map(v1, pb, cn, cg);
    ThetaResult t2 = theta_map(v2, pb, cn, cg);
    const double n1 = x_norm(v1), n2 = x_norm(v2);
    double lip = x_norm(t1.u - t2.u) /
                 ((std::pow(n1, p0) + std::pow(n2, p0) + std::pow(n1, p1) + std::pow(n2, p1)) *
                  x_norm(v1 - v2));
    double growth = x_norm(t1.u) / (pb.c0 + std::pow(n1, p0 + 1) + std::pow(n1, p1 + 1));
    C = std::max({C, lip, growth});
  }
  return C;
}

double discrete_pde_residual(const SpaceTimeField& u, const TimeSeries& h,
                             const ControlProblem& pb) {
  const GridSpec& g = pb.grid;
  CrankNicolson cn(pb.params, g);
  NonlinearSources src = nonlinear_rhs(u, pb.params, pb.f);
  ForwardInput in(pb.params, g);
  in.mu = pb.mu;
  in.nu = pb.nu;
  in.h = h;
  in.f0 = std::move(src.f0);
  in.f1 = std::move(src.f1);
  const double dt = g.dt(), dx = g.dx();
  double sum = 0.0;
  for (int n = 0; n < g.Nt; ++n) {
    Vec a = interior(u.snapshots[n]), b = interior(u.snapshots[n + 1]);
    Vec r = (b - a) / dt - 0.5 * cn.op().apply(a + b) - step_forcing(cn, in, n);
    sum += dt * dx * r.squaredNorm();
  }
  return std::sqrt(sum);
}

SpaceTimeField solve_nonlinear_forward(const ControlProblem& pb, const ComplexField& u0,
                                       const TimeSeries& h) {
  const GridSpec& g = pb.grid;
  const EquationParams& prm = pb.params;
  CrankNicolson cn(prm, g);
  const double dx = g.dx(), dt = g.dt();
  const cplx I{0.0, 1.0};
  auto nodal_sources = [&](const ComplexField& v, int n, ComplexField& f0, ComplexField& f1) {
    f0 = pb.f.at(n);
    f1 = ComplexField::Zero(v.size());
    if (prm.lambda != 0.0) f0 -= prm.lambda * power_times(v, prm.p0, v);
    if (prm.gamma != 0.0) f0 += I * prm.gamma * power_times(v, prm.p1, nodal_derivative(v, dx));
    if (prm.beta + prm.gamma != 0.0) f1 = I * (prm.beta + prm.gamma) * power_times(v, prm.p1, v);
  };

  SpaceTimeField u(g, false);
  u.snapshots.push_back(embed(interior(u0), sample(pb.mu, 0), sample(pb.nu, 0)));
  ComplexField f0a, f1a, f0b, f1b;
  for (int n = 0; n < g.Nt; ++n) {
    const ComplexField& cur = u.snapshots[n];
    nodal_sources(cur, n, f0a, f1a);
    Vec bnd = 0.5 * (cn.op().boundary_vector(sample(pb.mu, n), sample(pb.nu, n), sample(h, n)) +
                     cn.op().boundary_vector(sample(pb.mu, n + 1), sample(pb.nu, n + 1),
                                             sample(h, n + 1)));
    Vec base = cn.explicit_part(interior(cur));
    ComplexField next = cur;
    next[0] = sample(pb.mu, n + 1);
    next[g.Nx + 1] = sample(pb.nu, n + 1);
    bool done = false;
    for (int it = 0; it < 200 && !done; ++it) {
      nodal_sources(next, n + 1, f0b, f1b);
      Vec forcing = bnd + source_forcing(0.5 * (f0a + f0b), 0.5 * (f1a + f1b), g);
      Vec upd = cn.solve(base + dt * forcing);
      double change = (upd - interior(next)).norm();
      next.segment(1, g.Nx) = upd;
      done = change <= 1e-13 * upd.norm() || change == 0.0;
    }
    if (!done) throw NonConvergence("nonlinear step did not converge", 0.0, n);
    u.snapshots.push_back(next);
  }
  return u;
}

ControlSolution picard_solve(const ControlProblem& pb, const PicardConfig& cfg) {
  if (!(cfg.fp_tol > 0.0)) throw ConfigError("picard: fp_tol must be positive");
  if (!(cfg.under_relaxation > 0.0 && cfg.under_relaxation <= 1.0))
    throw ConfigError("picard: under_relaxation must lie in (0,1]");
  if (cfg.max_iter < 1) throw ConfigError("picard: max_iter must be >= 1");

  CrankNicolson cn(pb.params, pb.grid);
  ControlSolution sol;
  if (cfg.r) {
    if (!(*cfg.r > 0.0)) throw ConfigError("picard: radius must be positive");
    sol.radius = *cfg.r;
  } else {
    sol.contraction_constant = calibrate_contraction_constant(pb, cn, cfg.cg,
                                                              cfg.calibration_samples, cfg.seed);
    sol.radius = radius_from_constant(sol.contraction_constant, pb.params.p0, pb.params.p1);
  }
  const double omega = cfg.under_relaxation;
  const double tiny = std::numeric_limits<double>::min();

  SpaceTimeField v(pb.grid);
  TimeSeries h = zero_series(pb.grid);
  if (!cfg.start_from_zero) {
    ThetaResult t0 = theta_map(SpaceTimeField(pb.grid, false), pb, cn, cfg.cg);
    if (!t0.converged) {
      sol.status = PicardStatus::cg_failure;
      return sol;
    }
    v = std::move(t0.u);
    h = std::move(t0.h);
  }
  sol.iterate_norms.push_back(x_norm(v));

  auto finish = [&](PicardStatus st) {
    sol.status = st;
    sol.u = v;
    sol.h = h;
    return sol;
  };
  if (sol.iterate_norms.back() > sol.radius) return finish(PicardStatus::ball_escape);

  int growth = 0;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    ThetaResult t = theta_map(v, pb, cn, cfg.cg);
    sol.iterations = k;
    if (!t.converged) return finish(PicardStatus::cg_failure);
    SpaceTimeField next = omega == 1.0 ? std::move(t.u) : v.scaled(1.0 - omega) + t.u.scaled(omega);
    h = omega == 1.0 ? t.h : TimeSeries((1.0 - omega) * h + omega * t.h);
    double step = x_norm(next - v);
    if (!sol.step_norms.empty()) {
      double prev = sol.step_norms.back();
      sol.contraction_ratios.push_back(prev > 0.0 ? step / prev : 0.0);
      growth = step > prev ? growth + 1 : 0;
    }
    sol.step_norms.push_back(step);
    v = std::move(next);
    double nv = x_norm(v);
    sol.iterate_norms.push_back(nv);
    if (!std::isfinite(nv) || growth >= 3) return finish(PicardStatus::divergence);
    if (nv > sol.radius) return finish(PicardStatus::ball_escape);
    if (step <= cfg.fp_tol * std::max(nv, tiny)) break;
    if (k == cfg.max_iter) return finish(PicardStatus::max_iter);
  }

  // Certification of the fixed point.
  finish(PicardStatus::converged);
  ThetaResult check = theta_map(v, pb, cn, cfg.cg);
  const double nu = x_norm(v);
  sol.certificate = nu > 0.0 ? x_norm(check.u - v) / nu : x_norm(check.u);
  sol.pde_residual = discrete_pde_residual(v, h, pb);
  double defect = l2_norm(pb.uT - solve_forward([&] {
                            ForwardInput in(pb.params, pb.grid);
                            in.u0 = pb.u0;
                            in.mu = pb.mu;
                            in.nu = pb.nu;
                            return in;
                          }()).u.snapshots.back(),
                          pb.grid);
  sol.terminal_residual = terminal_residual(v.snapshots.back(), pb.uT, defect, pb.grid);
  double data_scale = std::max(pb.c0, tiny);
  sol.verified = sol.certificate <= 2.0 * cfg.fp_tol && sol.pde_residual <= cfg.pde_tol * data_scale &&
                 sol.terminal_residual <= cfg.terminal_tol;
  return sol;
}

SmallnessTable smallness_scan(const ControlProblem& tmpl, const std::vector<double>& scales,
                              const PicardConfig& cfg) {
  for (size_t i = 0; i < scales.size(); ++i) {
    if (scales[i] < 0.0) throw ConfigError("smallness_scan: scales must be non-negative");
    if (i > 0 && scales[i] < scales[i - 1]) throw ConfigError("smallness_scan: scales must be sorted");
  }
  SmallnessTable table;
  for (double s : scales) {
    ControlSolution sol = picard_solve(tmpl.scaled(s), cfg);
    SmallnessRow row{s, sol.status == PicardStatus::converged, sol.status, sol.iterations,
                     sol.terminal_residual};
    if (row.converged) table.delta_hat = std::max(table.delta_hat, s);
    table.rows.push_back(row);
  }
  return table;
}

double gronwall_rate(const EquationParams& p, double R, double sup_u, double sup_v,
                     double sup_vx) {
  const double M = std::max(sup_u, sup_v);
  const double c1 = std::abs(p.beta + p.gamma) * (p.p1 + 1.0);
  const double g = std::abs(p.gamma);
  const double m1 = std::pow(M, p.p1);
  double w = std::max(p.b, 0.0) + p.a * p.a;
  w += 2.0 * std::abs(p.lambda) * (p.p0 + 1.0) * std::pow(M, p.p0) * (1.0 + R);
  w += std::pow(c1 * m1 * (1.0 + R), 2) + 2.0 * c1 * m1;
  w += std::pow(g * (1.0 + R) * m1, 2);
  w += 2.0 * g * (1.0 + R) * p.p1 * std::pow(M, p.p1 - 1.0) * sup_vx;
  return w;
}

GronwallReport uniqueness_check(const ControlProblem& pb, const SpaceTimeField& u1,
                                const SpaceTimeField& u2, double tol) {
  if (!(u1.grid == pb.grid) || !(u2.grid == pb.grid))
    throw ConfigError("uniqueness_check: solutions live on a different grid");
  const GridSpec& g = pb.grid;
  GronwallReport rep;
  rep.holds = true;
  double integral = 0.0, prev_rate = 0.0;
  for (int n = 0; n <= g.Nt; ++n) {
    const ComplexField& a = u1.snapshots[n];
    const ComplexField& b = u2.snapshots[n];
    double E = std::pow(l2_norm(a - b, g, Weight::affine), 2);
    double rate = gronwall_rate(pb.params, g.R, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(),
                                nodal_derivative(b, g.dx()).cwiseAbs().maxCoeff());
    if (n > 0) integral += 0.5 * g.dt() * (prev_rate + rate);
    prev_rate = rate;
    rep.weighted_energy.push_back(E);
    rep.max_difference = std::max(rep.max_difference, std::sqrt(E));
    double bound = rep.weighted_energy[0] * std::exp(integral);
    rep.bound.push_back(bound);
    if (E > bound * (1.0 + 1e-10) + tol * tol) rep.holds = false;
  }
  rep.initial_difference = std::sqrt(rep.weighted_energy[0]);
  return rep;
}

}  // namespace hnls
