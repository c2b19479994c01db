#include "hnls/verification.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>

#include "hnls/adjoint.hpp"
#include "hnls/analysis.hpp"
#include "hnls/hum.hpp"
#include "hnls/nonlinear.hpp"
#include "hnls/presets.hpp"

namespace hnls {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kPi = std::numbers::pi;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

EquationParams linear_params(double a, double b) {
  return EquationParams(a, b, 0.0, 0.0, 0.0, 2.0, 1.0);
}

cplx random_complex(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  double re = nd(rng);
  return {re, nd(rng)};
}

CriterionRow duality(std::uint64_t seed) {
  CriterionRow row{1, "duality identity", 0.0, 1e-12, false, {}, 0.0};
  auto t0 = Clock::now();
  GridSpec g(3.0, 1.0, 64, 128);
  CrankNicolson cn(linear_params(1.0, 1.0), g);
  std::mt19937_64 rng(seed);
  for (int s = 0; s < 20; ++s) {
    TimeSeries h(g.Nt + 1);
    for (auto& v : h) v = random_complex(rng);
    ComplexField phi = zero_field(g);
    for (int j = 1; j <= g.Nx; ++j) phi[j] = random_complex(rng);
    row.measured = std::max(row.measured, check_duality(cn, h, phi));
  }
  row.seconds = seconds_since(t0);
  row.pass = row.measured <= row.threshold && row.seconds < 10.0;
  row.detail = "20 pairs, (64,128), limit 10 s";
  return row;
}

CriterionRow contraction(std::uint64_t seed) {
  CriterionRow row{2, "semigroup contraction", -1.0, 1e-8, false, {}, 0.0};
  auto t0 = Clock::now();
  GridSpec g(3.0, 1.0, 64, 128);
  EquationParams p = linear_params(1.0, 1.0);
  CrankNicolson cn(p, g);
  std::mt19937_64 rng(seed);
  for (int s = 0; s < 10; ++s) {
    ForwardInput in(p, g);
    in.u0 = random_smooth_field(g, rng).snapshots[0];
    in.u0[0] = in.u0[g.Nx + 1] = 0.0;
    ForwardOutput out = solve_forward(in, cn);
    const double n0 = l2_norm(in.u0, g);
    double prev = n0;
    for (int n = 1; n <= g.Nt; ++n) {
      double cur = l2_norm(out.u.snapshots[n], g);
      row.measured = std::max(row.measured, (cur - prev) / n0);
      prev = cur;
    }
  }
  row.seconds = seconds_since(t0);
  row.pass = row.measured <= row.threshold && row.seconds < 5.0;
  row.detail = "max step growth / ||u0||, 10 starts, limit 5 s";
  return row;
}

CriterionRow energy(std::uint64_t) {
  CriterionRow row{3, "energy identity convergence", 0.0, 1.5, false, {}, 0.0};
  auto t0 = Clock::now();
  std::vector<double> unit, affine;
  for (int Nx : {32, 64, 128, 256}) {
    ForwardOutput out = solve_forward(standard_energy_input(Nx, Nx));
    unit.push_back(check_energy_identity(out, Weight::unit));
    affine.push_back(check_energy_identity(out, Weight::affine));
  }
  double worst = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < unit.size(); ++i) {
    worst = std::min(worst, unit[i] / unit[i + 1]);
    worst = std::min(worst, affine[i] / affine[i + 1]);
  }
  row.measured = worst;
  row.seconds = seconds_since(t0);
  row.pass = row.measured >= row.threshold;
  row.detail = "min halving ratio, residuals unit " + fmt("%.2e", unit.front()) + ".." +
               fmt("%.2e", unit.back()) + " affine " + fmt("%.2e", affine.front()) + ".." +
               fmt("%.2e", affine.back());
  return row;
}

CriterionRow gramian(std::uint64_t) {
  CriterionRow row{4, "gramian structure", 0.0, 1e-3, false, {}, 0.0};
  auto t0 = Clock::now();
  EquationParams p = linear_params(0.0, 1.0);
  DenseGramian regular = assemble_gramian_dense(p, GridSpec(3.0, 1.0, 16, 256));
  DenseGramian critical = assemble_gramian_dense(p, GridSpec(2 * kPi, 1.0, 16, 256));
  row.measured = critical.report.min_eig / regular.report.min_eig;
  row.seconds = seconds_since(t0);
  row.pass = regular.report.hermitian_defect <= 1e-12 && regular.report.min_eig > 0.0 &&
             row.measured <= row.threshold;
  row.detail = "min eig ratio; defect " + fmt("%.2e", regular.report.hermitian_defect) +
               " min eig R=3 " + fmt("%.3e", regular.report.min_eig) + " R=2pi " +
               fmt("%.3e", critical.report.min_eig);
  return row;
}

CriterionRow linear_control(std::uint64_t) {
  CriterionRow row{5, "linear controllability", 0.0, 1e-8, false, {}, 0.0};
  auto t0 = Clock::now();
  GridSpec g(3.0, 0.5, 64, 256);
  LinearProblem lp(linear_params(0.0, 1.0), g);
  lp.uT = gaussian_bump(g, 1.5, 0.3, 1.0);
  CgOptions cg;
  cg.tol = 1e-10;
  LinearControlResult r = control_linear(lp, cg);
  row.measured = r.terminal_residual;
  row.seconds = seconds_since(t0);
  row.pass = r.converged && row.measured <= row.threshold && row.seconds < 60.0;
  row.detail = "T=0.5, cg " + fmt("%.0f", r.gramian.cg_iterations) + " it, residual " +
               fmt("%.2e", r.gramian.cg_residual) + ", limit 60 s";
  return row;
}

CriterionRow critical_lengths(std::uint64_t seed) {
  CriterionRow row{6, "critical length formula", 0.0, 1.0, false, {}, 0.0};
  auto t0 = Clock::now();
  const double R_max = 10.0, tol = 0.05;
  std::vector<CriticalLength> list = enumerate_critical_lengths(0.0, 1.0, R_max);
  bool exact = list.size() == 2 && list[0].k == 1 && list[0].l == 1 && list[1].k == 1 &&
               list[1].l == 2 && std::abs(list[0].R - 2 * kPi) <= 1e-12 &&
               std::abs(list[1].R - 2 * kPi * std::sqrt(7.0 / 3.0)) <= 1e-12;

  // Brute force over a generous index box, independent of the enumeration bound.
  std::vector<double> brute;
  for (int k = 1; k <= 40; ++k)
    for (int l = 1; l <= 40; ++l) brute.push_back(2 * kPi * std::sqrt((k * k + k * l + l * l) / 3.0));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, R_max);
  int agree = 0;
  const int trials = 1000;
  for (int s = 0; s < trials; ++s) {
    double R = R_max - U(rng);
    double d = std::numeric_limits<double>::infinity();
    for (double c : brute) d = std::min(d, std::abs(R - c));
    CriticalityVerdict v = is_critical_length(R, 0.0, 1.0, tol);
    if (v.is_critical == (d <= tol) && std::abs(v.distance - d) <= 1e-12) ++agree;
  }
  row.measured = static_cast<double>(agree) / trials;
  row.seconds = seconds_since(t0);
  row.pass = exact && row.measured >= row.threshold;
  row.detail = std::string("enumeration ") + (exact ? "exact" : "MISMATCH") +
               ", classifier agreement over 1000 R";
  return row;
}

CriterionRow picard(std::uint64_t seed) {
  CriterionRow row{7, "nonlinear fixed point", 0.0, 1.0, false, {}, 0.0};
  auto t0 = Clock::now();
  ControlProblem pb = standard_cubic_problem(32, 256, 1e-3);
  PicardConfig cfg;
  cfg.seed = seed;
  ControlSolution s = picard_solve(pb, cfg);
  double worst_ratio = 0.0;
  for (double q : s.contraction_ratios) worst_ratio = std::max(worst_ratio, q);
  bool ok = s.status == PicardStatus::converged && worst_ratio < 1.0;
  // Normalised slack: every quantity divided by its tolerance.
  row.measured = std::max({s.certificate / (2 * cfg.fp_tol), s.terminal_residual / 1e-6,
                           s.pde_residual / (1e-6 * pb.c0)});

  ControlSolution big = picard_solve(pb.scaled(1e5), cfg);
  bool graceful =
      big.status == PicardStatus::divergence || big.status == PicardStatus::ball_escape;
  row.seconds = seconds_since(t0);
  row.pass = ok && graceful && row.measured <= row.threshold;
  row.detail = "max slack; " + to_string(s.status) + " in " + fmt("%.0f", s.iterations) +
               " it, worst ratio " + fmt("%.2e", worst_ratio) + ", cert " +
               fmt("%.2e", s.certificate) + ", terminal " + fmt("%.2e", s.terminal_residual) +
               ", pde " + fmt("%.2e", s.pde_residual) + "; x1e5 -> " + to_string(big.status);
  return row;
}

CriterionRow uniqueness(std::uint64_t seed) {
  CriterionRow row{8, "uniqueness", 0.0, 0.0, false, {}, 0.0};
  auto t0 = Clock::now();
  ControlProblem pb = standard_cubic_problem(32, 256, 1e-3);
  PicardConfig cfg;
  cfg.seed = seed;
  row.threshold = 10 * cfg.fp_tol;
  ControlSolution a = picard_solve(pb, cfg);
  cfg.start_from_zero = true;
  ControlSolution b = picard_solve(pb, cfg);
  bool both = a.status == PicardStatus::converged && b.status == PicardStatus::converged;
  row.measured = both ? x_norm(a.u - b.u) / std::max(x_norm(a.u), 1e-300)
                      : std::numeric_limits<double>::infinity();

  bool gronwall = false;
  if (both) {
    ComplexField start = a.u.snapshots[0];
    ComplexField perturbed = start + sine_mode(pb.grid, 2, cplx(1e-2 * pb.c0, 0.0));
    SpaceTimeField u1 = solve_nonlinear_forward(pb, start, a.h);
    SpaceTimeField u2 = solve_nonlinear_forward(pb, perturbed, a.h);
    gronwall = uniqueness_check(pb, u1, u2).holds;
  }
  row.seconds = seconds_since(t0);
  row.pass = both && row.measured <= row.threshold && gronwall;
  row.detail = std::string("relative X gap of two starts; gronwall ") + (gronwall ? "holds" : "FAILS");
  return row;
}

CriterionRow observability(std::uint64_t) {
  CriterionRow row{9, "observability constant", 0.0, 10.0, false, {}, 0.0};
  auto t0 = Clock::now();
  EquationParams p = linear_params(0.0, 1.0);
  auto ratio = [&](double R, int Nx, int Nt) {
    ObservabilityReport r = observability_scan(p, GridSpec(R, 1.0, Nx, Nt));
    return r.infinite ? std::numeric_limits<double>::infinity() : r.ratio;
  };
  double r1 = ratio(3.0, 32, 64), r2 = ratio(3.0, 64, 128);
  double c1 = ratio(2 * kPi, 32, 64), c2 = ratio(2 * kPi, 64, 128);
  double drift = std::abs(r2 - r1) / r1;
  row.measured = c2 / c1;
  row.seconds = seconds_since(t0);
  row.pass = drift < 0.2 && row.measured >= row.threshold;
  row.detail = "growth at R=2pi (" + fmt("%.3e", c1) + " -> " + fmt("%.3e", c2) +
               "); R=3 drift " + fmt("%.3f", drift) + " (" + fmt("%.4f", r1) + " -> " +
               fmt("%.4f", r2) + ")";
  return row;
}

CriterionRow inequalities(std::uint64_t seed) {
  CriterionRow row{10, "inequality scans", 0.0, 0.2, false, {}, 0.0};
  auto t0 = Clock::now();
  std::vector<std::pair<std::string, std::function<double(const GridSpec&)>>> scans = {
      {"interp", [&](const GridSpec& g) { return interpolation_ratio_scan(g, 1000, seed).max_ratio; }},
      {"interp0",
       [&](const GridSpec& g) { return interpolation_ratio_scan(g, 1000, seed, true).max_ratio; }},
      {"pow_l1(p=4)",
       [&](const GridSpec& g) {
         return nonlinear_estimate_scan(4, EstimateKind::power_l1, g, 1000, seed).max_ratio;
       }},
      {"pow_l1(p=2)",
       [&](const GridSpec& g) {
         return nonlinear_estimate_scan(2, EstimateKind::power_l1, g, 1000, seed).max_ratio;
       }},
      {"pow_l2(p=2)",
       [&](const GridSpec& g) {
         return nonlinear_estimate_scan(2, EstimateKind::power_l2, g, 1000, seed).max_ratio;
       }},
      {"deriv_l1(p=2)",
       [&](const GridSpec& g) {
         return nonlinear_estimate_scan(2, EstimateKind::derivative_l1, g, 1000, seed).max_ratio;
       }},
  };
  GridSpec coarse(3.0, 1.0, 64, 64), fine(3.0, 1.0, 128, 128);
  std::string detail = "max drift;";
  for (auto& [name, scan] : scans) {
    double m1 = scan(coarse), m2 = scan(fine);
    double drift = std::abs(m2 - m1) / m1;
    row.measured = std::max(row.measured, drift);
    detail += " " + name + " " + fmt("%.4g", m1) + "/" + fmt("%.4g", m2);
  }
  row.seconds = seconds_since(t0);
  row.pass = row.measured < row.threshold;
  row.detail = detail;
  return row;
}

CriterionRow two_controls(std::uint64_t) {
  CriterionRow row{11, "non-uniqueness of control", 0.0, 1e-8, false, {}, 0.0};
  auto t0 = Clock::now();
  CgOptions cg;
  cg.tol = 1e-10;
  NonUniquenessReport r =
      two_control_construction(linear_params(0.0, 1.0), GridSpec(3.0, 1.0, 32, 256), 1.0, cg);
  row.measured = std::max(r.residual_zero_control, r.residual_pulse_control);
  double larger = std::max(r.norm_zero_control, r.norm_pulse_control);
  double separation = larger > 0.0 ? r.norm_difference / larger : 0.0;
  row.seconds = seconds_since(t0);
  row.pass = r.converged && row.measured <= row.threshold && separation >= 0.1;
  row.detail = "max terminal residual; ||h1-h2|| / max norm " + fmt("%.3f", separation);
  return row;
}

}  // namespace

bool VerificationReport::all_pass() const {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

ForwardInput standard_energy_input(int Nx, int Nt) {
  GridSpec g(3.0, 1.0, Nx, Nt);
  ForwardInput in(linear_params(1.0, 1.0), g);
  in.u0 = gaussian_bump(g, 1.5, 0.4, 1.0);
  in.u0[0] = in.u0[Nx + 1] = 0.0;
  using nlohmann::json;
  json f0 = {{"space", {{"preset", "sine"}, {"n", 1}, {"amplitude", {0.5, 0.5}}}},
             {"time", {{"preset", "cosine"}}}};
  json f1 = {{"space", {{"preset", "gaussian"}, {"center", 1.0}, {"width", 0.5}, {"amplitude", 0.3}}},
             {"time", {{"preset", "phase"}}}};
  in.f0 = source_from_json(f0, g);
  in.f1 = source_from_json(f1, g);
  return in;
}

ControlProblem standard_cubic_problem(int Nx, int Nt, double c0) {
  GridSpec g(3.0, 1.0, Nx, Nt);
  EquationParams p(1.0, 1.0, 1.0, 0.0, 0.0, 2.0, 1.0);
  ControlProblem pb(p, g);
  pb.u0 = gaussian_bump(g, 1.0, 0.3, 1.0);
  pb.uT = gaussian_bump(g, 2.0, 0.3, cplx(0.0, 1.0));
  // Zero ends keep the data compatible with mu = nu = 0.
  pb.u0[0] = pb.u0[Nx + 1] = pb.uT[0] = pb.uT[Nx + 1] = 0.0;
  pb.c0 = c0_of_data(pb);
  return pb.scaled(c0 / pb.c0);
}

CriterionRow run_criterion(int id, std::uint64_t seed) {
  switch (id) {
    case 1: return duality(seed);
    case 2: return contraction(seed);
    case 3: return energy(seed);
    case 4: return gramian(seed);
    case 5: return linear_control(seed);
    case 6: return critical_lengths(seed);
    case 7: return picard(seed);
    case 8: return uniqueness(seed);
    case 9: return observability(seed);
    case 10: return inequalities(seed);
    case 11: return two_controls(seed);
  }
  throw ConfigError("unknown criterion " + std::to_string(id));
}

std::vector<int> suite_criteria(const std::string& suite) {
  static const std::map<std::string, std::vector<int>> suites = {
      {"all", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}},
      {"duality", {1}},
      {"energy", {2, 3}},
      {"gramian", {4, 5, 11}},
      {"criticality", {6, 9}},
      {"picard", {7, 8}},
      {"inequalities", {10}},
  };
  auto it = suites.find(suite);
  if (it == suites.end()) throw ConfigError("unknown verification suite: " + suite);
  return it->second;
}

VerificationReport verify(const std::string& suite, std::uint64_t seed) {
  VerificationReport rep;
  rep.suite = suite;
  for (int id : suite_criteria(suite)) rep.rows.push_back(run_criterion(id, seed));
  return rep;
}

std::string format_row(const CriterionRow& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "[%s] %2d %-28s measured %.4e threshold %.4e (%.2f s)",
                r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.measured, r.threshold, r.seconds);
  return std::string(buf) + "  " + r.detail;
}

}  // namespace hnls
