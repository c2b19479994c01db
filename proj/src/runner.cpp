#include "hnls/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>

#include "hnls/adjoint.hpp"
#include "hnls/analysis.hpp"
#include "hnls/presets.hpp"
#include "hnls/verification.hpp"

namespace hnls {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240601;

const json& block(const json& config, const char* name) {
  static const json empty = json::object();
  if (!config.contains(name)) return empty;
  const json& b = config.at(name);
  if (!b.is_object()) throw ConfigError(std::string("block '") + name + "' must be an object");
  return b;
}

void check_keys(const json& b, const char* name, std::initializer_list<const char*> allowed) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = b.begin(); it != b.end(); ++it)
    if (!ok.count(it.key()))
      throw ConfigError(std::string("unknown key '") + it.key() + "' in block '" + name + "'");
}

double number(const json& b, const char* key, double fallback) {
  if (!b.contains(key)) return fallback;
  const json& v = b.at(key);
  if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(std::string("'") + key + "' must be finite");
  return d;
}

int integer(const json& b, const char* key, int fallback) {
  double d = number(b, key, fallback);
  if (d != std::floor(d)) throw ConfigError(std::string("'") + key + "' must be an integer");
  return static_cast<int>(d);
}

bool flag(const json& b, const char* key, bool fallback) {
  if (!b.contains(key)) return fallback;
  if (!b.at(key).is_boolean()) throw ConfigError(std::string("'") + key + "' must be a boolean");
  return b.at(key).get<bool>();
}

std::string text(const json& b, const char* key, const std::string& fallback) {
  if (!b.contains(key)) return fallback;
  if (!b.at(key).is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
  return b.at(key).get<std::string>();
}

const json& data_item(const json& config, const char* key) {
  static const json null;
  const json& d = block(config, "data");
  return d.contains(key) ? d.at(key) : null;
}

Weight parse_weight(const json& config) {
  std::string w = text(block(config, "solver"), "weight", "unit");
  if (w == "unit") return Weight::unit;
  if (w == "affine") return Weight::affine;
  throw ConfigError("solver.weight must be 'unit' or 'affine'");
}

json grid_json(const GridSpec& g) {
  return {{"R", g.R}, {"T", g.T}, {"Nx", g.Nx}, {"Nt", g.Nt}};
}

json equation_json(const EquationParams& p) {
  return {{"a", p.a},       {"b", p.b},       {"lambda", p.lambda}, {"beta", p.beta},
          {"gamma", p.gamma}, {"p0", p.p0}, {"p1", p.p1}};
}

json tolerances_json(const CgOptions& cg, const PicardConfig& pc) {
  json t = {{"cg_tol", cg.tol},
            {"cg_max_iter", cg.max_iter},
            {"tikhonov", cg.tikhonov},
            {"reorthogonalize", cg.reorthogonalize},
            {"fp_tol", pc.fp_tol},
            {"max_iter", pc.max_iter},
            {"under_relaxation", pc.under_relaxation},
            {"pde_tol", pc.pde_tol},
            {"terminal_tol", pc.terminal_tol},
            {"calibration_samples", pc.calibration_samples},
            {"start_from_zero", pc.start_from_zero}};
  t["radius"] = pc.r ? json(*pc.r) : json(nullptr);
  return t;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  return f;
}

void write_energy(const fs::path& path, const std::vector<EnergyRow>& rows) {
  std::ofstream f = open_out(path);
  f << "t mass trace_flux gradient drift dispersion source0 source1 imbalance\n";
  char buf[512];
  for (const EnergyRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", r.t,
                  r.mass, r.trace_flux, r.gradient, r.drift, r.dispersion, r.source0, r.source1,
                  r.imbalance);
    f << buf;
  }
}

ForwardInput forward_input(const json& config) {
  ControlProblem pb = parse_problem(config);
  ForwardInput in(pb.params, pb.grid);
  in.u0 = pb.u0;
  in.mu = pb.mu;
  in.nu = pb.nu;
  in.f0 = pb.f;
  in.h = series_from_json(data_item(config, "h"), pb.grid);
  in.f1 = source_from_json(data_item(config, "f1"), pb.grid);
  return in;
}

int run_simulate(const RunRequest& rq, json& summary) {
  ForwardInput in = forward_input(rq.config);
  ForwardOutput out = solve_forward(in);
  std::vector<EnergyRow> ledger = energy_ledger(out, parse_weight(rq.config));
  write_field(rq.out_dir / "field.dat", out.u);
  write_series(rq.out_dir / "trace.dat", out.theta, in.grid);
  write_energy(rq.out_dir / "energy.dat", ledger);
  double worst = 0.0;
  for (const EnergyRow& r : ledger) worst = std::max(worst, std::abs(r.imbalance));
  summary["residuals"] = {{"energy_imbalance", worst}};
  summary["warnings"] = out.warnings;
  return exit_code::success;
}

int run_control_linear(const RunRequest& rq, json& summary) {
  ForwardInput in = forward_input(rq.config);
  LinearProblem lp(in.params, in.grid);
  lp.u0 = in.u0;
  lp.uT = parse_problem(rq.config).uT;
  lp.mu = in.mu;
  lp.nu = in.nu;
  lp.f0 = in.f0;
  lp.f1 = in.f1;
  LinearControlResult r = control_linear(lp, parse_cg(rq.config));
  write_field(rq.out_dir / "field.dat", r.trajectory);
  write_series(rq.out_dir / "control.dat", r.h, in.grid);
  summary["converged"] = r.converged;
  summary["residuals"] = {{"terminal_residual", r.terminal_residual},
                          {"cg_residual", r.gramian.cg_residual},
                          {"defect_norm", r.defect_norm}};
  summary["cg_iterations"] = r.gramian.cg_iterations;
  summary["control_norm"] = series_norm(r.h, in.grid);
  summary["warnings"] = r.warnings;
  return r.converged ? exit_code::success : exit_code::non_convergence;
}

int run_control_nonlinear(const RunRequest& rq, json& summary) {
  ControlProblem pb = parse_problem(rq.config);
  PicardConfig cfg = parse_picard(rq.config);
  if (rq.seed) cfg.seed = *rq.seed;
  ControlSolution s = picard_solve(pb, cfg);
  if (!s.u.is_zero_placeholder()) write_field(rq.out_dir / "field.dat", s.u);
  if (s.h.size()) write_series(rq.out_dir / "control.dat", s.h, pb.grid);
  {
    std::ofstream f = open_out(rq.out_dir / "iterations.dat");
    f << "k step_norm ratio iterate_norm\n";
    char buf[160];
    for (size_t k = 0; k < s.step_norms.size(); ++k) {
      double ratio = k > 0 ? s.contraction_ratios[k - 1] : std::nan("");
      std::snprintf(buf, sizeof buf, "%zu %.17g %.17g %.17g\n", k + 1, s.step_norms[k], ratio,
                    s.iterate_norms[k + 1]);
      f << buf;
    }
  }
  const bool ok = s.status == PicardStatus::converged;
  summary["status"] = to_string(s.status);
  summary["converged"] = ok;
  summary["verified"] = s.verified;
  summary["iterations"] = s.iterations;
  summary["c0"] = pb.c0;
  summary["radius"] = s.radius;
  summary["contraction_constant"] = s.contraction_constant;
  summary["contraction_ratios"] = s.contraction_ratios;
  summary["residuals"] = {{"terminal_residual", s.terminal_residual},
                          {"pde_residual", s.pde_residual},
                          {"certificate", s.certificate}};
  switch (s.status) {
    case PicardStatus::converged: return exit_code::success;
    case PicardStatus::divergence:
    case PicardStatus::ball_escape: return exit_code::divergence;
    default: return exit_code::non_convergence;
  }
}

int run_critical(const RunRequest& rq, json& summary) {
  const json& c = block(rq.config, "critical");
  check_keys(c, "critical", {"R_max", "tol", "R"});
  EquationParams p = parse_equation(rq.config);
  double R_max = number(c, "R_max", 10.0);
  if (!(R_max > 0.0)) throw ConfigError("critical.R_max must be positive");
  std::vector<CriticalLength> list = enumerate_critical_lengths(p.a, p.b, R_max);
  std::ofstream f = open_out(rq.out_dir / "critical.dat");
  f << "R k l\n";
  json rows = json::array();
  char buf[96];
  for (const CriticalLength& cl : list) {
    std::snprintf(buf, sizeof buf, "%.6f %d %d\n", cl.R, cl.k, cl.l);
    f << buf;
    rows.push_back({{"R", cl.R}, {"k", cl.k}, {"l", cl.l}});
  }
  summary["critical_lengths"] = rows;
  if (c.contains("R")) {
    CriticalityVerdict v = is_critical_length(number(c, "R", 1.0), p.a, p.b, number(c, "tol", 1e-6));
    summary["verdict"] = {{"is_critical", v.is_critical}, {"distance", v.distance},
                          {"radicand", v.radicand}};
    if (v.witness) summary["verdict"]["witness"] = {v.witness->first, v.witness->second};
  }
  return exit_code::success;
}

int run_scan(const RunRequest& rq, json& summary) {
  const json& s = block(rq.config, "scan");
  check_keys(s, "scan", {"kind", "samples", "p", "estimate", "modes", "scales", "vanishing_ends"});
  const std::string kind = text(s, "kind", "observability");
  const std::uint64_t seed = rq.seed.value_or(
      static_cast<std::uint64_t>(number(rq.config, "seed", static_cast<double>(kDefaultSeed))));
  const int samples = integer(s, "samples", 1000);
  std::ofstream f = open_out(rq.out_dir / "scan.dat");
  char buf[256];
  if (kind == "observability") {
    ObservabilityOptions o;
    o.samples = integer(s, "samples", o.samples);
    o.modes = integer(s, "modes", o.modes);
    o.seed = seed;
    GridSpec g = parse_grid(rq.config);
    ObservabilityReport r = observability_scan(parse_equation(rq.config), g, o);
    f << "R Nx Nt ratio\n";
    std::snprintf(buf, sizeof buf, "%.17g %d %d %.17g\n", g.R, g.Nx, g.Nt, r.ratio);
    f << buf;
    summary["ratio"] = r.infinite ? json("inf") : json(r.ratio);
  } else if (kind == "interpolation" || kind == "estimate") {
    GridSpec g = parse_grid(rq.config);
    InequalityReport r;
    if (kind == "interpolation") {
      r = interpolation_ratio_scan(g, samples, seed, flag(s, "vanishing_ends", false));
    } else {
      std::string e = text(s, "estimate", "power_l1");
      EstimateKind ek = e == "power_l1"        ? EstimateKind::power_l1
                        : e == "power_l2"      ? EstimateKind::power_l2
                        : e == "derivative_l1" ? EstimateKind::derivative_l1
                                               : throw ConfigError("unknown estimate: " + e);
      r = nonlinear_estimate_scan(number(s, "p", 2.0), ek, g, samples, seed);
    }
    f << "samples max_ratio\n";
    std::snprintf(buf, sizeof buf, "%d %.17g\n", r.samples, r.max_ratio);
    f << buf;
    summary["max_ratio"] = r.max_ratio;
    summary["argmax"] = r.argmax;
  } else if (kind == "smallness") {
    if (!s.contains("scales") || !s.at("scales").is_array())
      throw ConfigError("scan.scales must be an array");
    std::vector<double> scales;
    for (const json& v : s.at("scales")) {
      if (!v.is_number()) throw ConfigError("scan.scales must hold numbers");
      scales.push_back(v.get<double>());
    }
    PicardConfig cfg = parse_picard(rq.config);
    cfg.seed = seed;
    SmallnessTable t = smallness_scan(parse_problem(rq.config), scales, cfg);
    f << "scale converged status iterations terminal_residual\n";
    for (const SmallnessRow& row : t.rows) {
      std::snprintf(buf, sizeof buf, "%.17g %d %s %d %.17g\n", row.scale, row.converged ? 1 : 0,
                    to_string(row.status).c_str(), row.iterations, row.terminal_residual);
      f << buf;
    }
    summary["delta_hat"] = t.delta_hat;
  } else if (kind == "gramian") {
    DenseGramian d = assemble_gramian_dense(parse_equation(rq.config), parse_grid(rq.config));
    f << "index eigenvalue\n";
    for (Eigen::Index i = 0; i < d.eigenvalues.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%ld %.17g\n", static_cast<long>(i), d.eigenvalues[i]);
      f << buf;
    }
    summary["min_eig"] = d.report.min_eig;
    summary["max_eig"] = d.report.max_eig;
    summary["hermitian_defect"] = d.report.hermitian_defect;
  } else {
    throw ConfigError("unknown scan kind: " + kind);
  }
  summary["scan"] = kind;
  return exit_code::success;
}

int run_verify(const RunRequest& rq, json& summary, std::ostream& log) {
  const json& v = block(rq.config, "verify");
  check_keys(v, "verify", {"suite"});
  const std::string suite = text(v, "suite", "all");
  const std::uint64_t seed = rq.seed.value_or(
      static_cast<std::uint64_t>(number(rq.config, "seed", static_cast<double>(kDefaultSeed))));
  std::vector<int> ids = suite_criteria(suite);
  std::ofstream f = open_out(rq.out_dir / "verify.dat");
  f << "id pass measured threshold seconds name\n";
  json rows = json::array();
  bool all = true;
  char buf[256];
  for (int id : ids) {
    CriterionRow r = run_criterion(id, seed);
    log << format_row(r) << '\n';
    std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g %.3f %s\n", r.id, r.pass ? 1 : 0, r.measured,
                  r.threshold, r.seconds, r.name.c_str());
    f << buf;
    rows.push_back({{"id", r.id},
                    {"name", r.name},
                    {"pass", r.pass},
                    {"measured", r.measured},
                    {"threshold", r.threshold},
                    {"detail", r.detail}});
    all = all && r.pass;
  }
  summary["suite"] = suite;
  summary["criteria"] = rows;
  summary["all_pass"] = all;
  return all ? exit_code::success : exit_code::verification_failed;
}

}  // namespace

json load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
}

EquationParams parse_equation(const json& config) {
  const json& e = block(config, "equation");
  check_keys(e, "equation", {"a", "b", "lambda", "beta", "gamma", "p0", "p1"});
  EquationParams d;
  EquationParams p(number(e, "a", d.a), number(e, "b", d.b), number(e, "lambda", d.lambda),
                   number(e, "beta", d.beta), number(e, "gamma", d.gamma), number(e, "p0", d.p0),
                   number(e, "p1", d.p1));
  p.validate();
  return p;
}

GridSpec parse_grid(const json& config) {
  const json& g = block(config, "grid");
  check_keys(g, "grid", {"R", "T", "Nx", "Nt"});
  return GridSpec(number(g, "R", 3.0), number(g, "T", 1.0), integer(g, "Nx", 64),
                  integer(g, "Nt", 128));
}

ControlProblem parse_problem(const json& config) {
  check_keys(block(config, "data"), "data", {"u0", "uT", "mu", "nu", "h", "f", "f1"});
  ControlProblem pb(parse_equation(config), parse_grid(config));
  pb.u0 = field_from_json(data_item(config, "u0"), pb.grid);
  pb.uT = field_from_json(data_item(config, "uT"), pb.grid);
  pb.mu = series_from_json(data_item(config, "mu"), pb.grid);
  pb.nu = series_from_json(data_item(config, "nu"), pb.grid);
  pb.f = source_from_json(data_item(config, "f"), pb.grid);
  pb.c0 = c0_of_data(pb);
  return pb;
}

namespace {
const std::initializer_list<const char*> kSolverKeys = {
    "cg_tol",  "cg_max_iter", "tikhonov",         "reorthogonalize", "fp_tol",
    "max_iter", "under_relaxation", "radius",     "start_from_zero", "pde_tol",
    "terminal_tol", "calibration_samples", "weight"};
}

CgOptions parse_cg(const json& config) {
  const json& s = block(config, "solver");
  check_keys(s, "solver", kSolverKeys);
  CgOptions o;
  o.tol = number(s, "cg_tol", o.tol);
  o.max_iter = integer(s, "cg_max_iter", o.max_iter);
  o.tikhonov = number(s, "tikhonov", o.tikhonov);
  o.reorthogonalize = flag(s, "reorthogonalize", o.reorthogonalize);
  if (!(o.tol > 0.0)) throw ConfigError("solver.cg_tol must be positive");
  if (o.max_iter < 1) throw ConfigError("solver.cg_max_iter must be >= 1");
  if (o.tikhonov < 0.0) throw ConfigError("solver.tikhonov must be non-negative");
  return o;
}

PicardConfig parse_picard(const json& config) {
  const json& s = block(config, "solver");
  PicardConfig c;
  c.cg = parse_cg(config);
  c.fp_tol = number(s, "fp_tol", c.fp_tol);
  c.max_iter = integer(s, "max_iter", c.max_iter);
  c.under_relaxation = number(s, "under_relaxation", c.under_relaxation);
  if (s.contains("radius")) c.r = number(s, "radius", 1.0);
  c.start_from_zero = flag(s, "start_from_zero", c.start_from_zero);
  c.pde_tol = number(s, "pde_tol", c.pde_tol);
  c.terminal_tol = number(s, "terminal_tol", c.terminal_tol);
  c.calibration_samples = integer(s, "calibration_samples", c.calibration_samples);
  c.seed = static_cast<std::uint64_t>(number(config, "seed", static_cast<double>(c.seed)));
  return c;
}

std::uint64_t config_hash(const json& config, std::uint64_t seed) {
  std::string s = config.dump() + "#seed=" + std::to_string(seed);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_field(const fs::path& path, const SpaceTimeField& u) {
  std::ofstream f = open_out(path);
  f << "x t re_u im_u\n";
  const GridSpec& g = u.grid;
  char buf[128];
  for (int n = 0; n <= g.Nt; ++n) {
    ComplexField s = u.at(n);
    for (int j = 0; j < g.nodes(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g\n", g.x(j), g.t(n), s[j].real(),
                    s[j].imag());
      f << buf;
    }
  }
}

void write_series(const fs::path& path, const TimeSeries& s, const GridSpec& g) {
  std::ofstream f = open_out(path);
  f << "t re im\n";
  char buf[96];
  for (int n = 0; n <= g.Nt; ++n) {
    cplx v = sample(s, n);
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", g.t(n), v.real(), v.imag());
    f << buf;
  }
}

int run(const RunRequest& rq, std::ostream& log) {
  static const std::set<std::string> top = {"mode",   "equation", "grid", "data", "solver",
                                            "critical", "scan",   "verify", "seed"};
  json summary;
  summary["mode"] = rq.mode;
  int code = exit_code::success;
  std::uint64_t seed = kDefaultSeed;
  try {
    fs::create_directories(rq.out_dir);
  } catch (const fs::filesystem_error& e) {
    log << "error: cannot create output directory: " << e.what() << '\n';
    return exit_code::config_error;
  }
  try {
    if (!rq.config.is_object()) throw ConfigError("config must be a JSON object");
    for (auto it = rq.config.begin(); it != rq.config.end(); ++it)
      if (!top.count(it.key())) throw ConfigError("unknown top-level key '" + it.key() + "'");
    seed = rq.seed.value_or(
        static_cast<std::uint64_t>(number(rq.config, "seed", static_cast<double>(kDefaultSeed))));
    summary["seed"] = seed;
    summary["config_hash"] = hex(config_hash(rq.config, seed));
    if (rq.mode != "critical-lengths" && rq.mode != "verify") {
      summary["grid"] = grid_json(parse_grid(rq.config));
      summary["equation"] = equation_json(parse_equation(rq.config));
      summary["tolerances"] = tolerances_json(parse_cg(rq.config), parse_picard(rq.config));
    }
    if (rq.mode == "simulate") code = run_simulate(rq, summary);
    else if (rq.mode == "control-linear") code = run_control_linear(rq, summary);
    else if (rq.mode == "control-nonlinear") code = run_control_nonlinear(rq, summary);
    else if (rq.mode == "critical-lengths") code = run_critical(rq, summary);
    else if (rq.mode == "scan") code = run_scan(rq, summary);
    else if (rq.mode == "verify") code = run_verify(rq, summary, log);
    else throw ConfigError("unknown mode: " + rq.mode);
  } catch (const ConfigError& e) {
    summary["error"] = {{"kind", "ConfigError"}, {"message", e.what()}};
    code = exit_code::config_error;
  } catch (const json::exception& e) {
    summary["error"] = {{"kind", "ConfigError"}, {"message", e.what()}};
    code = exit_code::config_error;
  } catch (const NonConvergence& e) {
    summary["error"] = {{"kind", "NonConvergence"}, {"message", e.what()}};
    code = exit_code::non_convergence;
  } catch (const SingularStep& e) {
    summary["error"] = {{"kind", "SingularStep"}, {"message", e.what()}};
    code = exit_code::non_convergence;
  }
  if (!summary.contains("config_hash")) summary["config_hash"] = hex(config_hash(rq.config, seed));
  summary["exit_code"] = code;
  if (summary.contains("error")) log << "error: " << summary["error"]["message"].get<std::string>() << '\n';
  if (rq.verbose) log << summary.dump(2) << '\n';
  std::ofstream f(rq.out_dir / "summary.json");
  f << summary.dump(2) << '\n';
  return code;
}

}  // namespace hnls
