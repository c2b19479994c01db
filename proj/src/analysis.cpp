#include "hnls/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "hnls/forward.hpp"

namespace hnls {

double critical_length(int k, int l, double a, double b) {
  double rad = 3.0 * b + a * a;
  return 2.0 * std::numbers::pi * std::sqrt((k * k + k * l + l * l) / rad);
}

std::vector<CriticalLength> enumerate_critical_lengths(double a, double b, double R_max) {
  std::vector<CriticalLength> out;
  const double rad = 3.0 * b + a * a;
  if (rad <= 0.0 || !(R_max > 0.0)) return out;
  const int bound = static_cast<int>(std::ceil(R_max * std::sqrt(rad) / (2 * std::numbers::pi))) + 1;
  std::map<long, std::pair<int, int>> by_index;
  for (int k = 1; k <= bound; ++k)
    for (int l = k; l <= bound; ++l) {
      long n = static_cast<long>(k) * k + static_cast<long>(k) * l + static_cast<long>(l) * l;
      if (critical_length(k, l, a, b) > R_max) continue;
      by_index.try_emplace(n, k, l);
    }
  for (const auto& [n, kl] : by_index)
    out.push_back({critical_length(kl.first, kl.second, a, b), kl.first, kl.second});
  return out;
}

CriticalityVerdict is_critical_length(double R, double a, double b, double tol) {
  CriticalityVerdict v;
  v.radicand = 3.0 * b + a * a;
  v.distance = std::numeric_limits<double>::infinity();
  if (v.radicand <= 0.0) return v;
  // The nearest critical length above R is below 2R + 2 R_{1,1}.
  const double reach = 2.0 * R + 2.0 * critical_length(1, 1, a, b) + tol;
  for (const auto& c : enumerate_critical_lengths(a, b, reach)) {
    double d = std::abs(R - c.R);
    if (d < v.distance) {
      v.distance = d;
      if (d <= tol) v.witness = std::pair{c.k, c.l};
    }
  }
  v.is_critical = v.witness.has_value();
  return v;
}

double x_norm(const SpaceTimeField& u) {
  if (u.is_zero_placeholder()) return 0.0;
  const GridSpec& g = u.grid;
  Eigen::VectorXd w = time_weights(g);
  double sup = 0.0, grad = 0.0;
  for (int n = 0; n <= g.Nt; ++n) {
    FieldNorms fn = norms(u.snapshots[n], g);
    sup = std::max(sup, fn.l2);
    grad += w[n] * fn.h1_semi * fn.h1_semi;
  }
  return sup + std::sqrt(grad);
}

double l1_l2_norm(const SpaceTimeField& u) {
  if (u.is_zero_placeholder()) return 0.0;
  Eigen::VectorXd w = time_weights(u.grid);
  double s = 0.0;
  for (int n = 0; n <= u.grid.Nt; ++n) s += w[n] * l2_norm(u.snapshots[n], u.grid);
  return s;
}

double l2_qt_norm(const SpaceTimeField& u) {
  if (u.is_zero_placeholder()) return 0.0;
  Eigen::VectorXd w = time_weights(u.grid);
  double s = 0.0;
  for (int n = 0; n <= u.grid.Nt; ++n) s += w[n] * std::pow(l2_norm(u.snapshots[n], u.grid), 2);
  return std::sqrt(s);
}

double h13_norm(const TimeSeries& g, const GridSpec& grid) {
  if (g.size() == 0) return 0.0;
  const int Nt = grid.Nt;
  const double dt = grid.dt();
  Eigen::VectorXd w = time_weights(grid);
  double l2 = 0.0;
  for (int n = 0; n <= Nt; ++n) l2 += w[n] * std::norm(g[n]);

  // Off-diagonal cell pairs by the midpoint rule; diagonal cells exactly for
  // the linear interpolant: int int |t-s|^{1/3} |g'|^2 = (9/14) |dg|^2 dt^{1/3}.
  std::vector<cplx> mid(Nt);
  for (int n = 0; n < Nt; ++n) mid[n] = 0.5 * (g[n] + g[n + 1]);
  double semi = 0.0;
  for (int i = 0; i < Nt; ++i) {
    semi += (9.0 / 14.0) * std::norm(g[i + 1] - g[i]) * std::cbrt(dt);
    for (int j = i + 1; j < Nt; ++j) {
      double dist = (j - i) * dt;
      semi += 2.0 * dt * dt * std::norm(mid[i] - mid[j]) / std::pow(dist, 5.0 / 3.0);
    }
  }
  return std::sqrt(l2 + semi);
}

ControlProblem ControlProblem::scaled(double s) const {
  ControlProblem p = *this;
  p.u0 *= s;
  p.uT *= s;
  if (p.mu.size()) p.mu *= s;
  if (p.nu.size()) p.nu *= s;
  p.f = f.scaled(s);
  p.c0 = c0_of_data(p);
  return p;
}

double c0_of_data(const ControlProblem& p) {
  return l2_norm(p.u0, p.grid) + l2_norm(p.uT, p.grid) + h13_norm(p.mu, p.grid) +
         h13_norm(p.nu, p.grid) + l1_l2_norm(p.f);
}

ComplexField nodal_derivative(const ComplexField& u, double dx) {
  const int m = static_cast<int>(u.size());
  ComplexField d(m);
  for (int j = 1; j + 1 < m; ++j) d[j] = (u[j + 1] - u[j - 1]) / (2 * dx);
  d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2 * dx);
  d[m - 1] = (3.0 * u[m - 1] - 4.0 * u[m - 2] + u[m - 3]) / (2 * dx);
  return d;
}

namespace {

cplx normal_cplx(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  double re = nd(rng);
  double im = nd(rng);
  return {re, im};
}

constexpr int kSpaceModes = 5;
constexpr int kTimeModes = 3;

// Smooth random function on [0,R]: constant plus decaying cosine and sine modes.
struct RandomProfile {
  cplx constant;
  std::array<cplx, kSpaceModes> cosines, sines;

  static RandomProfile draw(std::mt19937_64& rng, bool vanishing_ends) {
    RandomProfile p{};
    p.constant = vanishing_ends ? cplx{} : normal_cplx(rng);
    for (int m = 0; m < kSpaceModes; ++m) {
      p.cosines[m] = vanishing_ends ? cplx{} : normal_cplx(rng) / double(m + 1);
      p.sines[m] = normal_cplx(rng) / double(m + 1);
    }
    return p;
  }
  cplx operator()(double x, double R) const {
    cplx v = constant;
    for (int m = 0; m < kSpaceModes; ++m) {
      double k = (m + 1) * std::numbers::pi * x / R;
      v += cosines[m] * std::cos(k) + sines[m] * std::sin(k);
    }
    return v;
  }
};

// Smooth random space-time field: sum of profiles modulated in time.
struct RandomSpaceTime {
  std::array<RandomProfile, kTimeModes> profiles;

  static RandomSpaceTime draw(std::mt19937_64& rng) {
    RandomSpaceTime f;
    for (auto& p : f.profiles) p = RandomProfile::draw(rng, false);
    return f;
  }
  SpaceTimeField sample(const GridSpec& g) const {
    SpaceTimeField u(g);
    for (int n = 0; n <= g.Nt; ++n)
      for (int j = 0; j < g.nodes(); ++j) {
        cplx v{};
        for (int q = 0; q < kTimeModes; ++q)
          v += profiles[q](g.x(j), g.R) * std::cos(q * std::numbers::pi * g.t(n) / g.T);
        u.snapshots[n][j] = v;
      }
    return u;
  }
};

}  // namespace

SpaceTimeField random_smooth_field(const GridSpec& grid, std::mt19937_64& rng) {
  return RandomSpaceTime::draw(rng).sample(grid);
}

InequalityReport interpolation_ratio_scan(const GridSpec& grid, int samples, std::uint64_t seed,
                                          bool vanishing_ends) {
  if (samples < 1) throw ConfigError("interpolation_ratio_scan: samples must be >= 1");
  std::mt19937_64 rng(seed);
  InequalityReport rep;
  rep.samples = samples;
  for (int s = 0; s < samples; ++s) {
    RandomProfile prof = RandomProfile::draw(rng, vanishing_ends);
    ComplexField phi(grid.nodes());
    for (int j = 0; j < grid.nodes(); ++j) phi[j] = prof(grid.x(j), grid.R);
    FieldNorms fn = norms(phi, grid);
    double den = std::sqrt(fn.h1_semi * fn.l2) + (vanishing_ends ? 0.0 : fn.l2);
    if (den <= 0.0) continue;
    double r = fn.sup / den;
    if (r > rep.max_ratio) {
      rep.max_ratio = r;
      rep.argmax = "sample " + std::to_string(s);
    }
  }
  return rep;
}

double estimate_time_factor(double p, EstimateKind kind, double T) {
  const double p_max = kind == EstimateKind::power_l1 ? 4.0 : 2.0;
  if (p < 1.0 || p > p_max) throw ConfigError("estimate exponent out of range");
  switch (kind) {
    case EstimateKind::power_l1:
      return std::pow(T, (4.0 - p) / 4.0) + T;
    case EstimateKind::power_l2:
    case EstimateKind::derivative_l1:
      return std::pow(T, (2.0 - p) / 4.0) + std::sqrt(T);
  }
  return 1.0;
}

InequalityReport nonlinear_estimate_scan(double p, EstimateKind kind, const GridSpec& grid,
                                         int samples, std::uint64_t seed) {
  if (samples < 1) throw ConfigError("nonlinear_estimate_scan: samples must be >= 1");
  std::mt19937_64 rng(seed);
  InequalityReport rep;
  rep.samples = samples;
  const double factor = estimate_time_factor(p, kind, grid.T);
  const double dx = grid.dx();
  for (int s = 0; s < samples; ++s) {
    SpaceTimeField u = RandomSpaceTime::draw(rng).sample(grid);
    SpaceTimeField v = RandomSpaceTime::draw(rng).sample(grid);
    SpaceTimeField w = kind == EstimateKind::derivative_l1 ? RandomSpaceTime::draw(rng).sample(grid)
                                                           : SpaceTimeField(grid, false);
    SpaceTimeField prod(grid);
    const double expo = kind == EstimateKind::derivative_l1 ? p - 1.0 : p;
    for (int n = 0; n <= grid.Nt; ++n) {
      const ComplexField& un = u.snapshots[n];
      ComplexField rhs = v.snapshots[n];
      if (kind == EstimateKind::derivative_l1)
        rhs = rhs.cwiseProduct(nodal_derivative(w.snapshots[n], dx));
      for (int j = 0; j < grid.nodes(); ++j) prod.snapshots[n][j] = std::pow(std::abs(un[j]), expo) * rhs[j];
    }
    double lhs = kind == EstimateKind::power_l2 ? l2_qt_norm(prod) : l1_l2_norm(prod);
    double den = factor * std::pow(x_norm(u), expo) * x_norm(v);
    if (kind == EstimateKind::derivative_l1) den *= x_norm(w);
    if (den <= 0.0) continue;
    double r = lhs / den;
    if (r > rep.max_ratio) {
      rep.max_ratio = r;
      rep.argmax = "sample " + std::to_string(s);
    }
  }
  return rep;
}

double min_relative_left_trace(const EquationParams& params, const GridSpec& grid, int modes) {
  DiscreteOperator op = build_operator(params, grid);
  Eigen::ComplexEigenSolver<Mat> es(op.dense());
  const int N = grid.Nx;
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return std::abs(es.eigenvalues()[i]) < std::abs(es.eigenvalues()[j]);
  });
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < std::min(modes, N); ++k) {
    ComplexField y = embed(es.eigenvectors().col(order[k]), 0.0, 0.0);
    FieldNorms fn = norms(y, grid);
    double h1 = std::sqrt(fn.l2 * fn.l2 + fn.h1_semi * fn.h1_semi);
    best = std::min(best, std::abs(left_trace(y, grid.dx())) / h1);
  }
  return best;
}

}  // namespace hnls
