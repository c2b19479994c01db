#include "hnls/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

namespace hnls {

TimeSeries trace_P(const CrankNicolson& cn, const ComplexField& u0) {
  const GridSpec& g = cn.grid();
  const double dx = g.dx();
  TimeSeries theta(g.Nt + 1);
  Vec u = interior(u0);
  const Vec zero = Vec::Zero(g.Nx);
  theta[0] = left_trace(embed(u, 0.0, 0.0), dx);
  for (int n = 0; n < g.Nt; ++n) {
    u = cn.advance(u, zero);
    theta[n + 1] = left_trace(embed(u, 0.0, 0.0), dx);
  }
  return theta;
}

Vec control_to_state(const CrankNicolson& cn, const TimeSeries& h) {
  const GridSpec& g = cn.grid();
  const int N = g.Nx;
  const cplx coef = cn.op().control_coefficient();
  Vec u = Vec::Zero(N);
  for (int n = 0; n < g.Nt; ++n) {
    Vec f = Vec::Zero(N);
    f[N - 1] = coef * 0.5 * (h[n] + h[n + 1]);
    u = cn.advance(u, f);
  }
  return u;
}

TimeSeries lambda_op(const CrankNicolson& cn, const ComplexField& phi0) {
  const GridSpec& g = cn.grid();
  const int N = g.Nx;
  const double dt = g.dt();
  const cplx coef = std::conj(cn.op().control_coefficient());
  TimeSeries q = TimeSeries::Zero(g.Nt + 1);
  Vec z = g.dx() * interior(phi0);
  for (int n = g.Nt - 1; n >= 0; --n) {
    Vec y = cn.solve_adjoint(z);
    cplx c = 0.5 * dt * coef * y[N - 1];
    q[n] += c;
    q[n + 1] += c;
    z = cn.explicit_adjoint(y);
  }
  Eigen::VectorXd w = time_weights(g);
  for (int n = 0; n <= g.Nt; ++n) q[n] /= w[n];
  return q;
}

TimeSeries lambda_via_reflection(const CrankNicolson& cn, const ComplexField& phi0) {
  const GridSpec& g = cn.grid();
  const int last = g.Nx + 1;
  ComplexField reflected(g.nodes());
  for (int j = 0; j <= last; ++j) reflected[j] = std::conj(phi0[last - j]);
  reflected[0] = reflected[last] = 0.0;
  TimeSeries p = trace_P(cn, reflected);
  TimeSeries out(g.Nt + 1);
  for (int n = 0; n <= g.Nt; ++n) out[n] = -std::conj(p[g.Nt - n]);
  return out;
}

cplx series_inner(const TimeSeries& f, const TimeSeries& g, const GridSpec& grid) {
  Eigen::VectorXd w = time_weights(grid);
  cplx s{};
  for (int n = 0; n <= grid.Nt; ++n) s += w[n] * f[n] * std::conj(g[n]);
  return s;
}

double series_norm(const TimeSeries& s, const GridSpec& grid) {
  if (s.size() == 0) return 0.0;
  return std::sqrt(std::max(0.0, series_inner(s, s, grid).real()));
}

double check_duality(const CrankNicolson& cn, const TimeSeries& h, const ComplexField& phi0) {
  const GridSpec& g = cn.grid();
  Vec terminal = control_to_state(cn, h);
  cplx lhs = inner_product(embed(terminal, 0.0, 0.0), embed(interior(phi0), 0.0, 0.0), g);
  cplx rhs = series_inner(h, lambda_op(cn, phi0), g);
  double scale = std::max({std::abs(lhs), std::abs(rhs), std::numeric_limits<double>::min()});
  return std::abs(lhs - rhs) / scale;
}

ObservabilityReport observability_scan(const EquationParams& params, const GridSpec& grid,
                                       const ObservabilityOptions& options) {
  if (options.samples < 1) throw ConfigError("observability_scan: samples must be >= 1");
  CrankNicolson cn(params, grid);
  const int N = grid.Nx;
  const double dx = grid.dx();

  // Trial subspace, orthonormal in the discrete L2 product.
  Mat basis;
  if (options.modes <= 0 || options.modes >= N) {
    basis = Mat::Identity(N, N);
  } else {
    Eigen::ComplexEigenSolver<Mat> es(cn.op().dense());
    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
      return std::abs(es.eigenvalues()[i]) < std::abs(es.eigenvalues()[j]);
    });
    basis.resize(N, options.modes);
    for (int k = 0; k < options.modes; ++k) basis.col(k) = es.eigenvectors().col(order[k]);
  }
  Eigen::HouseholderQR<Mat> qr(basis);
  const int K = static_cast<int>(basis.cols());
  Mat V = qr.householderQ() * Mat::Identity(N, K) / std::sqrt(dx);

  // Projected quadratic form ||P V c||^2 = c^H G c.
  Eigen::VectorXd w = time_weights(grid);
  Mat traces(grid.Nt + 1, K);
  for (int k = 0; k < K; ++k) traces.col(k) = trace_P(cn, embed(V.col(k), 0.0, 0.0));
  Mat G = traces.adjoint() * w.asDiagonal() * traces;
  G = (G + G.adjoint()).eval() / 2.0;

  auto ratio_of = [&](const Vec& c) {
    double num = c.squaredNorm();
    double den = (c.adjoint() * G * c)(0, 0).real();
    return std::pair{std::sqrt(num / std::max(den, 0.0)), den < 1e-28 * num};
  };

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  Vec best;
  double best_ratio = -1.0;
  for (int s = 0; s < options.samples; ++s) {
    Vec c(K);
    for (int k = 0; k < K; ++k) c[k] = cplx(normal(rng), normal(rng));
    double r = ratio_of(c).first;
    if (r > best_ratio) {
      best_ratio = r;
      best = c;
    }
  }

  // Inverse power iteration drives c toward the smallest eigenvector of G.
  Eigen::LDLT<Mat> ldlt(G);
  Vec c = best.normalized();
  for (int it = 0; it < options.refine_iterations && ldlt.info() == Eigen::Success; ++it) {
    Vec next = ldlt.solve(c);
    if (!next.allFinite() || next.norm() == 0.0) break;
    next.normalize();
    if (ratio_of(next).first < ratio_of(c).first) break;
    c = next;
  }

  ObservabilityReport rep;
  auto [r, inf] = ratio_of(c);
  if (r < best_ratio) {
    c = best;
    std::tie(r, inf) = ratio_of(c);
  }
  rep.ratio = r;
  rep.infinite = inf;
  rep.samples = options.samples;
  rep.modes = K;
  rep.worst_case = embed(V * c, 0.0, 0.0);
  return rep;
}

}  // namespace hnls
