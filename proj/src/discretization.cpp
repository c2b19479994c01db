#include "hnls/discretization.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include <Eigen/Eigenvalues>

namespace hnls {

GridSpec::GridSpec(double R_, double T_, int Nx_, int Nt_) : R(R_), T(T_), Nx(Nx_), Nt(Nt_) {
  if (!(R > 0.0) || !std::isfinite(R)) throw ConfigError("grid: R must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("grid: T must be positive");
  if (Nx < 8) throw ConfigError("grid: Nx must be at least 8 for the 5-point stencil");
  if (Nt < 8) throw ConfigError("grid: Nt must be at least 8");
}

EquationParams::EquationParams(double a_, double b_, double lambda_, double beta_,
                               double gamma_, double p0_, double p1_)
    : a(a_), b(b_), lambda(lambda_), beta(beta_), gamma(gamma_), p0(p0_), p1(p1_) {
  validate();
}

void EquationParams::validate() const {
  for (double v : {a, b, lambda, beta, gamma, p0, p1})
    if (!std::isfinite(v)) throw ConfigError("equation: non-finite coefficient");
  if (p0 < 1.0 || p0 > 4.0) throw ConfigError("equation: p0 must lie in [1,4]");
  if (p1 < 1.0 || p1 > 2.0) throw ConfigError("equation: p1 must lie in [1,2]");
}

SpaceTimeField::SpaceTimeField(const GridSpec& g, bool allocate) : grid(g) {
  if (allocate) snapshots.assign(g.Nt + 1, ComplexField::Zero(g.nodes()));
}

ComplexField SpaceTimeField::at(int n) const {
  if (snapshots.empty()) return ComplexField::Zero(grid.nodes());
  return snapshots[n];
}

double SpaceTimeField::value_norm() const {
  double s = 0.0;
  for (const auto& v : snapshots) s = std::max(s, v.cwiseAbs().maxCoeff());
  return s;
}

SpaceTimeField SpaceTimeField::operator-(const SpaceTimeField& o) const {
  SpaceTimeField r(grid);
  for (int n = 0; n <= grid.Nt; ++n) r.snapshots[n] = at(n) - o.at(n);
  return r;
}

SpaceTimeField SpaceTimeField::operator+(const SpaceTimeField& o) const {
  SpaceTimeField r(grid);
  for (int n = 0; n <= grid.Nt; ++n) r.snapshots[n] = at(n) + o.at(n);
  return r;
}

SpaceTimeField SpaceTimeField::scaled(cplx s) const {
  if (snapshots.empty()) return *this;
  SpaceTimeField r(grid, false);
  r.snapshots.reserve(snapshots.size());
  for (const auto& v : snapshots) r.snapshots.push_back(s * v);
  return r;
}

Eigen::VectorXd time_weights(const GridSpec& g) {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(g.Nt + 1, g.dt());
  w[0] *= 0.5;
  w[g.Nt] *= 0.5;
  return w;
}

cplx DiscreteOperator::entry(int row, int col) const {
  int k = col - row + half_band;
  if (k < 0 || k > 2 * half_band) return {};
  return diag[k][row];
}

Mat DiscreteOperator::dense() const {
  const int n = size();
  Mat m = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k <= 2 * half_band; ++k) {
      int j = i + k - half_band;
      if (j >= 0 && j < n) m(i, j) = diag[k][i];
    }
  return m;
}

Vec DiscreteOperator::apply(const Vec& y) const {
  const int n = size();
  Vec r = Vec::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k <= 2 * half_band; ++k) {
      int j = i + k - half_band;
      if (j >= 0 && j < n) r[i] += diag[k][i] * y[j];
    }
  return r;
}

double DiscreteOperator::norm_estimate() const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) {
    double row = 0.0;
    for (int k = 0; k <= 2 * half_band; ++k) row += std::abs(diag[k][i]);
    s = std::max(s, row);
  }
  return s;
}

Vec DiscreteOperator::boundary_vector(cplx mu, cplx nu, cplx h) const {
  const int n = size();
  const double dx = grid.dx();
  const double dx2 = dx * dx, dx3 = dx2 * dx;
  const cplx ia{0.0, params.a};
  Vec g = Vec::Zero(n);
  g[0] += ia * mu / dx2 + params.b * mu / (2 * dx);
  g[1] += mu / (2 * dx3);
  g[n - 2] += -nu / (2 * dx3);
  g[n - 1] += ia * nu / dx2 - params.b * nu / (2 * dx) + nu / dx3 - h / dx2;
  return g;
}

cplx DiscreteOperator::control_coefficient() const {
  const double dx = grid.dx();
  return -1.0 / (dx * dx);
}

namespace {

DiscreteOperator assemble_forward(const EquationParams& p, const GridSpec& g) {
  DiscreteOperator op;
  op.grid = g;
  op.params = p;
  const int n = g.Nx;
  for (auto& d : op.diag) d.assign(n, cplx{});
  const double dx = g.dx();
  const double c1 = 1.0 / (2 * dx), c2 = 1.0 / (dx * dx), c3 = 1.0 / (2 * dx * dx * dx);
  const cplx ia{0.0, p.a};
  auto add = [&](int i, int j, cplx v) {
    if (j >= 0 && j < n) op.diag[j - i + 2][i] += v;
  };
  for (int i = 0; i < n; ++i) {
    // -D3
    add(i, i + 2, -c3);
    add(i, i + 1, 2.0 * c3);
    add(i, i - 1, -2.0 * c3);
    add(i, i - 2, c3);
    // i a D2
    add(i, i + 1, ia * c2);
    add(i, i, -2.0 * ia * c2);
    add(i, i - 1, ia * c2);
    // -b D1
    add(i, i + 1, -p.b * c1);
    add(i, i - 1, p.b * c1);
  }
  // Left ghost u_{-1} = 2u_0 - u_1 enters row 0 through the u_{-2} slot.
  add(0, 0, -c3);
  // Right ghost u_{Nx+2} = u_Nx + 2dx h enters row Nx-1 through the u_{+2} slot.
  add(n - 1, n - 1, -c3);
  return op;
}

using CacheKey = std::tuple<double, double, double, int>;
std::map<CacheKey, double>& margin_cache() {
  static std::map<CacheKey, double> cache;
  return cache;
}
std::mutex& margin_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

double hermitian_part_margin(const DiscreteOperator& op) {
  Mat a = op.dense();
  Mat h = (a + a.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  Eigen::JacobiSVD<Mat> svd(a);
  return es.eigenvalues().maxCoeff() / svd.singularValues()[0];
}

DiscreteOperator build_operator(const EquationParams& params, const GridSpec& grid,
                                Orientation orientation) {
  if (grid.Nx < 8) throw ConfigError("operator: Nx < 8 is too coarse for the 5-point closure");
  DiscreteOperator op = assemble_forward(params, grid);

  // Coarse dense check of dissipativity, cached per (a, b, R, Nx).
  if (grid.Nx <= 128) {
    CacheKey key{params.a, params.b, grid.R, grid.Nx};
    std::lock_guard lock(margin_mutex());
    auto it = margin_cache().find(key);
    if (it == margin_cache().end())
      it = margin_cache().emplace(key, hermitian_part_margin(op)).first;
    op.dissipativity_margin = it->second;
    if (op.dissipativity_margin > 1e-8)
      throw Error("operator: Hermitian part is not negative semidefinite");
  }

  if (orientation == Orientation::backward) {
    DiscreteOperator adj = op;
    adj.orientation = Orientation::backward;
    const int n = grid.Nx;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k <= 4; ++k) {
        int j = i + k - 2;
        adj.diag[k][i] = (j >= 0 && j < n) ? std::conj(op.entry(j, i)) : cplx{};
      }
    return adj;
  }
  return op;
}

double weight_at(double x, Weight weight) { return weight == Weight::unit ? 1.0 : 1.0 + x; }
double weight_slope(Weight weight) { return weight == Weight::unit ? 0.0 : 1.0; }

cplx inner_product(const ComplexField& f, const ComplexField& g, const GridSpec& grid,
                   Weight weight) {
  if (f.size() != g.size() || f.size() != grid.nodes())
    throw ConfigError("inner_product: field length mismatch");
  const int last = grid.Nx + 1;
  cplx s{};
  for (int j = 0; j <= last; ++j) {
    double w = (j == 0 || j == last) ? 0.5 : 1.0;
    s += w * weight_at(grid.x(j), weight) * f[j] * std::conj(g[j]);
  }
  return s * grid.dx();
}

double l2_norm(const ComplexField& f, const GridSpec& grid, Weight weight) {
  return std::sqrt(std::max(0.0, inner_product(f, f, grid, weight).real()));
}

FieldNorms norms(const ComplexField& f, const GridSpec& grid) {
  FieldNorms r;
  r.l2 = l2_norm(f, grid);
  const double dx = grid.dx();
  double s = 0.0;
  for (int j = 0; j + 1 < f.size(); ++j) s += std::norm(f[j + 1] - f[j]) / dx;
  r.h1_semi = std::sqrt(s);
  r.sup = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
  return r;
}

Vec interior(const ComplexField& f) { return f.segment(1, f.size() - 2); }

ComplexField embed(const Vec& in, cplx left, cplx right) {
  ComplexField f(in.size() + 2);
  f[0] = left;
  f.segment(1, in.size()) = in;
  f[in.size() + 1] = right;
  return f;
}

}  // namespace hnls
