#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hnls/discretization.hpp"
#include "hnls/problem.hpp"

namespace hnls {

struct CriticalityVerdict {
  bool is_critical = false;
  std::optional<std::pair<int, int>> witness;
  double radicand = 0.0;
  // Distance to the nearest critical length; infinite when the set is empty.
  double distance = 0.0;
};

struct CriticalLength {
  double R = 0.0;
  int k = 0;
  int l = 0;
};

// 2 pi sqrt((k^2 + k l + l^2) / (3b + a^2)).
double critical_length(int k, int l, double a, double b);

// Sorted, duplicates (equal k^2+kl+l^2) merged onto the lexicographically
// smallest witness with k <= l.
std::vector<CriticalLength> enumerate_critical_lengths(double a, double b, double R_max);
CriticalityVerdict is_critical_length(double R, double a, double b, double tol);

// sup_t ||u(t)|| + ||u_x||_{L2(Q_T)}.
double x_norm(const SpaceTimeField& u);
// Trapezoidal L1 in time of the spatial L2 norm.
double l1_l2_norm(const SpaceTimeField& u);
// Space-time L2 norm.
double l2_qt_norm(const SpaceTimeField& u);
// Slobodeckij H^{1/3}(0,T) norm of the piecewise linear interpolant.
double h13_norm(const TimeSeries& g, const GridSpec& grid);

double c0_of_data(const ControlProblem& problem);

struct InequalityReport {
  double max_ratio = 0.0;
  int samples = 0;
  std::string argmax;
};

// sup|phi| / (||phi'||^{1/2} ||phi||^{1/2} + ||phi||); with vanishing_ends the
// trial functions lie in H^1_0 and the second term is dropped.
InequalityReport interpolation_ratio_scan(const GridSpec& grid, int samples, std::uint64_t seed,
                                          bool vanishing_ends = false);

enum class EstimateKind { power_l1, power_l2, derivative_l1 };

// Ratios of the three product estimates used for the nonlinear terms:
//   power_l1:      || |u|^p v ||_{L1(L2)} / ((T^{(4-p)/4} + T) ||u||^p ||v||),        p in [1,4]
//   power_l2:      || |u|^p v ||_{L2(Q)}  / ((T^{(2-p)/4} + T^{1/2}) ||u||^p ||v||),  p in [1,2]
//   derivative_l1: || |u|^{p-1} v w_x ||_{L1(L2)} / ((T^{(2-p)/4} + T^{1/2}) ||u||^{p-1} ||v|| ||w||)
// with X norms in the denominators.
InequalityReport nonlinear_estimate_scan(double p, EstimateKind kind, const GridSpec& grid,
                                         int samples, std::uint64_t seed);
double estimate_time_factor(double p, EstimateKind kind, double T);

// Smallest |y'(0)| / ||y||_{H1} over the `modes` eigenvectors of A_h with the
// smallest |eigenvalue|.
double min_relative_left_trace(const EquationParams& params, const GridSpec& grid, int modes = 8);

// Smooth random space-time field built from a few cosine/sine modes in x and
// cosine modes in t. Coefficients depend only on the generator state, so the
// same draw can be sampled on different grids.
SpaceTimeField random_smooth_field(const GridSpec& grid, std::mt19937_64& rng);

// Nodal x-derivative: centered inside, one-sided second order at the ends.
ComplexField nodal_derivative(const ComplexField& u, double dx);

}  // namespace hnls
