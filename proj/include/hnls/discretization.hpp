#pragma once

#include <array>

#include "hnls/types.hpp"

namespace hnls {

enum class Orientation { forward, backward };
enum class Weight { unit, affine };

// Pentadiagonal operator on the interior nodes 1..Nx.
//
// Third derivative: 5-point centered stencil. Ghost values outside the
// interval come from an odd reflection about x=0 (u_{-1} = 2u_0 - u_1) and
// from the centered derivative condition at x=R (u_{Nx+2} = u_Nx + 2dx h).
// Both closures keep the Hermitian part negative semidefinite.
class DiscreteOperator {
 public:
  static constexpr int half_band = 2;

  GridSpec grid;
  EquationParams params;
  Orientation orientation = Orientation::forward;
  // diag[k][j] holds entry (j, j+k-2), k = 0..4.
  std::array<std::vector<cplx>, 5> diag;
  // Largest eigenvalue of the Hermitian part, scaled by the spectral norm.
  double dissipativity_margin = 0.0;

  int size() const { return grid.Nx; }
  cplx entry(int row, int col) const;
  Mat dense() const;
  Vec apply(const Vec& interior) const;
  double norm_estimate() const;

  // Contribution of Dirichlet data mu, nu and the x=R derivative datum h to
  // the interior rows. Only meaningful in forward orientation.
  Vec boundary_vector(cplx mu, cplx nu, cplx h) const;
  // Row of the operator that receives h and its coefficient.
  cplx control_coefficient() const;
};

DiscreteOperator build_operator(const EquationParams& params, const GridSpec& grid,
                                Orientation orientation = Orientation::forward);

// Max eigenvalue of (A + A^H)/2 divided by the spectral norm of A.
double hermitian_part_margin(const DiscreteOperator& op);

// Trapezoidal integral of f conj(g) rho over [0,R].
cplx inner_product(const ComplexField& f, const ComplexField& g, const GridSpec& grid,
                   Weight weight = Weight::unit);

struct FieldNorms {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double sup = 0.0;
};

FieldNorms norms(const ComplexField& f, const GridSpec& grid);
double l2_norm(const ComplexField& f, const GridSpec& grid, Weight weight = Weight::unit);

// Interior slice and re-embedding with boundary values.
Vec interior(const ComplexField& f);
ComplexField embed(const Vec& interior, cplx left, cplx right);

double weight_at(double x, Weight weight);
double weight_slope(Weight weight);

}  // namespace hnls
