#pragma once

#include <cstdint>

#include "hnls/forward.hpp"

namespace hnls {

// x=0 derivative trace of the homogeneous forward solution started at u0.
TimeSeries trace_P(const CrankNicolson& cn, const ComplexField& u0);

// Terminal interior state of the control-only problem u0=0, mu=nu=0, f=0.
Vec control_to_state(const CrankNicolson& cn, const TimeSeries& h);

// Exact discrete adjoint of control_to_state in the trapezoidal inner products
// on (0,R) and (0,T). Boundary values of phi0 are ignored.
TimeSeries lambda_op(const CrankNicolson& cn, const ComplexField& phi0);

// The same map obtained from the reflected forward problem:
// (Lambda phi0)(t) = -conj(P conj(phi0(R - .)))(T - t).
TimeSeries lambda_via_reflection(const CrankNicolson& cn, const ComplexField& phi0);

// |<S h, phi0> - <h, Lambda phi0>| / max(|lhs|, |rhs|, eps).
double check_duality(const CrankNicolson& cn, const TimeSeries& h, const ComplexField& phi0);

double series_norm(const TimeSeries& s, const GridSpec& grid);
cplx series_inner(const TimeSeries& f, const TimeSeries& g, const GridSpec& grid);

struct ObservabilityReport {
  double ratio = 0.0;
  bool infinite = false;
  int samples = 0;
  int modes = 0;
  ComplexField worst_case;
};

struct ObservabilityOptions {
  int samples = 64;
  // Size of the trial subspace spanned by the eigenvectors of A_h with the
  // smallest |eigenvalue|. Zero means the full interior space.
  int modes = 8;
  std::uint64_t seed = 12345;
  int refine_iterations = 60;
};

// Empirical sup of ||u0|| / ||P u0|| over random trial states plus inverse
// power refinement on the projected quadratic form.
ObservabilityReport observability_scan(const EquationParams& params, const GridSpec& grid,
                                       const ObservabilityOptions& options = {});

}  // namespace hnls
