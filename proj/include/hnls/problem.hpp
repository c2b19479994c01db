#pragma once

#include "hnls/types.hpp"

namespace hnls {

// Full datum of the nonlinear control problem. c0 is filled by c0_of_data.
struct ControlProblem {
  EquationParams params;
  GridSpec grid;
  ComplexField u0, uT;
  TimeSeries mu, nu;
  SpaceTimeField f;
  double c0 = 0.0;

  ControlProblem() = default;
  ControlProblem(const EquationParams& p, const GridSpec& g)
      : params(p), grid(g), u0(zero_field(g)), uT(zero_field(g)), f(g, false) {}

  // Multiplies every datum by s and refreshes c0.
  ControlProblem scaled(double s) const;
};

}  // namespace hnls
