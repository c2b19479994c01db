#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hnls {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

// Spatial snapshot over all Nx+2 nodes, boundaries included.
using ComplexField = Vec;
// Nt+1 samples aligned to t_n.
using TimeSeries = Vec;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double residual, int iterations)
      : Error(what), residual(residual), iterations(iterations) {}
  double residual;
  int iterations;
};

class SingularStep : public Error {
 public:
  SingularStep(const std::string& what, int step) : Error(what), step(step) {}
  int step;
};

struct GridSpec {
  double R = 1.0;
  double T = 1.0;
  int Nx = 16;
  int Nt = 16;

  GridSpec() = default;
  GridSpec(double R, double T, int Nx, int Nt);

  double dx() const { return R / (Nx + 1); }
  double dt() const { return T / Nt; }
  double x(int j) const { return j * dx(); }
  double t(int n) const { return n * dt(); }
  int nodes() const { return Nx + 2; }
  int steps() const { return Nt; }
  bool operator==(const GridSpec&) const = default;
};

struct EquationParams {
  double a = 0.0;
  double b = 1.0;
  double lambda = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double p0 = 2.0;
  double p1 = 1.0;

  EquationParams() = default;
  EquationParams(double a, double b, double lambda, double beta, double gamma, double p0,
                 double p1);
  void validate() const;
  bool linear() const { return lambda == 0.0 && beta == 0.0 && gamma == 0.0; }
};

// Space-time grid function. An empty snapshot list stands for the zero field.
struct SpaceTimeField {
  GridSpec grid;
  std::vector<ComplexField> snapshots;

  SpaceTimeField() = default;
  explicit SpaceTimeField(const GridSpec& g, bool allocate = true);

  bool is_zero_placeholder() const { return snapshots.empty(); }
  ComplexField at(int n) const;
  double value_norm() const;
  SpaceTimeField operator-(const SpaceTimeField& o) const;
  SpaceTimeField operator+(const SpaceTimeField& o) const;
  SpaceTimeField scaled(cplx s) const;
};

inline cplx sample(const TimeSeries& s, int n) { return s.size() == 0 ? cplx{} : s[n]; }

inline ComplexField zero_field(const GridSpec& g) { return ComplexField::Zero(g.nodes()); }
inline TimeSeries zero_series(const GridSpec& g) { return TimeSeries::Zero(g.Nt + 1); }

// Trapezoidal weights on the time nodes.
Eigen::VectorXd time_weights(const GridSpec& g);

}  // namespace hnls
