#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hnls/forward.hpp"
#include "hnls/problem.hpp"

namespace hnls {

struct CriterionRow {
  int id = 0;
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerificationReport {
  std::string suite;
  std::vector<CriterionRow> rows;
  bool all_pass() const;
};

// Built-in fixtures shared with the runner.
// a=1, b=1, R=3, T=1 with a gaussian start and both interior sources on.
ForwardInput standard_energy_input(int Nx, int Nt);
// Cubic equation (lambda=1, p0=2), R=3, a=1, b=1, T=1, data rescaled to c0.
ControlProblem standard_cubic_problem(int Nx, int Nt, double c0);

// Criteria 1..11; throws ConfigError for other ids.
CriterionRow run_criterion(int id, std::uint64_t seed = 20240601);

// all | duality | energy | gramian | criticality | picard | inequalities
std::vector<int> suite_criteria(const std::string& suite);
VerificationReport verify(const std::string& suite, std::uint64_t seed = 20240601);

std::string format_row(const CriterionRow& row);

}  // namespace hnls
