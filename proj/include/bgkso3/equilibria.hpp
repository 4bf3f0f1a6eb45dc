#pragma once

#include <array>
#include <string>
#include <vector>

#include "bgkso3/quadrature.hpp"
#include "bgkso3/so3.hpp"
#include "bgkso3/vonmises.hpp"

namespace bgkso3 {

enum class EquilibriumKind { Uniform, TypeB, TypeC };

const char *kind_name(EquilibriumKind kind);

// signature counts are (n_plus, n_zero, n_minus)
struct EquilibriumRecord {
  double rho = 0;
  EquilibriumKind kind = EquilibriumKind::Uniform;
  double alpha = 0;
  DiagTriple d_ssvd{0, 0, 0};
  std::array<int, 3> signature{0, 0, 0};
  bool stable = false;
};

struct CriticalDensities {
  double rho_star = 0;
  double alpha_star = 0;
  double rho_c = 0;
};

// Roots of alpha = rho*c1(alpha), ascending; always contains 0.
std::vector<double> solve_c1_branches(double rho, const QuadratureConfig &cfg);

// Roots of alpha = rho*c2(alpha), ascending; {-a,0,a} above the critical
// density, {0} otherwise.
std::vector<double> solve_c2_branches(double rho, const QuadratureConfig &cfg);

CriticalDensities critical_densities(const QuadratureConfig &cfg);

// I3 - (rho/2)*Gamma, Gamma the covariance matrix of the diagonal entries
// under the von Mises law of parameter diag(dhat).
Mat3 hessian(const DiagTriple &dhat, double rho, const QuadratureConfig &cfg);

// Eigenvalue inertia (n_plus, n_zero, n_minus); zero_tol is relative to the
// largest |eigenvalue|.
std::array<int, 3> signature(const Mat3 &h, double zero_tol = 1e-9);

// All equilibria at this density with signatures and stability flags.
// Refuses densities within 1e-6 of either critical value.
std::vector<EquilibriumRecord> classify(double rho, const QuadratureConfig &cfg);

struct PhaseDiagramRow {
  double rho = 0;
  std::string branch;
  double alpha = 0;
  DiagTriple d_ssvd{0, 0, 0};
  std::array<int, 3> signature{0, 0, 0};
  bool stable = false;
  bool near_critical = false;
};

std::vector<PhaseDiagramRow> phase_diagram(double rho_min, double rho_max,
                                           int n_points,
                                           const QuadratureConfig &cfg);

}  // namespace bgkso3
