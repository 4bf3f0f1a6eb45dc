#pragma once

#include <functional>
#include <vector>

#include "bgkso3/equilibria.hpp"
#include "bgkso3/flow.hpp"
#include "bgkso3/quadrature.hpp"
#include "bgkso3/so3.hpp"
#include "bgkso3/vonmises.hpp"

namespace bgkso3 {

struct CoefficientRow {
  double rho = 0;
  double alpha = 0;        // maximal nonnegative root of alpha = rho*c1(alpha)
  double alpha_prime = 0;  // d alpha / d rho on that branch
  double c1 = 0;
  double c2_tilde = 0;
  double c3_tilde = 0;
  double c4 = 0;
  double C2 = 0;  // equals C3
  double C4 = 0;
  double C5 = 0;
  double mu2 = 0;  // the combination 2*mu
  bool flagged = false;  // rho close enough to the branch birth to distrust c3_tilde
};

// The alpha-parameterised core of the coefficient set, usable away from the
// alpha(rho) branch for limit studies.
struct AlphaCoeffs {
  double C2 = 0;
  double C4 = 0;
  double C5 = 0;
  double c2_tilde = 0;
  double c4 = 0;
  double mu2 = 0;
};

AlphaCoeffs alpha_coeffs(double alpha, const QuadratureConfig &cfg = {});

// 0 below the branch-birth density, the largest positive consistency root above.
double alpha_of_rho(double rho, const QuadratureConfig &cfg = {});

// Implicit-function derivative c1(a)/(1 - rho*c1'(a)); only defined once the
// ordered branch is hyperbolic, i.e. rho > rho_star + 1e-6.
double alpha_prime(double rho, const QuadratureConfig &cfg = {});

CoefficientRow sohb_coefficients(double rho, const QuadratureConfig &cfg = {});

std::vector<CoefficientRow> coefficient_table(const std::vector<double> &rhos,
                                              const QuadratureConfig &cfg = {});

// (1/3)/(1 - rho/6) for the disordered regime 0 <= rho < 6.
double diffusion_coefficient(double rho);

// Monte Carlo value of int L_J(f) psi_P dA where L_J(f) = mass*M_J - f and
// psi_P(A) = -(Lambda P) . A with Lambda the polar rotation of J. The caller
// supplies the exact mass of f since f is only known pointwise.
McEstimate gci_residual(const FluxMatrix &j, const Mat3 &p_skew,
                        const std::function<double(const Rotation &)> &f,
                        double f_mass, int n_mc, Rng &rng,
                        const QuadratureConfig &cfg = {});

}  // namespace bgkso3
