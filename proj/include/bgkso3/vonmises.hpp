#pragma once

#include <functional>

#include "bgkso3/quadrature.hpp"
#include "bgkso3/so3.hpp"

namespace bgkso3 {

// Precomputed state for the density M_J(A) = exp(J . A) / Z(J).
struct VonMisesParams {
  FluxMatrix J;
  SsvdResult svd;
  double log_z;    // log Z(J), invariant on the orbit of J
  double exp_max;  // max_A J . A = (d1 + d2 + d3)/2, attained at A = P Q
};

VonMisesParams make_params(const FluxMatrix &J,
                           const QuadratureConfig &cfg = {});

double log_partition(const DiagTriple &dhat, const QuadratureConfig &cfg = {});

double density(const VonMisesParams &params, const Rotation &A);

// Diagonal of <A> under M_diag(dhat); off-diagonal entries vanish.
DiagTriple moment1_diag(const DiagTriple &dhat, const QuadratureConfig &cfg = {});

// First moment and log-partition from a single quadrature pass; what the
// relaxation ODE evaluates at every stage.
struct Moment1LogZ {
  DiagTriple m;
  double log_z;
};
Moment1LogZ moment1_logz(const DiagTriple &dhat, const QuadratureConfig &cfg = {});

// Symmetric 3x3 matrix of <a_ii a_jj> under M_diag(dhat).
Mat3 moment2_diag(const DiagTriple &dhat, const QuadratureConfig &cfg = {});

// <A> under M_J for a general flux matrix, via the singular frame of J.
Mat3 moment_matrix(const FluxMatrix &J, const QuadratureConfig &cfg = {});

// Weighted means over [0, pi]:
//   brace_mean:   weight sin^2(theta/2) exp(alpha cos theta)
//   bracket_mean: weight sin(phi) exp((alpha/2) cos phi)
double brace_mean(const std::function<double(double)> &h, double alpha,
                  const QuadratureConfig &cfg = {});
double bracket_mean(const std::function<double(double)> &h, double alpha,
                    const QuadratureConfig &cfg = {});

// Consistency functions and their derivatives.
double c1(double alpha, const QuadratureConfig &cfg = {});
double c2(double alpha, const QuadratureConfig &cfg = {});
double c1_prime(double alpha, const QuadratureConfig &cfg = {});
double c2_prime(double alpha, const QuadratureConfig &cfg = {});

// Exact rejection sampler; throws std::runtime_error after 1e7 rejections.
Rotation sample(const VonMisesParams &params, Rng &rng);

// Same rejection sampler without the partition-function cache; the envelope
// constant only needs the singular values.
Rotation sample_flux(const FluxMatrix &J, Rng &rng);

// Independent single-angle reference paths used for cross-checks.
double c2_closed(double alpha);                 // coth(alpha/2) - 2/alpha
double log_partition_axis_closed(double alpha); // dhat = (a,0,0)
double log_partition_iso_1d(double alpha, const QuadratureConfig &cfg = {});
Mat3 moment2_iso_1d(double alpha, const QuadratureConfig &cfg = {});
Mat3 moment2_axis_1d(double alpha, const QuadratureConfig &cfg = {});

}  // namespace bgkso3
