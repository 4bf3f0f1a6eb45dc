#pragma once

#include <array>
#include <vector>

namespace bgkso3 {

struct QuadratureConfig {
  int nodes_1d = 128;  // Gauss-Legendre nodes for angle integrals on [0, pi]
  int nodes_s3 = 48;   // nodes per hyperspherical angle on S^3
};

void validate(const QuadratureConfig &cfg);  // throws std::invalid_argument

// Gauss-Legendre nodes and weights on [-1, 1], cached per order.
struct GaussLegendre {
  std::vector<double> x, w;
};
const GaussLegendre &gauss_legendre(int n);

// Moments of the density proportional to exp(2 q^T diag(s) q) on the unit
// sphere S^3, integrated in hyperspherical angles (psi1, psi2 in [0,pi],
// psi3 in [0,2pi]) with Gauss-Legendre x Gauss-Legendre x trapezoid nodes.
//
// The four slots of s are canonicalised by sorting before evaluation and
// slots whose s-values tie are averaged afterwards, so the computed moments
// are exactly equivariant under permutations of s.  The diagonal flux
// symmetries (entry swaps, paired sign flips) act as slot permutations, so
// this keeps the symmetry planes of the relaxation flow invariant to
// round-off rather than to quadrature accuracy.
struct BinghamMoments {
  double log_z;        // log of the partition value against normalised Haar
  double p[4];         // <q_i^2>
  double pp[4][4];     // <q_i^2 q_j^2>, filled when with_second
  bool with_second;
};

BinghamMoments bingham_moments(const std::array<double, 4> &s,
                               const QuadratureConfig &cfg, bool with_second);

}  // namespace bgkso3
