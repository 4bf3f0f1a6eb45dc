#include "bgkso3/vonmises.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bgkso3 {

namespace {

// Exponent slots of phi(diag(dhat)), paired so that the sign symmetries of
// dhat land on exactly mirrored slot values.
std::array<double, 4> phi_diag_slots(const DiagTriple &d) {
  const double u = d[1] + d[2];
  const double v = d[1] - d[2];
  return {0.25 * (d[0] + u), 0.25 * (d[0] - u), 0.25 * (v - d[0]),
          -0.25 * (d[0] + v)};
}

// a11, a22, a33 from <q_i^2>; the pairings keep every two-slot tie an exact
// mirror, so symmetric states produce exactly symmetric moments.
DiagTriple assemble_diag(const double p[4]) {
  return DiagTriple{(p[0] + p[1]) - (p[2] + p[3]),
                    (p[0] + p[2]) - (p[1] + p[3]),
                    (p[0] + p[3]) - (p[1] + p[2])};
}

constexpr double kSign[3][4] = {
    {1, 1, -1, -1}, {1, -1, 1, -1}, {1, -1, -1, 1}};

}  // namespace

double log_partition(const DiagTriple &dhat, const QuadratureConfig &cfg) {
  return bingham_moments(phi_diag_slots(dhat), cfg, false).log_z;
}

DiagTriple moment1_diag(const DiagTriple &dhat, const QuadratureConfig &cfg) {
  const BinghamMoments bm = bingham_moments(phi_diag_slots(dhat), cfg, false);
  return assemble_diag(bm.p);
}

Moment1LogZ moment1_logz(const DiagTriple &dhat, const QuadratureConfig &cfg) {
  const BinghamMoments bm = bingham_moments(phi_diag_slots(dhat), cfg, false);
  return {assemble_diag(bm.p), bm.log_z};
}

Mat3 moment2_diag(const DiagTriple &dhat, const QuadratureConfig &cfg) {
  const BinghamMoments bm = bingham_moments(phi_diag_slots(dhat), cfg, true);
  Mat3 m2 = Mat3::zero();
  for (int i = 0; i < 3; i++)
    for (int j = i; j < 3; j++) {
      double acc = 0;
      for (int u = 0; u < 4; u++)
        for (int v = 0; v < 4; v++)
          acc += kSign[i][u] * kSign[j][v] * bm.pp[u][v];
      m2.m[i][j] = acc;
      m2.m[j][i] = acc;
    }
  return m2;
}

VonMisesParams make_params(const FluxMatrix &J, const QuadratureConfig &cfg) {
  VonMisesParams p;
  p.J = J;
  p.svd = ssvd(J);
  p.log_z = log_partition(p.svd.D, cfg);
  p.exp_max = 0.5 * (p.svd.D[0] + p.svd.D[1] + p.svd.D[2]);
  return p;
}

double density(const VonMisesParams &params, const Rotation &A) {
  return std::exp(mat_dot(params.J, A) - params.log_z);
}

Mat3 moment_matrix(const FluxMatrix &J, const QuadratureConfig &cfg) {
  const SsvdResult f = ssvd(J);
  const DiagTriple m = moment1_diag(f.D, cfg);
  return matmul(f.P, matmul(Mat3::diag(m), f.Q));
}

double brace_mean(const std::function<double(double)> &h, double alpha,
                  const QuadratureConfig &cfg) {
  validate(cfg);
  const GaussLegendre &gl = gauss_legendre(cfg.nodes_1d);
  const double shift = std::fabs(alpha);
  double num = 0, den = 0;
  for (int i = 0; i < cfg.nodes_1d; i++) {
    const double theta = 0.5 * std::numbers::pi * (gl.x[i] + 1.0);
    const double sh = std::sin(0.5 * theta);
    const double w = gl.w[i] * sh * sh *
                     std::exp(alpha * std::cos(theta) - shift);
    den += w;
    num += w * h(theta);
  }
  return num / den;
}

double bracket_mean(const std::function<double(double)> &h, double alpha,
                    const QuadratureConfig &cfg) {
  validate(cfg);
  const GaussLegendre &gl = gauss_legendre(cfg.nodes_1d);
  const double shift = 0.5 * std::fabs(alpha);
  double num = 0, den = 0;
  for (int i = 0; i < cfg.nodes_1d; i++) {
    const double phi = 0.5 * std::numbers::pi * (gl.x[i] + 1.0);
    const double w = gl.w[i] * std::sin(phi) *
                     std::exp(0.5 * alpha * std::cos(phi) - shift);
    den += w;
    num += w * h(phi);
  }
  return num / den;
}

double c1(double alpha, const QuadratureConfig &cfg) {
  return brace_mean([](double t) { return 2.0 * std::cos(t) + 1.0; }, alpha,
                    cfg) /
         3.0;
}

double c2(double alpha, const QuadratureConfig &cfg) {
  return bracket_mean([](double t) { return std::cos(t); }, alpha, cfg);
}

double c1_prime(double alpha, const QuadratureConfig &cfg) {
  const double m1 = brace_mean([](double t) { return std::cos(t); }, alpha, cfg);
  const double m2 =
      brace_mean([](double t) { return std::cos(t) * std::cos(t); }, alpha, cfg);
  return (2.0 / 3.0) * (m2 - m1 * m1);
}

double c2_prime(double alpha, const QuadratureConfig &cfg) {
  const double m1 = bracket_mean([](double t) { return std::cos(t); }, alpha, cfg);
  const double m2 = bracket_mean([](double t) { return std::cos(t) * std::cos(t); },
                                 alpha, cfg);
  return 0.5 * (m2 - m1 * m1);
}

namespace {

Rotation rejection_sample(const FluxMatrix &J, double exp_max, Rng &rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (long attempt = 0; attempt < 10'000'000; attempt++) {
    const Rotation A = haar_sample(rng);
    const double accept = std::exp(mat_dot(J, A) - exp_max);
    if (unif(rng) < accept) return A;
  }
  throw std::runtime_error("vonmises sample: rejection cap exceeded");
}

}  // namespace

Rotation sample(const VonMisesParams &params, Rng &rng) {
  return rejection_sample(params.J, params.exp_max, rng);
}

Rotation sample_flux(const FluxMatrix &J, Rng &rng) {
  const SsvdResult f = ssvd(J);
  return rejection_sample(J, 0.5 * (f.D[0] + f.D[1] + f.D[2]), rng);
}

double c2_closed(double alpha) {
  if (std::fabs(alpha) < 1e-4) {
    // coth(a/2) - 2/a = a/6 - a^3/360 + ...
    return alpha / 6.0 - alpha * alpha * alpha / 360.0;
  }
  return 1.0 / std::tanh(0.5 * alpha) - 2.0 / alpha;
}

double log_partition_axis_closed(double alpha) {
  const double x = 0.5 * std::fabs(alpha);
  if (x < 1e-4) return x * x / 6.0 - x * x * x * x / 180.0;
  // log(sinh x / x), overflow-safe
  return x + std::log1p(-std::exp(-2.0 * x)) - std::log(2.0 * x);
}

double log_partition_iso_1d(double alpha, const QuadratureConfig &cfg) {
  validate(cfg);
  const GaussLegendre &gl = gauss_legendre(cfg.nodes_1d);
  const double shift = 0.5 * alpha + std::fabs(alpha);
  double z = 0;
  for (int i = 0; i < cfg.nodes_1d; i++) {
    const double theta = 0.5 * std::numbers::pi * (gl.x[i] + 1.0);
    const double sh = std::sin(0.5 * theta);
    z += gl.w[i] * sh * sh *
         std::exp(0.5 * alpha * (1.0 + 2.0 * std::cos(theta)) - shift);
  }
  // Gauss-Legendre maps [0,pi]; the (2/pi) density and the pi/2 interval
  // scale combine to a plain average over the [-1,1] weights.
  return shift + std::log(z);
}

Mat3 moment2_iso_1d(double alpha, const QuadratureConfig &cfg) {
  const double diag = brace_mean(
      [](double t) {
        const double c = std::cos(t);
        const double omc = 1.0 - c;
        return c * c + (2.0 / 3.0) * c * omc + omc * omc / 5.0;
      },
      alpha, cfg);
  const double off = brace_mean(
      [](double t) {
        const double c = std::cos(t);
        const double omc = 1.0 - c;
        return c * c + (2.0 / 3.0) * c * omc + omc * omc / 15.0;
      },
      alpha, cfg);
  Mat3 m;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++) m.m[i][j] = (i == j) ? diag : off;
  return m;
}

Mat3 moment2_axis_1d(double alpha, const QuadratureConfig &cfg) {
  const double cc =
      bracket_mean([](double t) { return std::cos(t) * std::cos(t); }, alpha, cfg);
  const double c = bracket_mean([](double t) { return std::cos(t); }, alpha, cfg);
  Mat3 m = Mat3::zero();
  m.m[0][0] = cc;
  m.m[1][1] = m.m[2][2] = 0.25 * (1.0 + cc);
  m.m[1][2] = m.m[2][1] = 0.5 * c;
  return m;
}

}  // namespace bgkso3
