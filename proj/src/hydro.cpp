#include "bgkso3/hydro.hpp"

#include <cmath>
#include <stdexcept>

namespace bgkso3 {

AlphaCoeffs alpha_coeffs(double alpha, const QuadratureConfig &cfg) {
  auto s2 = [](double t) { double s = std::sin(t); return s * s; };
  const double m_s2 = brace_mean(s2, alpha, cfg);
  const double m_s2c =
      brace_mean([&](double t) { return s2(t) * std::cos(t); }, alpha, cfg);

  AlphaCoeffs k;
  k.C2 = (2.0 / 3.0) * m_s2;
  k.C4 = (2.0 / 15.0) * brace_mean(
                            [&](double t) { return s2(t) * (1 + 4 * std::cos(t)); },
                            alpha, cfg);
  k.C5 = (2.0 / 15.0) * brace_mean(
                            [&](double t) { return s2(t) * (1 - std::cos(t)); },
                            alpha, cfg);
  k.c2_tilde = 0.2 *
               brace_mean([&](double t) { return s2(t) * (2 + 3 * std::cos(t)); },
                          alpha, cfg) /
               m_s2;
  k.c4 = 0.2 *
         brace_mean([&](double t) { return s2(t) * (1 - std::cos(t)); }, alpha,
                    cfg) /
         m_s2;
  k.mu2 = (1.0 / 3.0) * (m_s2 + 2.0 * m_s2c);
  return k;
}

double alpha_of_rho(double rho, const QuadratureConfig &cfg) {
  if (rho < 0) throw std::invalid_argument("alpha_of_rho: rho must be >= 0");
  const std::vector<double> roots = solve_c1_branches(rho, cfg);
  const double top = roots.back();
  return top > 0 ? top : 0.0;
}

double alpha_prime(double rho, const QuadratureConfig &cfg) {
  const CriticalDensities crit = critical_densities(cfg);
  if (!(rho > crit.rho_star + 1e-6))
    throw std::domain_error(
        "alpha_prime: rho must exceed the branch-birth density by 1e-6");
  const double a = alpha_of_rho(rho, cfg);
  return c1(a, cfg) / (1.0 - rho * c1_prime(a, cfg));
}

CoefficientRow sohb_coefficients(double rho, const QuadratureConfig &cfg) {
  const CriticalDensities crit = critical_densities(cfg);
  if (!(rho > crit.rho_star))
    throw std::domain_error("sohb_coefficients: no ordered branch at this rho");

  CoefficientRow row;
  row.rho = rho;
  row.alpha = alpha_of_rho(rho, cfg);
  row.alpha_prime = alpha_prime(rho, cfg);
  row.c1 = c1(row.alpha, cfg);
  const AlphaCoeffs k = alpha_coeffs(row.alpha, cfg);
  row.C2 = k.C2;
  row.C4 = k.C4;
  row.C5 = k.C5;
  row.c2_tilde = k.c2_tilde;
  row.c4 = k.c4;
  row.mu2 = k.mu2;
  // {(1+2cos)sin^2}/{sin^2} = mu2/(C2/2) by the definitions above
  row.c3_tilde = 1.0 / row.alpha +
                 (rho * row.alpha_prime / row.alpha) *
                     (1.5 * row.c1 + k.mu2 / k.C2);
  row.flagged = rho < crit.rho_star + 0.05;
  return row;
}

std::vector<CoefficientRow> coefficient_table(const std::vector<double> &rhos,
                                              const QuadratureConfig &cfg) {
  std::vector<CoefficientRow> rows;
  rows.reserve(rhos.size());
  for (double r : rhos) rows.push_back(sohb_coefficients(r, cfg));
  return rows;
}

double diffusion_coefficient(double rho) {
  if (!(rho >= 0) || rho >= 6)
    throw std::domain_error("diffusion_coefficient: needs 0 <= rho < 6");
  return (1.0 / 3.0) / (1.0 - rho / 6.0);
}

McEstimate gci_residual(const FluxMatrix &j, const Mat3 &p_skew,
                        const std::function<double(const Rotation &)> &f,
                        double f_mass, int n_mc, Rng &rng,
                        const QuadratureConfig &cfg) {
  if (!(det3(j) > 0))
    throw std::domain_error("gci_residual: det J must be positive");
  for (int r = 0; r < 3; r++)
    for (int c = 0; c < 3; c++)
      if (std::fabs(p_skew.m[r][c] + p_skew.m[c][r]) >
          1e-12 * (1.0 + frobenius_norm(p_skew)))
        throw std::invalid_argument("gci_residual: P must be skew-symmetric");
  if (n_mc < 2) throw std::invalid_argument("gci_residual: n_mc too small");

  const VonMisesParams params = make_params(j, cfg);
  const Mat3 lambda = polar_rotation(j);
  const Mat3 lp = matmul(lambda, p_skew);

  double mean = 0, m2 = 0;
  for (int i = 0; i < n_mc; i++) {
    const Rotation a = haar_sample(rng);
    const double lhs = f_mass * density(params, a) - f(a);
    const double v = lhs * (-mat_dot(lp, a));
    const double delta = v - mean;
    mean += delta / (i + 1);
    m2 += delta * (v - mean);
  }
  McEstimate est;
  est.value = mean;
  est.std_error = std::sqrt(m2 / n_mc / (n_mc - 1.0));
  return est;
}

}  // namespace bgkso3
