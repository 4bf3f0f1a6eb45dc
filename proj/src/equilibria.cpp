#include "bgkso3/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bgkso3 {

namespace {

double c1_residual(double alpha, double rho, const QuadratureConfig &cfg) {
  return alpha - rho * c1(alpha, cfg);
}

double c2_residual(double alpha, double rho, const QuadratureConfig &cfg) {
  return alpha - rho * c2(alpha, cfg);
}

template <typename F>
double bisect(F &&h, double lo, double hi, double h_lo) {
  for (int it = 0; it < 200; it++) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double h_mid = h(mid);
    if (h_mid == 0) return mid;
    if ((h_mid > 0) == (h_lo > 0)) {
      lo = mid;
      h_lo = h_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Minimiser of alpha/c1(alpha) on [1e-6, 20] by golden section.
double golden_alpha_star(const QuadratureConfig &cfg) {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  auto g = [&](double a) { return a / c1(a, cfg); };
  double lo = 1e-6, hi = 20.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double g1 = g(x1), g2 = g(x2);
  while (hi - lo > 1e-10) {
    if (g1 < g2) {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - inv_phi * (hi - lo);
      g1 = g(x1);
    } else {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + inv_phi * (hi - lo);
      g2 = g(x2);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

const char *kind_name(EquilibriumKind kind) {
  switch (kind) {
    case EquilibriumKind::Uniform: return "uniform";
    case EquilibriumKind::TypeB: return "typeB";
    case EquilibriumKind::TypeC: return "typeC";
  }
  return "unknown";
}

std::vector<double> solve_c1_branches(double rho, const QuadratureConfig &cfg) {
  if (!(rho >= 0)) throw std::invalid_argument("solve_c1_branches: rho < 0");
  std::vector<double> roots;
  auto h = [&](double a) { return c1_residual(a, rho, cfg); };
  if (rho > 0) {
    const double a_star = golden_alpha_star(cfg);
    const double hi = rho + 2.0;
    // Lower positive root: alpha/c1 is decreasing on (0, a_star].
    {
      const double h_lo = h(1e-12), h_mid = h(a_star);
      if (h_lo > 0 && h_mid < 0) roots.push_back(bisect(h, 1e-12, a_star, h_lo));
    }
    // Upper positive root: alpha/c1 is increasing on [a_star, inf).
    {
      const double h_lo = h(a_star), h_hi = h(hi);
      if (h_lo < 0 && h_hi > 0) roots.push_back(bisect(h, a_star, hi, h_lo));
    }
    // Negative root: alpha/c1 is decreasing on (-inf, 0), from +inf to 6.
    {
      const double h_lo = h(-hi), h_hi = h(-1e-12);
      if (h_lo < 0 && h_hi > 0) roots.push_back(bisect(h, -hi, -1e-12, h_lo));
    }
  }
  roots.erase(std::remove_if(roots.begin(), roots.end(),
                             [](double a) { return std::fabs(a) <= 1e-9; }),
              roots.end());
  roots.push_back(0.0);
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::vector<double> solve_c2_branches(double rho, const QuadratureConfig &cfg) {
  if (!(rho >= 0)) throw std::invalid_argument("solve_c2_branches: rho < 0");
  std::vector<double> roots{0.0};
  if (rho > 6.0) {
    auto h = [&](double a) { return c2_residual(a, rho, cfg); };
    const double hi = rho + 2.0;
    const double h_lo = h(1e-12), h_hi = h(hi);
    if (h_lo < 0 && h_hi > 0) {
      const double a2 = bisect(h, 1e-12, hi, h_lo);
      if (a2 > 1e-9) {
        roots.push_back(a2);
        roots.push_back(-a2);
      }
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

CriticalDensities critical_densities(const QuadratureConfig &cfg) {
  CriticalDensities crit;
  crit.rho_c = 1.0 / c1_prime(0.0, cfg);
  crit.alpha_star = golden_alpha_star(cfg);
  crit.rho_star = crit.alpha_star / c1(crit.alpha_star, cfg);
  return crit;
}

Mat3 hessian(const DiagTriple &dhat, double rho, const QuadratureConfig &cfg) {
  const DiagTriple m = moment1_diag(dhat, cfg);
  const Mat3 m2 = moment2_diag(dhat, cfg);
  Mat3 h = Mat3::zero();
  for (int i = 0; i < 3; i++)
    for (int j = i; j < 3; j++) {
      const double gamma = m2.m[i][j] - m[i] * m[j];
      double v = -0.5 * rho * gamma;
      if (i == j) v += 1.0;
      h.m[i][j] = v;
      h.m[j][i] = v;
    }
  return h;
}

std::array<int, 3> signature(const Mat3 &h, double zero_tol) {
  double asym = 0;
  for (int i = 0; i < 3; i++)
    for (int j = 0; j < 3; j++)
      asym = std::max(asym, std::fabs(h.m[i][j] - h.m[j][i]));
  if (asym > 1e-12) throw std::invalid_argument("signature: matrix not symmetric");
  Mat3 vecs;
  Vec3 eig;
  sym3_eigen(h, eig, vecs);
  double scale = 0;
  for (double l : eig) scale = std::max(scale, std::fabs(l));
  const double tol = zero_tol * scale;
  std::array<int, 3> sig{0, 0, 0};
  for (double l : eig) {
    if (std::fabs(l) <= tol)
      sig[1]++;
    else if (l > 0)
      sig[0]++;
    else
      sig[2]++;
  }
  return sig;
}

std::vector<EquilibriumRecord> classify(double rho, const QuadratureConfig &cfg) {
  if (!(rho >= 0)) throw std::invalid_argument("classify: rho < 0");
  const CriticalDensities crit = critical_densities(cfg);
  if (std::fabs(rho - crit.rho_star) < 1e-6 || std::fabs(rho - crit.rho_c) < 1e-6)
    throw std::domain_error(
        "classify: density within 1e-6 of a critical value, equilibria are "
        "non-hyperbolic there");

  std::vector<EquilibriumRecord> records;
  auto add = [&](EquilibriumKind kind, double alpha, const DiagTriple &d) {
    EquilibriumRecord rec;
    rec.rho = rho;
    rec.kind = kind;
    rec.alpha = alpha;
    rec.d_ssvd = d;
    rec.signature = signature(hessian(d, rho, cfg));
    rec.stable = rec.signature == std::array<int, 3>{3, 0, 0};
    records.push_back(rec);
  };

  add(EquilibriumKind::Uniform, 0.0, DiagTriple{0, 0, 0});
  for (double a : solve_c1_branches(rho, cfg)) {
    if (a == 0) continue;
    const double m = std::fabs(a);
    const DiagTriple d = a > 0 ? DiagTriple{a, a, a} : DiagTriple{m, m, -m};
    add(EquilibriumKind::TypeB, a, d);
  }
  for (double a : solve_c2_branches(rho, cfg)) {
    if (a <= 0) continue;  // -a is the same orbit
    add(EquilibriumKind::TypeC, a, DiagTriple{a, 0, 0});
  }
  return records;
}

std::vector<PhaseDiagramRow> phase_diagram(double rho_min, double rho_max,
                                           int n_points,
                                           const QuadratureConfig &cfg) {
  if (!(rho_min >= 0) || !(rho_min < rho_max))
    throw std::invalid_argument("phase_diagram: need 0 <= rho_min < rho_max");
  if (n_points < 2) throw std::invalid_argument("phase_diagram: n_points < 2");
  const CriticalDensities crit = critical_densities(cfg);

  std::vector<PhaseDiagramRow> rows;
  for (int k = 0; k < n_points; k++) {
    const double rho =
        rho_min + (rho_max - rho_min) * static_cast<double>(k) / (n_points - 1);
    const bool near_crit = std::fabs(rho - crit.rho_star) < 1e-6 ||
                           std::fabs(rho - crit.rho_c) < 1e-6;
    auto add = [&](const std::string &branch, double alpha, const DiagTriple &d) {
      PhaseDiagramRow row;
      row.rho = rho;
      row.branch = branch;
      row.alpha = alpha;
      row.d_ssvd = d;
      row.signature = signature(hessian(d, rho, cfg));
      row.stable = row.signature == std::array<int, 3>{3, 0, 0};
      row.near_critical = near_crit;
      rows.push_back(row);
    };

    add("uniform", 0.0, DiagTriple{0, 0, 0});
    std::vector<double> pos;
    for (double a : solve_c1_branches(rho, cfg)) {
      if (a == 0) continue;
      if (a > 0) {
        pos.push_back(a);
      } else {
        const double m = std::fabs(a);
        add("typeB_neg", a, DiagTriple{m, m, -m});
      }
    }
    std::sort(pos.begin(), pos.end());
    if (pos.size() == 2) add("typeB_lower", pos[0], DiagTriple{pos[0], pos[0], pos[0]});
    if (!pos.empty()) {
      const double a = pos.back();
      add("typeB_upper", a, DiagTriple{a, a, a});
    }
    for (double a : solve_c2_branches(rho, cfg)) {
      if (a == 0) continue;
      const double m = std::fabs(a);
      add(a > 0 ? "typeC_pos" : "typeC_neg", a, DiagTriple{m, 0, 0});
    }
  }
  return rows;
}

}  // namespace bgkso3
