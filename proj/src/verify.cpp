#include "bgkso3/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "bgkso3/equilibria.hpp"
#include "bgkso3/flow.hpp"
#include "bgkso3/hydro.hpp"
#include "bgkso3/so3.hpp"
#include "bgkso3/vonmises.hpp"

namespace bgkso3 {

namespace {

struct Collector {
  std::vector<VerifyCheck> checks;

  void bound(const std::string &name, double value, double limit) {
    std::ostringstream detail;
    detail << value << " vs limit " << limit;
    checks.push_back({name, value <= limit, detail.str()});
  }

  void flag(const std::string &name, bool ok, const std::string &detail) {
    checks.push_back({name, ok, detail});
  }
};

Mat3 random_mat3(Rng &rng) {
  std::normal_distribution<double> gauss;
  Mat3 a;
  for (int r = 0; r < 3; r++)
    for (int c = 0; c < 3; c++) a.m[r][c] = gauss(rng);
  return a;
}

void suite_so3(Collector &col) {
  Rng rng(11);
  double worst_rt = 0, worst_defect = 0;
  for (int i = 0; i < 200; i++) {
    const Rotation a = haar_sample(rng);
    const AxisAngle aa = axis_angle(a);
    const Rotation b = rodrigues(aa.theta, aa.axis);
    worst_rt = std::max(worst_rt, max_abs_diff(a, b));
    worst_defect = std::max(worst_defect, rotation_defect(a));
  }
  col.bound("rodrigues_roundtrip", worst_rt, 1e-12);
  col.bound("sample_orthogonality", worst_defect, 1e-13);

  double worst_svd = 0, worst_cone = 0;
  for (int i = 0; i < 200; i++) {
    const Mat3 m = random_mat3(rng);
    const SsvdResult f = ssvd(m);
    const Mat3 back = matmul(f.P, matmul(Mat3::diag(f.D), f.Q));
    worst_svd = std::max(worst_svd, max_abs_diff(m, back));
    worst_svd = std::max(worst_svd, rotation_defect(f.P));
    worst_svd = std::max(worst_svd, rotation_defect(f.Q));
    worst_cone = std::max(worst_cone, f.D[1] - f.D[0]);
    worst_cone = std::max(worst_cone, std::fabs(f.D[2]) - f.D[1]);
  }
  col.bound("ssvd_reconstruction", worst_svd, 1e-12);
  col.bound("ssvd_cone_order", worst_cone, 0.0);

  std::normal_distribution<double> gauss;
  double worst_bridge = 0;
  for (int i = 0; i < 200; i++) {
    Vec4 q;
    double n2 = 0;
    for (double &x : q) {
      x = gauss(rng);
      n2 += x * x;
    }
    for (double &x : q) x /= std::sqrt(n2);
    const Mat3 j = random_mat3(rng);
    const Sym4 s = phi_map(j);
    double quad = 0;
    for (int r = 0; r < 4; r++)
      for (int c = 0; c < 4; c++) quad += q[r] * s.at(r, c) * q[c];
    const double lhs = 0.5 * mat_dot(j, quat_to_rot(q));
    worst_bridge = std::max(worst_bridge, std::fabs(lhs - quad));
  }
  col.bound("quaternion_bridge", worst_bridge, 1e-12);
}

void suite_haar(Collector &col) {
  Rng rng(12);
  const int n = 20000;
  Mat3 mean = Mat3::zero();
  double m11_sq = 0;
  bool horn_ok = true;
  for (int i = 0; i < n; i++) {
    const Rotation a = haar_sample(rng);
    horn_ok = horn_ok && horn_check({a.m[0][0], a.m[1][1], a.m[2][2]}, 1e-10);
    mean = mean + a;
    m11_sq += a.m[0][0] * a.m[0][0];
  }
  mean = (1.0 / n) * mean;
  m11_sq /= n;
  col.flag("horn_facets", horn_ok, horn_ok ? "all inside" : "facet violated");
  // entry variance 1/3 under the uniform law
  col.bound("mean_entries", frobenius_norm(mean), 5.0 * std::sqrt(9.0 / 3.0 / n));
  col.bound("entry_second_moment", std::fabs(m11_sq - 1.0 / 3.0),
            5.0 * std::sqrt(0.2 / n));
}

void suite_vonmises(Collector &col, const QuadratureConfig &cfg) {
  double worst_axis = 0;
  for (double a : {0.5, 2.0, 10.0}) {
    const double num = log_partition({a, 0, 0}, cfg);
    worst_axis = std::max(worst_axis,
                          std::fabs(num - log_partition_axis_closed(a)));
  }
  col.bound("axis_log_partition", worst_axis, 1e-10);

  double worst_c2 = 0;
  for (double a : {0.3, 3.0, 12.0})
    worst_c2 = std::max(worst_c2, std::fabs(c2(a, cfg) - c2_closed(a)));
  col.bound("c2_closed_form", worst_c2, 1e-10);

  const double alpha = 2.0;
  const DiagTriple m = moment1_diag({alpha, alpha, alpha}, cfg);
  const double c = c1(alpha, cfg);
  const double dev = std::max({std::fabs(m[0] - c), std::fabs(m[1] - c),
                               std::fabs(m[2] - c)});
  col.bound("iso_moment_vs_c1", dev, 1e-10);

  QuadratureConfig fine = cfg;
  fine.nodes_1d *= 2;
  fine.nodes_s3 *= 2;
  const DiagTriple d{1.5, 0.7, -0.2};
  col.bound("node_doubling",
            std::fabs(log_partition(d, cfg) - log_partition(d, fine)), 1e-10);
}

void suite_equilibria(Collector &col, const QuadratureConfig &cfg) {
  const CriticalDensities crit = critical_densities(cfg);
  col.bound("rho_c_is_six", std::fabs(crit.rho_c - 6.0), 1e-8);
  col.flag("rho_star_window", crit.rho_star > 4.0 && crit.rho_star < 6.0,
           "rho_star = " + std::to_string(crit.rho_star));

  const std::vector<EquilibriumRecord> eq = classify(8.0, cfg);
  bool found_stable = false, found_uniform = false;
  for (const EquilibriumRecord &r : eq) {
    if (r.kind == EquilibriumKind::TypeB && r.alpha > 0 && r.stable)
      found_stable = true;
    if (r.kind == EquilibriumKind::Uniform && r.signature[2] == 3)
      found_uniform = true;
  }
  col.flag("classify_rho8", found_stable && found_uniform,
           "stable aligned branch and fully unstable uniform expected");

  const Mat3 h = hessian({0, 0, 0}, 3.0, cfg);
  const Mat3 expect = (1.0 - 3.0 / 6.0) * Mat3::identity();
  col.bound("uniform_hessian", max_abs_diff(h, expect), 1e-9);
}

void suite_flow(Collector &col, const QuadratureConfig &cfg) {
  FlowOptions opts;
  const Trajectory traj = integrate({0.5, 0.4, 0.3}, 8.0, opts, cfg);
  col.flag("relaxation_converges", traj.converged,
           traj.converged ? "converged" : "hit t_max");

  double alpha1 = 0;
  for (double a : solve_c1_branches(8.0, cfg)) alpha1 = std::max(alpha1, a);
  double dev = 0;
  if (traj.limit)
    for (int i = 0; i < 3; i++)
      dev = std::max(dev, std::fabs((*traj.limit)[i] - alpha1));
  col.bound("limit_on_aligned_branch", traj.limit ? dev : 1.0, 1e-6);

  double worst_increase = 0;
  for (size_t k = 1; k < traj.potentials.size(); k++)
    worst_increase =
        std::max(worst_increase, traj.potentials[k] - traj.potentials[k - 1]);
  col.bound("potential_descent", worst_increase, 1e-12);
}

void suite_hydro(Collector &col, const QuadratureConfig &cfg) {
  col.bound("diffusion_at_zero", std::fabs(diffusion_coefficient(0) - 1.0 / 3),
            1e-15);
  col.bound("diffusion_at_three", std::fabs(diffusion_coefficient(3) - 2.0 / 3),
            1e-15);

  const AlphaCoeffs k = alpha_coeffs(2.0, cfg);
  col.bound("c2_tilde_identity", std::fabs((k.C4 + k.C5) / k.C2 - k.c2_tilde),
            1e-12);
  col.bound("c4_identity", std::fabs(k.C5 / k.C2 - k.c4), 1e-12);

  const double h = 1e-4;
  const double fd = (alpha_of_rho(8 + h, cfg) - alpha_of_rho(8 - h, cfg)) / (2 * h);
  const double ap = alpha_prime(8, cfg);
  col.bound("alpha_prime_fd", std::fabs(ap - fd) / std::fabs(fd), 1e-5);
}

}  // namespace

std::vector<std::string> suite_names() {
  return {"so3", "haar", "vonmises", "equilibria", "flow", "hydro", "all"};
}

VerifyReport run_suite(const std::string &name, const QuadratureConfig &cfg) {
  Collector col;
  bool known = false;
  auto want = [&](const char *suite) {
    const bool match = name == suite || name == "all";
    known = known || name == suite;
    return match;
  };
  if (want("so3")) suite_so3(col);
  if (want("haar")) suite_haar(col);
  if (want("vonmises")) suite_vonmises(col, cfg);
  if (want("equilibria")) suite_equilibria(col, cfg);
  if (want("flow")) suite_flow(col, cfg);
  if (want("hydro")) suite_hydro(col, cfg);
  if (!known && name != "all")
    throw std::invalid_argument("unknown verify suite: " + name);

  VerifyReport report;
  report.suite = name;
  report.checks = std::move(col.checks);
  report.ok = true;
  for (const VerifyCheck &c : report.checks) report.ok = report.ok && c.ok;
  return report;
}

}  // namespace bgkso3
