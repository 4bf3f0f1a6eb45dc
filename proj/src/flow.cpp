#include "bgkso3/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace bgkso3 {

namespace {

double norm_r3(const DiagTriple &v) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

bool in_cone(const DiagTriple &d, double tol) {
  return d[0] >= d[1] - tol && d[1] >= std::fabs(d[2]) - tol;
}

double cone_violation(const DiagTriple &d) {
  return std::max(d[1] - d[0], std::fabs(d[2]) - d[1]);
}

struct StageEval {
  DiagTriple f;
  double log_z;
  double gnorm;
};

StageEval eval_field(const DiagTriple &d, double rho, const QuadratureConfig &cfg) {
  const Moment1LogZ ml = moment1_logz(d, cfg);
  StageEval e;
  for (int i = 0; i < 3; i++) e.f[i] = rho * ml.m[i] - d[i];
  e.log_z = ml.log_z;
  e.gnorm = norm_r3(e.f);
  return e;
}

// Dormand-Prince 5(4) tableau
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187,
                 kA53 = 64448.0 / 6561, kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33,
                 kA63 = 46732.0 / 5247, kA64 = 49.0 / 176,
                 kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;

}  // namespace

DiagTriple rhs(const DiagTriple &dhat, double rho, const QuadratureConfig &cfg) {
  const DiagTriple m = moment1_diag(dhat, cfg);
  DiagTriple f;
  for (int i = 0; i < 3; i++) f[i] = rho * m[i] - dhat[i];
  return f;
}

double potential(const DiagTriple &dhat, double rho, const QuadratureConfig &cfg) {
  const double n2 = dhat[0] * dhat[0] + dhat[1] * dhat[1] + dhat[2] * dhat[2];
  return 0.5 * n2 - 2.0 * rho * log_partition(dhat, cfg);
}

Trajectory integrate(const DiagTriple &d0, double rho, const FlowOptions &opts,
                     const QuadratureConfig &cfg) {
  for (double v : d0)
    if (!std::isfinite(v)) throw std::invalid_argument("integrate: d0 not finite");
  if (!(opts.rtol > 0) || !(opts.atol > 0) || !(opts.t_max > 0))
    throw std::invalid_argument("integrate: options must be positive");

  const bool watch_cone = in_cone(d0, 0.0);
  Trajectory traj;
  auto record = [&](double t, const DiagTriple &y, double rho_, double log_z,
                    double gnorm) {
    const double n2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
    traj.times.push_back(t);
    traj.states.push_back(y);
    traj.potentials.push_back(0.5 * n2 - 2.0 * rho_ * log_z);
    traj.grad_norms.push_back(gnorm);
  };

  double t = 0;
  DiagTriple y = d0;
  StageEval e1 = eval_field(y, rho, cfg);
  record(t, y, rho, e1.log_z, e1.gnorm);
  if (e1.gnorm <= opts.stop_grad_norm) {
    traj.converged = true;
    traj.limit = y;
    return traj;
  }

  double h = std::min(0.1, 0.01 * (1.0 + norm_r3(y)) / (1e-12 + e1.gnorm));
  h = std::min(h, opts.t_max);
  double errold = 1e-4;
  // Local one-sided Lipschitz estimate from the two trailing stages. Keeping
  // h*lambda below 1 holds every mode of the step map strictly contracting,
  // so the iterates park at the equilibrium instead of bouncing inside the
  // error-tolerance band (which would stall |rhs| near rtol*|y|), and the
  // tail is sampled densely enough to fit the decay rate.
  double lam = 0;

  DiagTriple k1 = e1.f;
  for (long step = 0; step < 1000000; step++) {
    if (t >= opts.t_max - 1e-12 * opts.t_max) break;
    h = std::min(h, opts.t_max - t);
    if (h < 1e-14 * std::max(1.0, std::fabs(t)))
      throw StepSizeUnderflow("integrate: step size underflow", traj);

    DiagTriple y2, y3, y4, y5, y6, ynew;
    for (int i = 0; i < 3; i++) y2[i] = y[i] + h * (kA21 * k1[i]);
    const DiagTriple k2 = eval_field(y2, rho, cfg).f;
    for (int i = 0; i < 3; i++) y3[i] = y[i] + h * (kA31 * k1[i] + kA32 * k2[i]);
    const DiagTriple k3 = eval_field(y3, rho, cfg).f;
    for (int i = 0; i < 3; i++)
      y4[i] = y[i] + h * (kA41 * k1[i] + kA42 * k2[i] + kA43 * k3[i]);
    const DiagTriple k4 = eval_field(y4, rho, cfg).f;
    for (int i = 0; i < 3; i++)
      y5[i] = y[i] + h * (kA51 * k1[i] + kA52 * k2[i] + kA53 * k3[i] + kA54 * k4[i]);
    const DiagTriple k5 = eval_field(y5, rho, cfg).f;
    for (int i = 0; i < 3; i++)
      y6[i] = y[i] + h * (kA61 * k1[i] + kA62 * k2[i] + kA63 * k3[i] +
                          kA64 * k4[i] + kA65 * k5[i]);
    const DiagTriple k6 = eval_field(y6, rho, cfg).f;
    for (int i = 0; i < 3; i++)
      ynew[i] = y[i] + h * (kB1 * k1[i] + kB3 * k3[i] + kB4 * k4[i] +
                            kB5 * k5[i] + kB6 * k6[i]);
    const StageEval e7 = eval_field(ynew, rho, cfg);
    const DiagTriple &k7 = e7.f;

    DiagTriple dk, dy;
    for (int i = 0; i < 3; i++) {
      dk[i] = k7[i] - k6[i];
      dy[i] = ynew[i] - y6[i];
    }
    if (norm_r3(dy) > 0) lam = norm_r3(dk) / norm_r3(dy);

    double err = 0;
    for (int i = 0; i < 3; i++) {
      const double ei = h * (kE1 * k1[i] + kE3 * k3[i] + kE4 * k4[i] +
                             kE5 * k5[i] + kE6 * k6[i] + kE7 * k7[i]);
      const double sc =
          opts.atol + opts.rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / 3.0);

    if (err <= 1.0) {
      t += h;
      y = ynew;
      k1 = k7;
      record(t, y, rho, e7.log_z, e7.gnorm);
      if (watch_cone && cone_violation(y) > 1e-7)
        throw std::runtime_error(
            "integrate: trajectory left the singular-value cone, integration "
            "or quadrature inconsistency");
      if (e7.gnorm <= opts.stop_grad_norm) {
        traj.converged = true;
        traj.limit = y;
        return traj;
      }
      const double fac = err == 0
                             ? 5.0
                             : std::clamp(0.9 * std::pow(err, -0.2) *
                                              std::pow(errold, 0.08),
                                          0.2, 5.0);
      errold = std::max(err, 1e-10);
      h *= fac;
    } else {
      h *= std::min(1.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
    }
    if (lam > 0) h = std::min(h, 0.7 / lam);
  }
  traj.converged = traj.grad_norms.back() <= opts.stop_grad_norm;
  if (traj.converged) traj.limit = traj.states.back();
  return traj;
}

std::pair<FluxMatrix, Trajectory> relax_flux(const FluxMatrix &j0, double rho,
                                             const FlowOptions &opts,
                                             const QuadratureConfig &cfg) {
  const SsvdResult f = ssvd(j0);
  Trajectory traj = integrate(f.D, rho, opts, cfg);
  const DiagTriple d_end = traj.limit ? *traj.limit : traj.states.back();
  const FluxMatrix j_eq = matmul(f.P, matmul(Mat3::diag(d_end), f.Q));
  return {j_eq, std::move(traj)};
}

const char *basin_name(BasinLabel label) {
  switch (label) {
    case BasinLabel::Uniform: return "uniform";
    case BasinLabel::TypeBStable: return "typeB_stable";
    case BasinLabel::TypeBNegative: return "typeB_negative";
    case BasinLabel::TypeC: return "typeC";
    case BasinLabel::TypeBSaddle: return "typeB_saddle";
    case BasinLabel::UnknownBistable: return "unknown_bistable";
  }
  return "unknown";
}

BasinLabel basin_label(const DiagTriple &d0, double rho,
                       const CriticalDensities &crit,
                       const QuadratureConfig &cfg) {
  const double scale = std::max({std::fabs(d0[0]), std::fabs(d0[1]),
                                 std::fabs(d0[2]), 1.0});
  const double tol = 1e-12 * scale;
  if (!in_cone(d0, tol))
    throw std::invalid_argument("basin_label: d0 outside the singular-value cone");
  if (std::fabs(rho - crit.rho_star) < 1e-6 || std::fabs(rho - crit.rho_c) < 1e-6)
    throw std::domain_error("basin_label: density too close to a critical value");

  if (rho < crit.rho_star) return BasinLabel::Uniform;

  const bool zero = std::fabs(d0[0]) <= tol && std::fabs(d0[1]) <= tol &&
                    std::fabs(d0[2]) <= tol;
  const bool diag_line = std::fabs(d0[0] - d0[1]) <= tol &&
                         std::fabs(d0[1] - d0[2]) <= tol;
  const bool anti_plane = std::fabs(d0[1] + d0[2]) <= tol;
  const bool half_line = std::fabs(d0[0] - d0[1]) <= tol && anti_plane && !zero;

  if (rho > crit.rho_c) {
    if (zero) return BasinLabel::Uniform;
    if (half_line) return BasinLabel::TypeBNegative;
    if (anti_plane && d0[0] > d0[1] + tol) return BasinLabel::TypeC;
    return BasinLabel::TypeBStable;
  }

  // bistable window
  if (zero) return BasinLabel::Uniform;
  if (diag_line) {
    const std::vector<double> roots = solve_c1_branches(rho, cfg);
    double a_minus = 0, a_plus = 0;
    for (double a : roots)
      if (a > 0) {
        if (a_minus == 0)
          a_minus = a;
        else
          a_plus = std::max(a_plus, a);
      }
    if (a_plus == 0) a_plus = a_minus;
    if (std::fabs(d0[0] - a_minus) <= 1e-9 * (1.0 + a_minus))
      return BasinLabel::TypeBSaddle;
    return d0[0] < a_minus ? BasinLabel::Uniform : BasinLabel::TypeBStable;
  }
  if (half_line) return BasinLabel::Uniform;
  if (anti_plane && std::fabs(d0[1]) <= tol) return BasinLabel::Uniform;
  return BasinLabel::UnknownBistable;
}

DenseTrajectory::DenseTrajectory(std::vector<double> times,
                                 std::vector<DiagTriple> states)
    : t_(std::move(times)), y_(std::move(states)) {
  if (t_.empty() || t_.size() != y_.size())
    throw std::invalid_argument("DenseTrajectory: empty or mismatched input");
  const size_t n = t_.size();
  slope_.assign(n, DiagTriple{0, 0, 0});
  if (n == 1) return;
  for (int c = 0; c < 3; c++) {
    std::vector<double> dl(n - 1);
    for (size_t k = 0; k + 1 < n; k++)
      dl[k] = (y_[k + 1][c] - y_[k][c]) / (t_[k + 1] - t_[k]);
    if (n == 2) {
      slope_[0][c] = slope_[1][c] = dl[0];
      continue;
    }
    for (size_t k = 1; k + 1 < n; k++) {
      if (dl[k - 1] == 0 || dl[k] == 0 || (dl[k - 1] > 0) != (dl[k] > 0)) {
        slope_[k][c] = 0;
      } else {
        const double h0 = t_[k] - t_[k - 1], h1 = t_[k + 1] - t_[k];
        const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
        slope_[k][c] = (w1 + w2) / (w1 / dl[k - 1] + w2 / dl[k]);
      }
    }
    // one-sided endpoint slopes with the usual monotonicity clamp
    auto end_slope = [](double h0, double h1, double d0, double d1) {
      double m = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if ((m > 0) != (d0 > 0) || d0 == 0)
        m = 0;
      else if ((d0 > 0) != (d1 > 0) && std::fabs(m) > 3 * std::fabs(d0))
        m = 3 * d0;
      return m;
    };
    slope_[0][c] = end_slope(t_[1] - t_[0], t_[2] - t_[1], dl[0], dl[1]);
    slope_[n - 1][c] = end_slope(t_[n - 1] - t_[n - 2], t_[n - 2] - t_[n - 3],
                                 dl[n - 2], dl[n - 3]);
  }
}

DiagTriple DenseTrajectory::eval(double t) const {
  if (t <= t_.front()) return y_.front();
  if (t >= t_.back()) return y_.back();
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const size_t k = static_cast<size_t>(it - t_.begin()) - 1;
  const double h = t_[k + 1] - t_[k];
  const double x = (t - t_[k]) / h;
  const double h00 = (1 + 2 * x) * (1 - x) * (1 - x);
  const double h10 = x * (1 - x) * (1 - x);
  const double h01 = x * x * (3 - 2 * x);
  const double h11 = x * x * (x - 1);
  DiagTriple out;
  for (int c = 0; c < 3; c++)
    out[c] = h00 * y_[k][c] + h * h10 * slope_[k][c] + h01 * y_[k + 1][c] +
             h * h11 * slope_[k + 1][c];
  return out;
}

DuhamelDensity::DuhamelDensity(std::function<double(const Rotation &)> f0,
                               const Rotation &p, const Rotation &q,
                               Trajectory traj, double rho,
                               const QuadratureConfig &cfg)
    : f0_(std::move(f0)),
      p_(p),
      q_(q),
      traj_(std::move(traj)),
      dense_(traj_.times, traj_.states),
      rho_(rho),
      cfg_(cfg) {
  if (!(rho > 0)) throw std::invalid_argument("DuhamelDensity: rho must be >0");
  // initial-mass sanity check by Monte Carlo
  Rng rng(0x9e3779b97f4a7c15ull);
  const int n = 20000;
  double mean = 0, m2 = 0;
  for (int i = 0; i < n; i++) {
    const double v = f0_(haar_sample(rng));
    const double delta = v - mean;
    mean += delta / (i + 1);
    m2 += delta * (v - mean);
  }
  const double se = std::sqrt(m2 / n / (n - 1.0));
  if (std::fabs(mean - rho_) > 0.01 * rho_ + 4.0 * se)
    throw std::invalid_argument("DuhamelDensity: f0 mass differs from rho");
}

double DuhamelDensity::horizon() const {
  return traj_.converged ? std::numeric_limits<double>::infinity()
                         : traj_.times.back();
}

const DuhamelDensity::Node &DuhamelDensity::node(double s) const {
  auto it = cache_.find(s);
  if (it == cache_.end()) {
    Node nd;
    nd.d = dense_.eval(s);
    nd.log_z = log_partition(nd.d, cfg_);
    it = cache_.emplace(s, nd).first;
  }
  return it->second;
}

double DuhamelDensity::operator()(double t, const Rotation &a) const {
  if (t < 0 || t > horizon() + 1e-12)
    throw std::out_of_range("DuhamelDensity: time outside trajectory horizon");

  const Mat3 b = matmul(transpose(p_), matmul(a, transpose(q_)));
  auto maxwellian = [&](double s) {
    const Node &nd = node(s);
    const double dot =
        0.5 * (nd.d[0] * b.m[0][0] + nd.d[1] * b.m[1][1] + nd.d[2] * b.m[2][2]);
    return std::exp(dot - nd.log_z);
  };
  auto integrand = [&](double s) { return std::exp(s - t) * maxwellian(s); };

  // adaptive Simpson with a fixed absolute budget per call
  const double tol0 = 1e-10 * (1.0 + rho_);
  std::function<double(double, double, double, double, double, double, int)>
      simpson = [&](double lo, double hi, double flo, double fmid, double fhi,
                    double tol, int depth) -> double {
    const double mid = 0.5 * (lo + hi);
    const double lmid = 0.5 * (lo + mid), rmid = 0.5 * (mid + hi);
    const double fl = integrand(lmid), fr = integrand(rmid);
    const double whole = (hi - lo) / 6.0 * (flo + 4 * fmid + fhi);
    const double left = (mid - lo) / 6.0 * (flo + 4 * fl + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4 * fr + fhi);
    const double delta = left + right - whole;
    if (depth >= 24 || std::fabs(delta) <= 15 * tol)
      return left + right + delta / 15.0;
    return simpson(lo, mid, flo, fl, fmid, 0.5 * tol, depth + 1) +
           simpson(mid, hi, fmid, fr, fhi, 0.5 * tol, depth + 1);
  };

  double integral = 0;
  if (t > 0) {
    const double f_lo = integrand(0), f_hi = integrand(t);
    const double f_mid = integrand(0.5 * t);
    integral = simpson(0, t, f_lo, f_mid, f_hi, tol0, 0);
  }
  return std::exp(-t) * f0_(a) + rho_ * integral;
}

McEstimate free_energy(const FluxMatrix &j,
                       const std::function<double(const Rotation &)> &f_eval,
                       int n_mc, Rng &rng) {
  if (n_mc < 2) throw std::invalid_argument("free_energy: n_mc too small");
  double mean = 0, m2 = 0;
  for (int i = 0; i < n_mc; i++) {
    const double v = f_eval(haar_sample(rng));
    if (!(v > 0))
      throw std::runtime_error("free_energy: non-positive density sample");
    const double g = v * std::log(v);
    const double delta = g - mean;
    mean += delta / (i + 1);
    m2 += delta * (g - mean);
  }
  McEstimate est;
  est.value = mean - 0.5 * mat_dot(j, j);
  est.std_error = std::sqrt(m2 / n_mc / (n_mc - 1.0));
  return est;
}

double convergence_rate(const Trajectory &traj) {
  if (!traj.converged || !traj.limit)
    throw std::runtime_error("convergence_rate: trajectory did not converge");
  const DiagTriple lim = *traj.limit;
  const double upper = 1e-2 * (1.0 + norm_r3(lim));
  std::vector<double> ts, logr;
  for (size_t k = 0; k < traj.states.size(); k++) {
    DiagTriple diff;
    for (int c = 0; c < 3; c++) diff[c] = traj.states[k][c] - lim[c];
    const double r = norm_r3(diff);
    if (r >= 1e-10 && r <= upper) {
      ts.push_back(traj.times[k]);
      logr.push_back(std::log(r));
    }
  }
  if (ts.size() < 20)
    throw std::runtime_error("convergence_rate: fewer than 20 tail samples");
  double tm = 0, lm = 0;
  for (size_t i = 0; i < ts.size(); i++) {
    tm += ts[i];
    lm += logr[i];
  }
  tm /= static_cast<double>(ts.size());
  lm /= static_cast<double>(ts.size());
  double num = 0, den = 0;
  for (size_t i = 0; i < ts.size(); i++) {
    num += (ts[i] - tm) * (logr[i] - lm);
    den += (ts[i] - tm) * (ts[i] - tm);
  }
  return -num / den;
}

}  // namespace bgkso3
