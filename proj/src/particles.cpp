#include "bgkso3/particles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace bgkso3 {

namespace {

Mat3 flux_from_scratch(const std::vector<Rotation> &orientations) {
  Mat3 s = Mat3::zero();
  for (const Rotation &a : orientations)
    for (int i = 0; i < 3; i++)
      for (int j = 0; j < 3; j++) s.m[i][j] += a.m[i][j];
  return s;
}

// Mean-field flux at time t for the ODE started from j0, in the J = K/rho_eff
// normalisation of the jump kernel. rho_eff = 0 decays exactly as e^{-t} j0.
class OdeFlux {
 public:
  OdeFlux(const FluxMatrix &j0, double rho_eff, double t_need,
          const FlowOptions &opts, const QuadratureConfig &cfg)
      : j0_(j0), rho_eff_(rho_eff) {
    if (rho_eff_ == 0) return;
    FlowOptions o = opts;
    o.t_max = std::max(opts.t_max, t_need + 1.0);
    const SsvdResult f = ssvd(rho_eff_ * j0);
    p_ = f.P;
    q_ = f.Q;
    const Trajectory traj = integrate(f.D, rho_eff_, o, cfg);
    dense_.emplace(traj.times, traj.states);
  }

  FluxMatrix at(double t) const {
    if (rho_eff_ == 0) return std::exp(-t) * j0_;
    const DiagTriple d = dense_->eval(t);
    return (1.0 / rho_eff_) * matmul(p_, matmul(Mat3::diag(d), q_));
  }

 private:
  FluxMatrix j0_;
  double rho_eff_;
  Rotation p_ = Mat3::identity(), q_ = Mat3::identity();
  std::optional<DenseTrajectory> dense_;
};

// Uniform pick and kernel resample, with the O(1) flux-sum update.
void apply_jump(Ensemble &ens, Rng &rng) {
  const int n = static_cast<int>(ens.orientations.size());
  std::uniform_int_distribution<int> pick(0, n - 1);
  const int i = pick(rng);
  const Rotation fresh = sample_flux(ens.rho_eff * empirical_flux(ens), rng);
  const Rotation &old = ens.orientations[static_cast<size_t>(i)];
  for (int r = 0; r < 3; r++)
    for (int c = 0; c < 3; c++)
      ens.flux_sum.m[r][c] += fresh.m[r][c] - old.m[r][c];
  ens.orientations[static_cast<size_t>(i)] = fresh;
  ens.jumps++;
  if (++ens.since_recompute >= 1000000) {
    ens.flux_sum = flux_from_scratch(ens.orientations);
    ens.since_recompute = 0;
  }
}

std::vector<double> series_deviations(const FluxSeries &series, double rho_eff,
                                      const FlowOptions &opts,
                                      const QuadratureConfig &cfg) {
  const OdeFlux ode(series.fluxes.front(), rho_eff, series.times.back(), opts,
                    cfg);
  std::vector<double> dev(series.times.size());
  for (size_t k = 0; k < series.times.size(); k++) {
    const FluxMatrix j_ode = ode.at(series.times[k]);
    dev[k] = frobenius_norm(series.fluxes[k] - j_ode);
  }
  return dev;
}

}  // namespace

FluxMatrix empirical_flux(const Ensemble &ens) {
  return (1.0 / static_cast<double>(ens.orientations.size())) * ens.flux_sum;
}

Ensemble init_ensemble(int n, const InitLaw &law, double rho_eff, Rng &rng) {
  if (n < 1) throw std::invalid_argument("init_ensemble: need n >= 1");
  Ensemble ens;
  ens.rho_eff = rho_eff;
  ens.orientations.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; i++) {
    ens.orientations.push_back(law.kind == InitLaw::Kind::Uniform
                                   ? haar_sample(rng)
                                   : sample_flux(law.j, rng));
  }
  ens.flux_sum = flux_from_scratch(ens.orientations);
  return ens;
}

void step(Ensemble &ens, Rng &rng) {
  const int n = static_cast<int>(ens.orientations.size());
  std::exponential_distribution<double> wait(static_cast<double>(n));
  ens.clock += wait(rng);
  apply_jump(ens, rng);
}

FluxSeries run(Ensemble &ens, double t_final, double checkpoint_dt, Rng &rng) {
  if (!(t_final > 0) || !(checkpoint_dt > 0))
    throw std::invalid_argument("run: t_final and checkpoint_dt must be > 0");
  const long n_checkpoints =
      static_cast<long>(std::floor(t_final / checkpoint_dt + 1e-9));
  FluxSeries series;
  long next = 0;
  auto flush_until = [&](double t) {
    while (next <= n_checkpoints &&
           static_cast<double>(next) * checkpoint_dt <= t) {
      series.times.push_back(static_cast<double>(next) * checkpoint_dt);
      series.fluxes.push_back(empirical_flux(ens));
      next++;
    }
  };
  flush_until(ens.clock);
  while (ens.clock < t_final) {
    const int n = static_cast<int>(ens.orientations.size());
    std::exponential_distribution<double> wait(static_cast<double>(n));
    const double t_jump = ens.clock + wait(rng);
    flush_until(t_jump);
    ens.clock = t_jump;
    apply_jump(ens, rng);
  }
  return series;
}

FluxSeries run_sim(const SimSpec &spec) {
  Rng rng(spec.seed);
  Ensemble ens = init_ensemble(spec.n, spec.law, spec.rho_eff, rng);
  return run(ens, spec.t_final, spec.checkpoint_dt, rng);
}

MeanfieldReport compare_meanfield(const FluxSeries &series, const SimSpec &spec,
                                  const FlowOptions &opts,
                                  const QuadratureConfig &cfg) {
  MeanfieldReport report;
  if (series.times.empty()) return report;
  report.times = series.times;
  report.deviations = series_deviations(series, spec.rho_eff, opts, cfg);

  const size_t n_cp = series.times.size();
  std::vector<double> sum_sq(n_cp, 0.0);
  const int n_replicas = 10;
  for (int r = 1; r <= n_replicas; r++) {
    SimSpec rep = spec;
    rep.seed = spec.seed + static_cast<unsigned long long>(r);
    const FluxSeries rs = run_sim(rep);
    const std::vector<double> dev = series_deviations(rs, spec.rho_eff, opts, cfg);
    for (size_t k = 0; k < n_cp && k < dev.size(); k++)
      sum_sq[k] += dev[k] * dev[k];
  }
  report.bands.resize(n_cp);
  size_t inside = 0;
  for (size_t k = 0; k < n_cp; k++) {
    report.bands[k] = 4.0 * std::sqrt(sum_sq[k] / n_replicas);
    if (report.deviations[k] <= report.bands[k]) inside++;
  }
  report.coverage = static_cast<double>(inside) / static_cast<double>(n_cp);
  return report;
}

ScalingReport meanfield_scaling(const SimSpec &base, const std::vector<int> &sizes,
                                const std::vector<int> &replicas,
                                const FlowOptions &opts,
                                const QuadratureConfig &cfg) {
  if (sizes.empty() || sizes.size() != replicas.size())
    throw std::invalid_argument("meanfield_scaling: sizes/replicas mismatch");
  ScalingReport report;
  report.sizes = sizes;
  for (size_t i = 0; i < sizes.size(); i++) {
    double acc = 0;
    for (int r = 0; r < replicas[i]; r++) {
      SimSpec s = base;
      s.n = sizes[i];
      s.seed = base.seed + 1000 * (static_cast<unsigned long long>(i) + 1) +
               static_cast<unsigned long long>(r);
      const FluxSeries series = run_sim(s);
      const std::vector<double> dev =
          series_deviations(series, base.rho_eff, opts, cfg);
      acc += *std::max_element(dev.begin(), dev.end());
    }
    report.max_devs.push_back(acc / replicas[i]);
  }
  double xm = 0, ym = 0;
  const size_t m = sizes.size();
  std::vector<double> lx(m), ly(m);
  for (size_t i = 0; i < m; i++) {
    lx[i] = std::log(static_cast<double>(sizes[i]));
    ly[i] = std::log(report.max_devs[i]);
    xm += lx[i];
    ym += ly[i];
  }
  xm /= static_cast<double>(m);
  ym /= static_cast<double>(m);
  double num = 0, den = 0;
  for (size_t i = 0; i < m; i++) {
    num += (lx[i] - xm) * (ly[i] - ym);
    den += (lx[i] - xm) * (lx[i] - xm);
  }
  report.slope = num / den;
  return report;
}

}  // namespace bgkso3
