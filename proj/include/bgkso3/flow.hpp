#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bgkso3/equilibria.hpp"
#include "bgkso3/quadrature.hpp"
#include "bgkso3/so3.hpp"
#include "bgkso3/vonmises.hpp"

namespace bgkso3 {

struct FlowOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double t_max = 200.0;
  double stop_grad_norm = 1e-9;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DiagTriple> states;
  std::vector<double> potentials;
  std::vector<double> grad_norms;
  bool converged = false;
  std::optional<DiagTriple> limit;
};

class StepSizeUnderflow : public std::runtime_error {
 public:
  StepSizeUnderflow(const std::string &msg, Trajectory traj)
      : std::runtime_error(msg), partial(std::move(traj)) {}
  Trajectory partial;
};

// rho * <A>_{M_diag(dhat)} - dhat, the negative potential gradient.
DiagTriple rhs(const DiagTriple &dhat, double rho, const QuadratureConfig &cfg);

// 0.5*|dhat|^2 - 2*rho*log Z(diag(dhat))
double potential(const DiagTriple &dhat, double rho, const QuadratureConfig &cfg);

// Adaptive embedded Runge-Kutta 5(4) relaxation. Stops once |rhs| drops to
// stop_grad_norm (converged) or at t_max. States started inside the singular
// value cone d1 >= d2 >= |d3| must stay there; a violation beyond 1e-7 throws
// since it indicates an integration bug rather than dynamics.
Trajectory integrate(const DiagTriple &d0, double rho, const FlowOptions &opts,
                     const QuadratureConfig &cfg);

// Full 3x3 relaxation via the diagonal reduction J(t) = P diag(D(t)) Q.
std::pair<FluxMatrix, Trajectory> relax_flux(const FluxMatrix &j0, double rho,
                                             const FlowOptions &opts,
                                             const QuadratureConfig &cfg);

enum class BasinLabel {
  Uniform,
  TypeBStable,    // aligned equilibrium alpha*(1,1,1), the generic attractor
  TypeBNegative,  // saddle |alpha|*(1,1,-1) reached only from its half-line
  TypeC,          // rank-one saddle (alpha,0,0) reached from {d2+d3=0}
  TypeBSaddle,    // the unstable aligned point in the bistable window
  UnknownBistable
};

const char *basin_name(BasinLabel label);

// Predicted limit from the exact basin geometry. In the bistable window only
// starts at zero or on a symmetry line are decided.
BasinLabel basin_label(const DiagTriple &d0, double rho,
                       const CriticalDensities &crit, const QuadratureConfig &cfg);

// C^1 monotone piecewise-cubic interpolation of trajectory states.
class DenseTrajectory {
 public:
  DenseTrajectory(std::vector<double> times, std::vector<DiagTriple> states);
  DiagTriple eval(double t) const;  // clamped to the sampled range
  double t_front() const { return t_.front(); }
  double t_back() const { return t_.back(); }

 private:
  std::vector<double> t_;
  std::vector<DiagTriple> y_;
  std::vector<DiagTriple> slope_;
};

// Pointwise reconstruction f(t,A) = e^{-t} f0(A) + rho int_0^t e^{-(t-s)}
// M_{J(s)}(A) ds over a relaxed trajectory in flux form J(s) = P diag(D(s)) Q.
// The s-integral runs on adaptive Simpson with the partition function
// memoised per time node. A converged trajectory extends past its last
// sample with the frozen limit state; otherwise the horizon is hard.
class DuhamelDensity {
 public:
  DuhamelDensity(std::function<double(const Rotation &)> f0, const Rotation &p,
                 const Rotation &q, Trajectory traj, double rho,
                 const QuadratureConfig &cfg);

  double operator()(double t, const Rotation &a) const;
  double horizon() const;
  double rho() const { return rho_; }

 private:
  struct Node {
    DiagTriple d;
    double log_z;
  };
  const Node &node(double s) const;

  std::function<double(const Rotation &)> f0_;
  Rotation p_, q_;
  Trajectory traj_;
  DenseTrajectory dense_;
  double rho_;
  QuadratureConfig cfg_;
  mutable std::map<double, Node> cache_;
};

struct McEstimate {
  double value = 0;
  double std_error = 0;
};

// Monte Carlo estimate of int f log f dA - 0.5*|j|^2 over Haar samples.
McEstimate free_energy(const FluxMatrix &j,
                       const std::function<double(const Rotation &)> &f_eval,
                       int n_mc, Rng &rng);

// Least-squares exponential rate of the trajectory tail; positive for decay.
double convergence_rate(const Trajectory &traj);

}  // namespace bgkso3
