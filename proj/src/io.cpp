#include "bgkso3/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace bgkso3 {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_phase_diagram_csv(std::ostream &out,
                             const std::vector<PhaseDiagramRow> &rows) {
  out << "rho,branch,alpha,d1,d2,d3,sig_plus,sig_zero,sig_minus,stable,"
         "near_critical\n";
  for (const PhaseDiagramRow &r : rows) {
    out << fmt_double(r.rho) << ',' << r.branch << ',' << fmt_double(r.alpha)
        << ',' << fmt_double(r.d_ssvd[0]) << ',' << fmt_double(r.d_ssvd[1])
        << ',' << fmt_double(r.d_ssvd[2]) << ',' << r.signature[0] << ','
        << r.signature[1] << ',' << r.signature[2] << ',' << (r.stable ? 1 : 0)
        << ',' << (r.near_critical ? 1 : 0) << '\n';
  }
}

void write_trajectory_csv(std::ostream &out, const Trajectory &traj) {
  out << "t,d1,d2,d3,V,rhs_norm\n";
  for (size_t k = 0; k < traj.times.size(); k++) {
    out << fmt_double(traj.times[k]) << ',' << fmt_double(traj.states[k][0])
        << ',' << fmt_double(traj.states[k][1]) << ','
        << fmt_double(traj.states[k][2]) << ',' << fmt_double(traj.potentials[k])
        << ',' << fmt_double(traj.grad_norms[k]) << '\n';
  }
}

void write_flux_series_csv(std::ostream &out, const FluxSeries &series) {
  out << "t,j11,j12,j13,j21,j22,j23,j31,j32,j33,frobenius_norm\n";
  for (size_t k = 0; k < series.times.size(); k++) {
    out << fmt_double(series.times[k]);
    const Mat3 &j = series.fluxes[k];
    for (int r = 0; r < 3; r++)
      for (int c = 0; c < 3; c++) out << ',' << fmt_double(j.m[r][c]);
    out << ',' << fmt_double(frobenius_norm(j)) << '\n';
  }
}

void write_coefficients_csv(std::ostream &out,
                            const std::vector<CoefficientRow> &rows) {
  out << "rho,alpha,alpha_prime,c1,c2_tilde,c3_tilde,c4,C2,C4,C5,mu2,flagged\n";
  for (const CoefficientRow &r : rows) {
    out << fmt_double(r.rho) << ',' << fmt_double(r.alpha) << ','
        << fmt_double(r.alpha_prime) << ',' << fmt_double(r.c1) << ','
        << fmt_double(r.c2_tilde) << ',' << fmt_double(r.c3_tilde) << ','
        << fmt_double(r.c4) << ',' << fmt_double(r.C2) << ','
        << fmt_double(r.C4) << ',' << fmt_double(r.C5) << ','
        << fmt_double(r.mu2) << ',' << (r.flagged ? 1 : 0) << '\n';
  }
}

namespace {

nlohmann::json mat3_json(const Mat3 &a) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < 3; r++)
    rows.push_back({a.m[r][0], a.m[r][1], a.m[r][2]});
  return rows;
}

}  // namespace

nlohmann::json critical_densities_json(const CriticalDensities &crit) {
  return {{"rho_star", crit.rho_star},
          {"alpha_star", crit.alpha_star},
          {"rho_c", crit.rho_c}};
}

nlohmann::json relax_summary_json(const RelaxSummary &summary) {
  nlohmann::json j = {{"kind", summary.kind},
                      {"alpha", summary.alpha},
                      {"converged", summary.converged}};
  if (summary.lambda) j["lambda"] = mat3_json(*summary.lambda);
  if (summary.rate) j["rate"] = *summary.rate;
  return j;
}

nlohmann::json sim_report_json(const SimSpec &spec,
                               const MeanfieldReport &report) {
  return {{"n", spec.n},
          {"rho_eff", spec.rho_eff},
          {"t_final", spec.t_final},
          {"checkpoint_dt", spec.checkpoint_dt},
          {"seed", spec.seed},
          {"coverage", report.coverage},
          {"times", report.times},
          {"deviations", report.deviations},
          {"bands", report.bands}};
}

nlohmann::json manifest_json(const std::string &command,
                             const std::vector<std::string> &args,
                             unsigned long long seed,
                             const QuadratureConfig &cfg,
                             const std::string &format) {
  return {{"command", command},
          {"args", args},
          {"seed", seed},
          {"nodes_1d", cfg.nodes_1d},
          {"nodes_s3", cfg.nodes_s3},
          {"format", format}};
}

Mat3 parse_matrix3(std::istream &in) {
  Mat3 a = Mat3::zero();
  for (int k = 0; k < 9; k++) {
    std::string tok;
    if (!(in >> tok)) {
      std::ostringstream msg;
      msg << "matrix parse error at row " << k / 3 + 1 << ", column "
          << k % 3 + 1 << ": expected 9 numbers, got " << k;
      throw std::runtime_error(msg.str());
    }
    size_t used = 0;
    double v = 0;
    bool ok = true;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception &) {
      ok = false;
    }
    if (!ok || used != tok.size()) {
      std::ostringstream msg;
      msg << "matrix parse error at row " << k / 3 + 1 << ", column "
          << k % 3 + 1 << ": '" << tok << "' is not a number";
      throw std::runtime_error(msg.str());
    }
    a.m[k / 3][k % 3] = v;
  }
  std::string extra;
  if (in >> extra)
    throw std::runtime_error(
        "matrix parse error: trailing content after 9 numbers");
  return a;
}

Mat3 load_matrix3(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file: " + path);
  return parse_matrix3(in);
}

}  // namespace bgkso3
