#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bgkso3/equilibria.hpp"
#include "bgkso3/flow.hpp"
#include "bgkso3/hydro.hpp"
#include "bgkso3/particles.hpp"

namespace bgkso3 {

// Locale-independent '%.17g' rendering, lossless for doubles.
std::string fmt_double(double v);

void write_phase_diagram_csv(std::ostream &out,
                             const std::vector<PhaseDiagramRow> &rows);
void write_trajectory_csv(std::ostream &out, const Trajectory &traj);
void write_flux_series_csv(std::ostream &out, const FluxSeries &series);
void write_coefficients_csv(std::ostream &out,
                            const std::vector<CoefficientRow> &rows);

nlohmann::json critical_densities_json(const CriticalDensities &crit);

struct RelaxSummary {
  std::string kind;
  double alpha = 0;
  std::optional<Mat3> lambda;  // orientation, present for stable aligned limits
  std::optional<double> rate;
  bool converged = false;
};

nlohmann::json relax_summary_json(const RelaxSummary &summary);

nlohmann::json sim_report_json(const SimSpec &spec, const MeanfieldReport &report);

// Reproducibility manifest; deliberately carries no timestamps so a rerun
// produces the identical file.
nlohmann::json manifest_json(const std::string &command,
                             const std::vector<std::string> &args,
                             unsigned long long seed,
                             const QuadratureConfig &cfg,
                             const std::string &format);

// Whitespace-separated 3x3 matrix. Reports the 1-based row/column of the
// first offending entry.
Mat3 parse_matrix3(std::istream &in);
Mat3 load_matrix3(const std::string &path);

}  // namespace bgkso3
