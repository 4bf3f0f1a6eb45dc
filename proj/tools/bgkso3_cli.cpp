#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bgkso3/equilibria.hpp"
#include "bgkso3/flow.hpp"
#include "bgkso3/hydro.hpp"
#include "bgkso3/io.hpp"
#include "bgkso3/particles.hpp"
#include "bgkso3/verify.hpp"

namespace {

using namespace bgkso3;

// Bad user input distinct from numerical failure (exit 1 vs exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOpts {
  unsigned long long seed = 1;
  QuadratureConfig cfg;
  std::string out = ".";
  std::string format = "csv";
  int jobs = 0;
  double t_max = 200.0;
  double tol = 1e-8;

  FlowOptions flow() const {
    FlowOptions o;
    o.rtol = tol;
    o.atol = tol * 1e-2;
    o.t_max = t_max;
    return o;
  }
};

template <typename F>
void parallel_for(int n, int jobs, F &&fn) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; i++) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; t++) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread &th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

void write_text(const std::string &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

void write_json(const std::string &path, const nlohmann::json &j) {
  write_text(path, j.dump(2) + "\n");
}

std::string table_path(const GlobalOpts &g, const std::string &stem) {
  return g.out + "/" + stem + (g.format == "json" ? ".json" : ".csv");
}

void emit_manifest(const GlobalOpts &g, const std::string &command,
                   const std::vector<std::string> &args) {
  write_json(g.out + "/manifest.json",
             manifest_json(command, args, g.seed, g.cfg, g.format));
}

std::vector<double> parse_rho_list(const std::string &text) {
  std::vector<double> rhos;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t used = 0;
      rhos.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception &) {
      throw UsageError("invalid --rho list entry: '" + tok + "'");
    }
  }
  if (rhos.empty()) throw UsageError("--rho list is empty");
  return rhos;
}

void parse_rho_range(const std::string &text, double &lo, double &hi, int &n) {
  const auto bad = [&] {
    throw UsageError("invalid --rho range '" + text +
                     "'; expected min:max:n with min < max and n >= 2");
  };
  std::stringstream ss(text);
  std::string a, b, c;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') ||
      !std::getline(ss, c))
    bad();
  try {
    lo = std::stod(a);
    hi = std::stod(b);
    n = std::stoi(c);
  } catch (const std::exception &) {
    bad();
  }
  if (!(lo >= 0) || !(lo < hi) || n < 2) bad();
}

nlohmann::json mat3_rows(const Mat3 &a) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < 3; r++) rows.push_back({a.m[r][0], a.m[r][1], a.m[r][2]});
  return rows;
}

int cmd_phase_diagram(const GlobalOpts &g, const std::string &range,
                      const std::vector<std::string> &args) {
  double lo = 0, hi = 0;
  int n = 0;
  parse_rho_range(range, lo, hi, n);
  const std::vector<PhaseDiagramRow> rows = phase_diagram(lo, hi, n, g.cfg);
  const CriticalDensities crit = critical_densities(g.cfg);

  if (g.format == "json") {
    nlohmann::json table = nlohmann::json::array();
    for (const PhaseDiagramRow &r : rows)
      table.push_back({{"rho", r.rho},
                       {"branch", r.branch},
                       {"alpha", r.alpha},
                       {"d", {r.d_ssvd[0], r.d_ssvd[1], r.d_ssvd[2]}},
                       {"signature", r.signature},
                       {"stable", r.stable},
                       {"near_critical", r.near_critical}});
    write_json(table_path(g, "phase_diagram"), table);
  } else {
    std::ostringstream csv;
    write_phase_diagram_csv(csv, rows);
    write_text(table_path(g, "phase_diagram"), csv.str());
  }
  write_json(g.out + "/critical_densities.json", critical_densities_json(crit));
  emit_manifest(g, "phase-diagram", args);
  return 0;
}

int cmd_relax(const GlobalOpts &g, const std::string &input, bool random,
              double rho, const std::vector<std::string> &args) {
  Mat3 j0 = Mat3::zero();
  if (random != input.empty())
    throw UsageError("relax needs exactly one of --input FILE or --random");
  if (random) {
    Rng rng(g.seed);
    std::normal_distribution<double> gauss(0.0, 0.5);
    for (int r = 0; r < 3; r++)
      for (int c = 0; c < 3; c++) j0.m[r][c] = gauss(rng);
  } else {
    try {
      j0 = load_matrix3(input);
    } catch (const std::exception &e) {
      throw UsageError(e.what());
    }
  }

  const auto [j_eq, traj] = relax_flux(j0, rho, g.flow(), g.cfg);

  RelaxSummary summary;
  summary.converged = traj.converged;
  const DiagTriple d = traj.limit ? *traj.limit : traj.states.back();
  const double scale = std::max({std::fabs(d[0]), std::fabs(d[1]),
                                 std::fabs(d[2])});
  const double tol = 1e-6 * (1.0 + scale);
  if (scale < 1e-6) {
    summary.kind = "Uniform";
    summary.alpha = 0;
  } else if (std::fabs(d[0] - d[1]) < tol && std::fabs(d[1] - d[2]) < tol) {
    summary.kind = "TypeB";
    summary.alpha = (d[0] + d[1] + d[2]) / 3.0;
    summary.lambda = (1.0 / summary.alpha) * j_eq;
  } else if (std::fabs(d[0] - d[1]) < tol && std::fabs(d[1] + d[2]) < tol) {
    summary.kind = "TypeB";
    summary.alpha = -d[0];
  } else if (std::fabs(d[1]) < tol && std::fabs(d[2]) < tol) {
    summary.kind = "TypeC";
    summary.alpha = d[0];
  } else {
    summary.kind = "Unclassified";
    summary.alpha = 0;
  }
  try {
    summary.rate = convergence_rate(traj);
  } catch (const std::exception &) {
  }

  if (g.format == "json") {
    nlohmann::json table = nlohmann::json::array();
    for (size_t k = 0; k < traj.times.size(); k++)
      table.push_back({{"t", traj.times[k]},
                       {"d", {traj.states[k][0], traj.states[k][1],
                              traj.states[k][2]}},
                       {"V", traj.potentials[k]},
                       {"rhs_norm", traj.grad_norms[k]}});
    write_json(table_path(g, "trajectory"), table);
  } else {
    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    write_text(table_path(g, "trajectory"), csv.str());
  }
  write_json(g.out + "/relax_summary.json", relax_summary_json(summary));
  emit_manifest(g, "relax", args);
  return 0;
}

int cmd_simulate(const GlobalOpts &g, int n, double rho_eff, double dt,
                 double init_alpha, const std::vector<std::string> &args) {
  SimSpec spec;
  spec.n = n;
  spec.rho_eff = rho_eff;
  spec.t_final = g.t_max;
  spec.checkpoint_dt = dt;
  spec.seed = g.seed;
  spec.law = init_alpha == 0
                 ? InitLaw::uniform()
                 : InitLaw::vonmises(init_alpha * Mat3::identity());

  const FluxSeries series = run_sim(spec);
  const MeanfieldReport report = compare_meanfield(series, spec, g.flow(), g.cfg);

  if (g.format == "json") {
    nlohmann::json table = nlohmann::json::array();
    for (size_t k = 0; k < series.times.size(); k++)
      table.push_back({{"t", series.times[k]},
                       {"j", mat3_rows(series.fluxes[k])},
                       {"frobenius_norm", frobenius_norm(series.fluxes[k])}});
    write_json(table_path(g, "flux_series"), table);
  } else {
    std::ostringstream csv;
    write_flux_series_csv(csv, series);
    write_text(table_path(g, "flux_series"), csv.str());
  }
  write_json(g.out + "/sim_report.json", sim_report_json(spec, report));
  emit_manifest(g, "simulate", args);
  return 0;
}

int cmd_coeffs(const GlobalOpts &g, const std::string &rho_list,
               const std::vector<std::string> &args) {
  const std::vector<double> rhos = parse_rho_list(rho_list);
  std::vector<CoefficientRow> rows(rhos.size());
  parallel_for(static_cast<int>(rhos.size()), g.jobs, [&](int i) {
    rows[static_cast<size_t>(i)] =
        sohb_coefficients(rhos[static_cast<size_t>(i)], g.cfg);
  });

  if (g.format == "json") {
    nlohmann::json table = nlohmann::json::array();
    for (const CoefficientRow &r : rows)
      table.push_back({{"rho", r.rho},
                       {"alpha", r.alpha},
                       {"alpha_prime", r.alpha_prime},
                       {"c1", r.c1},
                       {"c2_tilde", r.c2_tilde},
                       {"c3_tilde", r.c3_tilde},
                       {"c4", r.c4},
                       {"C2", r.C2},
                       {"C4", r.C4},
                       {"C5", r.C5},
                       {"mu2", r.mu2},
                       {"flagged", r.flagged}});
    write_json(table_path(g, "coefficients"), table);
  } else {
    std::ostringstream csv;
    write_coefficients_csv(csv, rows);
    write_text(table_path(g, "coefficients"), csv.str());
  }
  emit_manifest(g, "coeffs", args);
  return 0;
}

int cmd_verify(const GlobalOpts &g, const std::string &suite) {
  VerifyReport report;
  try {
    report = run_suite(suite, g.cfg);
  } catch (const std::invalid_argument &) {
    std::ostringstream msg;
    msg << "unknown suite '" << suite << "'; available:";
    for (const std::string &s : suite_names()) msg << ' ' << s;
    throw UsageError(msg.str());
  }
  std::printf("suite %s\n", report.suite.c_str());
  for (const VerifyCheck &c : report.checks)
    std::printf("  [%s] %-24s %s\n", c.ok ? "PASS" : "FAIL", c.name.c_str(),
                c.detail.c_str());
  std::printf("%s\n", report.ok ? "OK" : "FAILED");
  return report.ok ? 0 : 2;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Alignment phase transitions of a rotation-valued kinetic model"};
  app.set_config("--config");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--seed", g.seed, "RNG seed");
  app.add_option("--nodes-1d", g.cfg.nodes_1d, "Gauss-Legendre node count");
  app.add_option("--nodes-s3", g.cfg.nodes_s3, "angular node count");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--format", g.format, "table format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--jobs", g.jobs, "worker threads for sweeps (0 = cores)");
  app.add_option("--t-max", g.t_max, "time horizon");
  app.add_option("--tol", g.tol, "relative ODE tolerance");

  CLI::App *pd = app.add_subcommand("phase-diagram", "equilibrium branch sweep");
  std::string pd_range;
  pd->add_option("--rho", pd_range, "density range min:max:n")->required();

  CLI::App *rl = app.add_subcommand("relax", "gradient-flow relaxation");
  std::string rl_input;
  bool rl_random = false;
  double rl_rho = 8.0;
  rl->add_option("--input", rl_input, "file with a 3x3 flux matrix");
  rl->add_flag("--random", rl_random, "draw the initial flux from the seed");
  rl->add_option("--rho", rl_rho, "density");

  CLI::App *sim = app.add_subcommand("simulate", "jump-process simulation");
  int sim_n = 1000;
  double sim_rho = 1.0, sim_dt = 0.1, sim_init_alpha = 0.0;
  sim->add_option("--n", sim_n, "ensemble size")->check(CLI::PositiveNumber);
  sim->add_option("--rho", sim_rho, "effective alignment density");
  sim->add_option("--checkpoint-dt", sim_dt, "flux recording interval")
      ->check(CLI::PositiveNumber);
  sim->add_option("--init-alpha", sim_init_alpha,
                  "start from the von Mises law with this concentration");

  CLI::App *cf = app.add_subcommand("coeffs", "macroscopic coefficient table");
  std::string cf_rhos;
  cf->add_option("--rho", cf_rhos, "comma-separated density list")->required();

  CLI::App *vf = app.add_subcommand("verify", "module invariant suites");
  std::string vf_suite = "all";
  vf->add_option("suite", vf_suite, "suite name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << e.what() << "\n";
    return 1;
  }

  const std::vector<std::string> args(argv + 1, argv + argc);
  try {
    std::filesystem::create_directories(g.out);
    if (pd->parsed()) return cmd_phase_diagram(g, pd_range, args);
    if (rl->parsed()) return cmd_relax(g, rl_input, rl_random, rl_rho, args);
    if (sim->parsed())
      return cmd_simulate(g, sim_n, sim_rho, sim_dt, sim_init_alpha, args);
    if (cf->parsed()) return cmd_coeffs(g, cf_rhos, args);
    if (vf->parsed()) return cmd_verify(g, vf_suite);
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
