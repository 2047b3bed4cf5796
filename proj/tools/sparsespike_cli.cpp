// Command line front end.
//
//   simulate      draw one sample set and dump it as CSV
//   estimate      run one estimator on a fresh draw, print support + diagnostics
//   sdp-solve     solve the relaxation on a matrix read from a CSV file
//   bounds-check  solve one instance and print every bound report as CSV
//   experiment    run a campaign from a JSON config file or a named preset
//
// Exit status: 0 on success, 1 on parameter or config errors, 2 when a
// campaign's failure fraction exceeds the configured cap.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sparsespike/bounds.hpp"
#include "sparsespike/harness.hpp"

namespace {

using namespace sparsespike;

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

// Plain numeric CSV, one row per line; '#' lines are skipped. Commas or
// whitespace both work as separators.
RowMatrix read_matrix_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (char& c : line)
      if (c == ',' || c == '\t') c = ' ';
    std::istringstream ss(line);
    std::vector<double> row;
    double v;
    while (ss >> v) row.push_back(v);
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(path + ": ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no numeric rows");
  RowMatrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_matrix_csv(const SymMatrix& a, std::ostream& os) {
  for (std::size_t i = 0; i < a.dim(); ++i) {
    for (std::size_t j = 0; j < a.dim(); ++j) {
      if (j) os << ',';
      os << detail::format_double(a(i, j));
    }
    os << '\n';
  }
}

struct InstanceArgs {
  std::size_t n = 100, p = 50, k = 5;
  double beta = 1.0;
  std::uint64_t seed = 1;
};

void add_instance_flags(CLI::App* cmd, InstanceArgs& a) {
  cmd->add_option("--n", a.n, "sample count")->check(CLI::PositiveNumber);
  cmd->add_option("--p", a.p, "dimension")->check(CLI::PositiveNumber);
  cmd->add_option("--k", a.k, "support size")->check(CLI::PositiveNumber);
  cmd->add_option("--beta", a.beta, "signal strength")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", a.seed, "draw seed");
}

struct SolverArgs {
  double rho = 1.0;
  double tol = 1e-6;
  std::size_t max_iter = 5000;

  SdpOptions options() const { return SdpOptions{rho, tol, max_iter}; }
};

void add_solver_flags(CLI::App* cmd, SolverArgs& s) {
  cmd->add_option("--rho", s.rho, "ADMM penalty")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", s.tol, "relative residual tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", s.max_iter, "iteration cap")
      ->check(CLI::PositiveNumber);
}

int cmd_simulate(const InstanceArgs& inst, const std::string& out) {
  const ModelParams params =
      ModelParams::create(inst.n, inst.p, inst.k, inst.beta);
  const SampleSet s = draw_samples(params, inst.seed);
  if (out == "-") {
    write_samples_csv(s, std::cout);
  } else {
    auto os = open_out(out);
    write_samples_csv(s, os);
    std::cerr << "wrote " << inst.n << " x " << inst.p << " samples to " << out
              << '\n';
  }
  return 0;
}

int cmd_estimate(const std::string& method, const InstanceArgs& inst,
                 const std::optional<double>& threshold,
                 const std::string& rule_name, const SolverArgs& solver) {
  const ModelParams params =
      ModelParams::create(inst.n, inst.p, inst.k, inst.beta);
  const SampleSet s = draw_samples(params, inst.seed);
  const SymMatrix sig = sample_covariance(s);
  const Vec z = params.spike.dense();

  SupportEstimate est;
  std::cout << "method: " << method << '\n'
            << "n: " << inst.n << "  p: " << inst.p << "  k: " << inst.k
            << "  beta: " << inst.beta << "  seed: " << inst.seed << '\n';

  if (method == "dt") {
    est = diagonal_thresholding(sig, inst.k);
  } else if (method == "ct") {
    const ThresholdRule rule = rule_name == "theory" ? ThresholdRule::theory
                                                     : ThresholdRule::experiment;
    const double t =
        threshold ? *threshold : default_threshold(inst.n, inst.k, rule);
    std::cout << "t: " << t << '\n';
    est = covariance_thresholding(sig, t, inst.k);
  } else if (method == "eigen") {
    est = eigen_topk(sig, inst.k);
  } else {
    const SpikeEstimate spike = sdp_estimator(s, inst.k, solver.options());
    est.indices = top_k_support(spike.zhat, inst.k);
    est.score_vector = spike.zhat;
    const SdpSolution& sol = spike.solution;
    std::cout << "objective: " << sol.objective << '\n'
              << "lambda1: " << sol.leading.value << '\n'
              << "status: "
              << (sol.converged() ? "converged" : "hit iteration cap") << " ("
              << sol.iterations << " iterations)" << '\n';
  }

  std::cout << "support:";
  for (std::size_t i : est.indices) std::cout << ' ' << i;
  std::cout << '\n';
  std::cout << "success: " << (is_success(est, params.spike) ? "yes" : "no")
            << '\n';
  if (method != "dt") {
    Vec score = est.score_vector;
    const double nrm = norm2(score);
    if (nrm > 0.0)
      std::cout << "cosine: " << std::abs(dot(score, z)) / nrm << '\n';
  }
  return 0;
}

int cmd_sdp_solve(const std::string& matrix_path, double budget,
                  const SolverArgs& solver, const std::string& solution_path) {
  const SymMatrix c = SymMatrix::symmetrized(read_matrix_csv(matrix_path));
  const SdpSolution sol = solve(SdpProblem{c, budget}, solver.options());
  std::cout << "p: " << c.dim() << '\n'
            << "objective: " << sol.objective << '\n'
            << "status: "
            << (sol.converged() ? "converged" : "hit iteration cap") << " ("
            << sol.iterations << " iterations)" << '\n'
            << "lambda1: " << sol.leading.value << '\n'
            << "trace: " << trace(sol.x) << '\n'
            << "l1_norm: " << absolute_sum_norm(sol.x) << '\n'
            << "rank: " << numerical_rank(sol.x) << '\n';
  if (!solution_path.empty()) {
    auto os = open_out(solution_path);
    write_matrix_csv(sol.x, os);
    std::cerr << "wrote solution matrix to " << solution_path << '\n';
  }
  return 0;
}

int cmd_bounds_check(const InstanceArgs& inst, double zeta, double eps,
                     const SolverArgs& solver, const std::string& out) {
  const ModelParams params =
      ModelParams::create(inst.n, inst.p, inst.k, inst.beta);
  const SampleSet s = draw_samples(params, inst.seed);
  const SdpSolution sol =
      solve(SdpProblem{sample_covariance(s), static_cast<double>(inst.k)},
            solver.options());
  const auto reports =
      check_solution_against_theorems(sol, params, TheoremSlacks{zeta, eps});

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (out != "-") {
    file = open_out(out);
    os = &file;
  }
  *os << bound_report_csv_header() << '\n';
  for (const auto& r : reports) *os << r.csv_row() << '\n';
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& preset_id,
                   double scale, std::optional<std::size_t> replications,
                   std::string figure, const std::string& records_path,
                   const std::string& summary_path,
                   const std::string& plot_path) {
  std::vector<ExperimentConfig> configs;
  if (!preset_id.empty()) {
    const Preset preset = make_preset(preset_id, scale, replications);
    configs = preset.configs;
    figure = preset.figure_id;
  } else {
    configs.push_back(load_config_file(config_path));
  }

  std::vector<ExperimentRecord> records;
  for (const auto& cfg : configs) {
    auto part = run_campaign(cfg).records;
    records.insert(records.end(), part.begin(), part.end());
  }
  const auto summary = aggregate(records);

  open_out(records_path) << records_to_csv(records);
  open_out(summary_path) << summary_to_csv(summary);
  std::cout << "wrote " << records.size() << " records to " << records_path
            << " and " << summary.size() << " summary rows to " << summary_path
            << '\n';
  if (!figure.empty()) {
    open_out(plot_path) << emit_plot_script(summary, figure, summary_path);
    std::cout << "wrote plot script to " << plot_path << '\n';
  }

  const double ff = failure_fraction(records);
  if (ff > configs.front().max_failure_fraction) {
    std::cerr << "failure fraction " << ff << " exceeds cap "
              << configs.front().max_failure_fraction << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"single-spike sparse PCA laboratory"};
  app.require_subcommand(1);

  InstanceArgs inst;
  SolverArgs solver;

  auto* sim = app.add_subcommand("simulate", "draw samples and dump them as CSV");
  add_instance_flags(sim, inst);
  std::string sim_out = "-";
  sim->add_option("--out", sim_out, "output path, '-' for stdout");

  auto* est = app.add_subcommand("estimate", "recover one support and report it");
  add_instance_flags(est, inst);
  add_solver_flags(est, solver);
  std::string method;
  est->add_option("--method", method, "dt | ct | eigen | sdp")
      ->required()
      ->check(CLI::IsMember({"dt", "ct", "eigen", "sdp"}));
  std::optional<double> threshold;
  est->add_option("--threshold", threshold, "explicit ct threshold");
  std::string rule_name = "experiment";
  est->add_option("--rule", rule_name, "ct threshold rule")
      ->check(CLI::IsMember({"experiment", "theory"}));

  auto* sdp_cmd = app.add_subcommand("sdp-solve", "solve on a matrix from file");
  add_solver_flags(sdp_cmd, solver);
  std::string matrix_path;
  sdp_cmd->add_option("--matrix", matrix_path, "square numeric CSV")->required();
  double budget = 1.0;
  sdp_cmd->add_option("--k", budget, "l1 budget, >= 1")->required();
  std::string solution_path;
  sdp_cmd->add_option("--solution", solution_path, "write X to this CSV path");

  auto* bounds = app.add_subcommand("bounds-check",
                                    "solve one instance, print bound reports");
  add_instance_flags(bounds, inst);
  add_solver_flags(bounds, solver);
  double zeta = 0.25, eps = 0.0;
  bounds->add_option("--zeta", zeta, "value band widening")
      ->check(CLI::Range(0.0, 1.0));
  bounds->add_option("--eps", eps, "cosine bound slack")
      ->check(CLI::NonNegativeNumber);
  std::string bounds_out = "-";
  bounds->add_option("--out", bounds_out, "output path, '-' for stdout");

  auto* exp = app.add_subcommand("experiment", "run a Monte Carlo campaign");
  std::string config_path, preset_id, figure;
  exp->add_option("--config", config_path, "JSON config file");
  exp->add_option("--preset", preset_id, "fig2 | fig3 | fig4")
      ->check(CLI::IsMember({"fig2", "fig3", "fig4"}));
  double scale = 1.0;
  exp->add_option("--scale", scale, "multiply n and p by r in (0, 1]")
      ->check(CLI::Range(1e-9, 1.0));
  std::optional<std::size_t> replications;
  exp->add_option("--replications", replications, "override preset replications")
      ->check(CLI::PositiveNumber);
  exp->add_option("--figure", figure,
                  "plot layout for --config runs (fig2 | fig3 | fig4)")
      ->check(CLI::IsMember({"fig2", "fig3", "fig4"}));
  std::string records_path = "records.csv", summary_path = "summary.csv",
              plot_path = "plot.gp";
  exp->add_option("--records", records_path, "records CSV path");
  exp->add_option("--summary", summary_path, "summary CSV path");
  exp->add_option("--plot", plot_path, "plot script path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(inst, sim_out);
    if (est->parsed())
      return cmd_estimate(method, inst, threshold, rule_name, solver);
    if (sdp_cmd->parsed())
      return cmd_sdp_solve(matrix_path, budget, solver, solution_path);
    if (bounds->parsed())
      return cmd_bounds_check(inst, zeta, eps, solver, bounds_out);
    if (exp->parsed()) {
      if (config_path.empty() == preset_id.empty()) {
        std::cerr << "experiment: pass exactly one of --config / --preset\n";
        return 1;
      }
      return cmd_experiment(config_path, preset_id, scale, replications, figure,
                            records_path, summary_path, plot_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
