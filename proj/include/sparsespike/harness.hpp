#pragma once

// Monte Carlo campaign runner: config in (JSON or presets), one record per
// (estimator, grid point, replication) out, plus aggregation, CSV output and
// gnuplot script emission. Replications are independent and may run on a
// worker pool; every record's randomness is fixed by (base_seed, g, r), so
// results do not depend on scheduling.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <initializer_list>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bounds.hpp"
#include "errors.hpp"
#include "estimators.hpp"
#include "linalg.hpp"
#include "rng.hpp"
#include "sdp.hpp"
#include "spike_model.hpp"

namespace sparsespike {

enum class EstimatorKind { dt, ct, eigen_topk, sdp };

inline const char* estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::dt: return "dt";
    case EstimatorKind::ct: return "ct";
    case EstimatorKind::eigen_topk: return "eigen";
    case EstimatorKind::sdp: return "sdp";
  }
  throw std::invalid_argument("estimator_name: unknown estimator kind");
}

inline EstimatorKind parse_estimator(const std::string& name) {
  if (name == "dt") return EstimatorKind::dt;
  if (name == "ct") return EstimatorKind::ct;
  if (name == "eigen" || name == "eigen_topk") return EstimatorKind::eigen_topk;
  if (name == "sdp") return EstimatorKind::sdp;
  throw std::invalid_argument("unknown estimator '" + name +
                              "' (expected dt, ct, eigen, or sdp)");
}

struct ExperimentConfig {
  std::vector<EstimatorKind> estimators;
  std::size_t n = 0, p = 0;
  std::vector<std::size_t> k_grid;
  double beta = 0.0;
  ThresholdRule threshold_rule = ThresholdRule::experiment;
  std::optional<double> threshold;  // explicit t, overrides the rule
  std::size_t replications = 1;
  std::uint64_t base_seed = 1;
  SdpOptions sdp_opts;
  bool record_bounds = false;
  double max_failure_fraction = 0.5;  // campaign-level abort threshold

  void validate() const {
    if (estimators.empty())
      throw std::invalid_argument("ExperimentConfig: estimator list is empty");
    if (n < 1 || p < 1)
      throw std::invalid_argument("ExperimentConfig: n and p must be >= 1");
    if (k_grid.empty())
      throw std::invalid_argument("ExperimentConfig: k_grid is empty");
    for (std::size_t k : k_grid)
      if (k == 0 || k > p)
        throw std::invalid_argument(
            "ExperimentConfig: k_grid entries must be in [1, p]");
    if (replications < 1)
      throw std::invalid_argument("ExperimentConfig: replications must be >= 1");
    if (!(beta >= 0.0))
      throw std::invalid_argument("ExperimentConfig: beta must be >= 0");
    if (threshold && !(*threshold >= 0.0))
      throw std::invalid_argument("ExperimentConfig: threshold must be >= 0");
    if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0))
      throw std::invalid_argument(
          "ExperimentConfig: max_failure_fraction must be in [0, 1]");
  }
};

struct ExperimentRecord {
  EstimatorKind estimator = EstimatorKind::dt;
  std::size_t n = 0, p = 0, k = 0;
  double beta = 0.0;
  std::optional<double> t;  // threshold actually used (ct only)
  std::uint64_t seed = 0;
  bool success = false;
  std::optional<double> cosine;     // |<zhat, z>| when an eigenvector exists
  std::optional<double> lambda1;    // top eigenvalue of X (sdp only)
  std::optional<double> sdp_value;  // <sigma_hat, X> (sdp only)
  bool converged = true;
  double wall_ms = 0.0;
};

struct CampaignResult {
  std::vector<ExperimentRecord> records;
  std::vector<BoundReport> bound_reports;  // filled when record_bounds is set
};

// ---------------------------------------------------------------------------
// worker pool

// SPARSE_SPIKE_THREADS caps the pool; hardware concurrency is the default.
inline std::size_t worker_count() {
  const unsigned hc = std::thread::hardware_concurrency();
  std::size_t w = hc == 0 ? 1 : hc;
  if (const char* env = std::getenv("SPARSE_SPIKE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1)
      w = std::min(w, static_cast<std::size_t>(v));
  }
  return w;
}

// Runs body(0..total-1) on `workers` threads (0 = worker_count()). The first
// exception thrown by any task stops dispatch and is rethrown after join.
template <typename F>
inline void parallel_for(std::size_t total, F&& body, std::size_t workers = 0) {
  if (total == 0) return;
  std::size_t w = workers == 0 ? worker_count() : workers;
  w = std::min(w, total);
  if (w <= 1) {
    for (std::size_t i = 0; i < total; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto drain = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(total);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t i = 0; i < w; ++i) pool.emplace_back(drain);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// campaign runner

namespace detail {

inline ExperimentRecord run_one(EstimatorKind kind,
                                const ExperimentConfig& config, std::size_t k,
                                const ModelParams& params, const Vec& z,
                                const SymMatrix& sigma_hat, std::uint64_t seed,
                                std::vector<BoundReport>* bounds_sink) {
  ExperimentRecord rec;
  rec.estimator = kind;
  rec.n = config.n;
  rec.p = config.p;
  rec.k = k;
  rec.beta = config.beta;
  rec.seed = seed;

  const auto start = std::chrono::steady_clock::now();
  try {
    switch (kind) {
      case EstimatorKind::dt: {
        rec.success = is_success(diagonal_thresholding(sigma_hat, k),
                                 params.spike);
        break;
      }
      case EstimatorKind::ct: {
        const double t = config.threshold
                             ? *config.threshold
                             : default_threshold(config.n, k,
                                                 config.threshold_rule);
        rec.t = t;
        const SupportEstimate est = covariance_thresholding(sigma_hat, t, k);
        rec.success = is_success(est, params.spike);
        rec.cosine = std::abs(dot(est.score_vector, z));
        break;
      }
      case EstimatorKind::eigen_topk: {
        const SupportEstimate est = eigen_topk(sigma_hat, k);
        rec.success = is_success(est, params.spike);
        rec.cosine = std::abs(dot(est.score_vector, z));
        break;
      }
      case EstimatorKind::sdp: {
        const SdpSolution sol =
            solve(SdpProblem{sigma_hat, static_cast<double>(k)},
                  config.sdp_opts);
        rec.converged = sol.converged();
        rec.cosine = std::abs(dot(sol.leading.vector, z));
        rec.lambda1 = sol.leading.value;
        rec.sdp_value = sol.objective;
        const SupportEstimate est{top_k_support(sol.leading.vector, k),
                                  sol.leading.vector};
        rec.success = is_success(est, params.spike);
        if (bounds_sink) {
          std::vector<BoundReport> reports =
              check_solution_against_theorems(sol, params);
          bounds_sink->insert(bounds_sink->end(),
                              std::make_move_iterator(reports.begin()),
                              std::make_move_iterator(reports.end()));
        }
        break;
      }
    }
  } catch (const ConvergenceError&) {
    rec.converged = false;
    rec.success = false;
  } catch (const DegenerateInputError&) {
    rec.converged = false;
    rec.success = false;
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  return rec;
}

}  // namespace detail

// One record per (estimator, grid point, replication), grouped by estimator,
// then grid order, then replication. All estimators at one (g, r) see the
// same draw, so cross-estimator comparisons are paired. Estimator failures
// (non-convergence, degenerate thresholding) are recorded, never thrown.
inline CampaignResult run_campaign(const ExperimentConfig& config) {
  config.validate();
  const std::size_t m = config.replications;
  const std::size_t cells = config.k_grid.size() * m;

  struct Cell {
    std::vector<ExperimentRecord> records;
    std::vector<BoundReport> bounds;
  };
  std::vector<Cell> done(cells);

  parallel_for(cells, [&](std::size_t idx) {
    const std::size_t g = idx / m;
    const std::size_t r = idx % m;
    const std::size_t k = config.k_grid[g];
    const std::uint64_t seed = derive_seed(config.base_seed, g, r, m);
    const ModelParams params =
        ModelParams::create(config.n, config.p, k, config.beta);
    const SampleSet samples = draw_samples(params, seed);
    const SymMatrix sigma_hat = sample_covariance(samples);
    const Vec z = params.spike.dense();

    Cell& cell = done[idx];
    cell.records.reserve(config.estimators.size());
    for (EstimatorKind kind : config.estimators)
      cell.records.push_back(detail::run_one(
          kind, config, k, params, z, sigma_hat, seed,
          config.record_bounds ? &cell.bounds : nullptr));
  });

  CampaignResult out;
  out.records.reserve(cells * config.estimators.size());
  for (std::size_t e = 0; e < config.estimators.size(); ++e)
    for (std::size_t idx = 0; idx < cells; ++idx)
      out.records.push_back(std::move(done[idx].records[e]));
  for (auto& cell : done)
    for (auto& b : cell.bounds) out.bound_reports.push_back(std::move(b));
  return out;
}

inline std::vector<ExperimentRecord> run_experiment(
    const ExperimentConfig& config) {
  return run_campaign(config).records;
}

// Fraction of records whose estimator failed to converge.
inline double failure_fraction(const std::vector<ExperimentRecord>& records) {
  if (records.empty()) return 0.0;
  std::size_t bad = 0;
  for (const auto& rec : records)
    if (!rec.converged) ++bad;
  return static_cast<double>(bad) / static_cast<double>(records.size());
}

// ---------------------------------------------------------------------------
// aggregation

struct SummaryRow {
  EstimatorKind estimator = EstimatorKind::dt;
  std::size_t n = 0, p = 0, k = 0;
  double beta = 0.0;
  std::optional<double> t;
  std::size_t replications = 0;
  double success_rate = 0.0;
  double success_se = 0.0;  // binomial standard error
  std::optional<double> cosine_mean, cosine_se;
  std::optional<double> lambda1_mean, lambda1_se;
  std::optional<double> sdp_value_mean, sdp_value_se;
  double converged_fraction = 0.0;
};

namespace detail {

// Welford accumulator; absent when no record carried the field.
struct Moments {
  std::size_t count = 0;
  double mean = 0.0, m2 = 0.0;

  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }

  std::optional<double> value() const {
    return count ? std::optional<double>(mean) : std::nullopt;
  }

  std::optional<double> se_of_mean() const {
    if (count == 0) return std::nullopt;
    if (count == 1) return 0.0;
    const double var = m2 / static_cast<double>(count - 1);
    return std::sqrt(var / static_cast<double>(count));
  }
};

}  // namespace detail

// One summary row per (estimator, n, p, k, beta) group, in that sort order.
// Success rate counts every record; field means skip records without the
// field (dt rows carry no cosine, only sdp rows carry lambda1).
inline std::vector<SummaryRow> aggregate(
    const std::vector<ExperimentRecord>& records) {
  if (records.empty())
    throw std::invalid_argument("aggregate: no records to aggregate");

  struct Acc {
    std::size_t total = 0, successes = 0, converged = 0;
    std::optional<double> t;
    detail::Moments cosine, lambda1, value;
  };
  using Key = std::tuple<int, std::size_t, std::size_t, std::size_t, double>;
  std::map<Key, Acc> groups;

  for (const auto& rec : records) {
    Acc& acc = groups[Key{static_cast<int>(rec.estimator), rec.n, rec.p,
                          rec.k, rec.beta}];
    ++acc.total;
    if (rec.success) ++acc.successes;
    if (rec.converged) ++acc.converged;
    if (rec.cosine) acc.cosine.add(*rec.cosine);
    if (rec.lambda1) acc.lambda1.add(*rec.lambda1);
    if (rec.sdp_value) acc.value.add(*rec.sdp_value);
    if (!acc.t && rec.t) acc.t = rec.t;
  }

  std::vector<SummaryRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, acc] : groups) {
    SummaryRow row;
    row.estimator = static_cast<EstimatorKind>(std::get<0>(key));
    row.n = std::get<1>(key);
    row.p = std::get<2>(key);
    row.k = std::get<3>(key);
    row.beta = std::get<4>(key);
    row.t = acc.t;
    row.replications = acc.total;
    const double total = static_cast<double>(acc.total);
    row.success_rate = static_cast<double>(acc.successes) / total;
    row.success_se =
        std::sqrt(row.success_rate * (1.0 - row.success_rate) / total);
    row.cosine_mean = acc.cosine.value();
    row.cosine_se = acc.cosine.se_of_mean();
    row.lambda1_mean = acc.lambda1.value();
    row.lambda1_se = acc.lambda1.se_of_mean();
    row.sdp_value_mean = acc.value.value();
    row.sdp_value_se = acc.value.se_of_mean();
    row.converged_fraction = static_cast<double>(acc.converged) / total;
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV output

namespace detail {

inline std::string opt_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace detail

// include_timing=false drops the wall_ms column, giving output that is
// bit-identical across runs of the same build.
inline const char* record_csv_header(bool include_timing = true) {
  return include_timing
             ? "estimator,n,p,k,beta,t,seed,success,cosine,lambda1,"
               "sdp_value,converged,wall_ms"
             : "estimator,n,p,k,beta,t,seed,success,cosine,lambda1,"
               "sdp_value,converged";
}

inline std::string record_csv_row(const ExperimentRecord& rec,
                                  bool include_timing = true) {
  std::string row = estimator_name(rec.estimator);
  row += ',';
  row += std::to_string(rec.n) + ',' + std::to_string(rec.p) + ',' +
         std::to_string(rec.k) + ',';
  row += detail::format_double(rec.beta) + ',';
  row += detail::opt_field(rec.t) + ',';
  row += std::to_string(rec.seed) + ',';
  row += rec.success ? '1' : '0';
  row += ',';
  row += detail::opt_field(rec.cosine) + ',' + detail::opt_field(rec.lambda1) +
         ',' + detail::opt_field(rec.sdp_value) + ',';
  row += rec.converged ? '1' : '0';
  if (include_timing) {
    row += ',';
    row += detail::format_double(rec.wall_ms);
  }
  return row;
}

inline std::string records_to_csv(const std::vector<ExperimentRecord>& records,
                                  bool include_timing = true) {
  std::string out = record_csv_header(include_timing);
  out += '\n';
  for (const auto& rec : records) {
    out += record_csv_row(rec, include_timing);
    out += '\n';
  }
  return out;
}

inline const char* summary_csv_header() {
  return "estimator,n,p,k,beta,t,replications,success_rate,success_se,"
         "cosine_mean,cosine_se,lambda1_mean,lambda1_se,sdp_value_mean,"
         "sdp_value_se,converged_fraction";
}

inline std::string summary_csv_row(const SummaryRow& row) {
  std::string out = estimator_name(row.estimator);
  out += ',';
  out += std::to_string(row.n) + ',' + std::to_string(row.p) + ',' +
         std::to_string(row.k) + ',';
  out += detail::format_double(row.beta) + ',';
  out += detail::opt_field(row.t) + ',';
  out += std::to_string(row.replications) + ',';
  out += detail::format_double(row.success_rate) + ',' +
         detail::format_double(row.success_se) + ',';
  out += detail::opt_field(row.cosine_mean) + ',' +
         detail::opt_field(row.cosine_se) + ',';
  out += detail::opt_field(row.lambda1_mean) + ',' +
         detail::opt_field(row.lambda1_se) + ',';
  out += detail::opt_field(row.sdp_value_mean) + ',' +
         detail::opt_field(row.sdp_value_se) + ',';
  out += detail::format_double(row.converged_fraction);
  return out;
}

inline std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
  std::string out = summary_csv_header();
  out += '\n';
  for (const auto& row : rows) {
    out += summary_csv_row(row);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// plot script emission (gnuplot command text over the summary CSV)

inline std::string emit_plot_script(const std::vector<SummaryRow>& summary,
                                    const std::string& figure_id,
                                    const std::string& csv_path =
                                        "summary.csv") {
  if (figure_id != "fig2" && figure_id != "fig3" && figure_id != "fig4")
    throw std::invalid_argument("emit_plot_script: unknown figure id '" +
                                figure_id + "'");

  // summary columns: 1 estimator, 2 n, 4 k, 8 success_rate, 9 success_se,
  // 10 cosine_mean, 12 lambda1_mean
  std::string s;
  s += "# success curves from " + csv_path + "\n";
  s += "set datafile separator comma\n";
  s += "set terminal pngcairo size 900,600\n";
  s += "set output '" + figure_id + ".png'\n";
  s += "set key top right\n";
  s += "set yrange [0:1.1]\n";

  const std::string src = "'" + csv_path + "' every ::1 using ";
  if (figure_id == "fig2") {
    s += "set xlabel 'k'\n";
    s += "set ylabel 'success rate'\n";
    s += "plot " + src +
         "(strcol(1) eq 'dt' ? $4 : NaN):8:9 with yerrorlines title "
         "'diagonal thresholding', \\\n";
    s += "     '' every ::1 using (strcol(1) eq 'ct' ? $4 : NaN):8:9 with "
         "yerrorlines title 'covariance thresholding'\n";
  } else if (figure_id == "fig3") {
    std::vector<std::size_t> sizes;
    for (const auto& row : summary)
      if (row.estimator == EstimatorKind::ct) sizes.push_back(row.n);
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

    s += "set xlabel 'k / sqrt(n)'\n";
    s += "set ylabel 'success rate'\n";
    if (sizes.empty()) {
      s += "# no rows to plot\n";
      return s;
    }
    s += "plot ";
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      const std::string sn = std::to_string(sizes[i]);
      if (i > 0) s += ", \\\n     ";
      s += (i == 0 ? src : std::string("'' every ::1 using ")) +
           "(strcol(1) eq 'ct' && $2 == " + sn +
           " ? $4/sqrt($2) : NaN):8 with linespoints title 'n=" + sn + "'";
    }
    s += "\n";
  } else {  // fig4
    s += "set xlabel 'k'\n";
    s += "set ylabel 'rate / cosine / eigenvalue'\n";
    s += "plot " + src +
         "(strcol(1) eq 'dt' ? $4 : NaN):8 with linespoints title "
         "'DT success rate', \\\n";
    s += "     '' every ::1 using (strcol(1) eq 'sdp' ? $4 : NaN):10 with "
         "linespoints title 'mean cosine', \\\n";
    s += "     '' every ::1 using (strcol(1) eq 'sdp' ? $4 : NaN):12 with "
         "linespoints title 'mean top eigenvalue'\n";
  }
  return s;
}

// ---------------------------------------------------------------------------
// figure presets

struct Preset {
  std::string figure_id;
  std::vector<ExperimentConfig> configs;
};

namespace detail {

inline std::size_t scaled_size(std::size_t native, double scale) {
  const long long v = std::llround(static_cast<double>(native) * scale);
  return static_cast<std::size_t>(std::max<long long>(1, v));
}

// k values at fixed multiples of sqrt(n), deduplicated after rounding, so a
// scaled-down campaign samples the same part of the phase diagram.
inline std::vector<std::size_t> ratio_grid(std::size_t n,
                                           std::initializer_list<double>
                                               ratios) {
  const double root = std::sqrt(static_cast<double>(n));
  std::vector<std::size_t> ks;
  for (double ratio : ratios)
    ks.push_back(static_cast<std::size_t>(
        std::max<long long>(1, std::llround(ratio * root))));
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

}  // namespace detail

// Native campaign definitions behind the three success-rate figures. scale
// multiplies n and p (the k grids follow via their sqrt(n) ratios); pass
// scale well below 1 for desk-size runs, e.g. fig2 at 0.2 or fig4 at 1.
inline Preset make_preset(const std::string& figure_id, double scale = 1.0,
                          std::optional<std::size_t> replications = {}) {
  if (!(scale > 0.0 && scale <= 1.0))
    throw std::invalid_argument("make_preset: scale must be in (0, 1]");

  Preset preset;
  preset.figure_id = figure_id;
  if (figure_id == "fig2") {
    ExperimentConfig c;
    c.estimators = {EstimatorKind::dt, EstimatorKind::ct};
    c.n = c.p = detail::scaled_size(5000, scale);
    c.beta = 2.0;
    c.threshold_rule = ThresholdRule::experiment;
    c.k_grid = detail::ratio_grid(c.n, {0.2, 0.4, 0.6, 0.8, 1.0, 1.2});
    c.replications = replications.value_or(500);
    c.base_seed = 9202;
    preset.configs.push_back(std::move(c));
  } else if (figure_id == "fig3") {
    for (std::size_t native : {500u, 1000u, 2000u, 3500u, 5000u}) {
      ExperimentConfig c;
      c.estimators = {EstimatorKind::ct};
      c.n = c.p = detail::scaled_size(native, scale);
      c.beta = 2.0;
      c.threshold_rule = ThresholdRule::experiment;
      c.k_grid = detail::ratio_grid(c.n, {0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4});
      c.replications = replications.value_or(500);
      c.base_seed = 9303 + static_cast<std::uint64_t>(native);
      preset.configs.push_back(std::move(c));
    }
  } else if (figure_id == "fig4") {
    ExperimentConfig c;
    c.estimators = {EstimatorKind::sdp, EstimatorKind::dt};
    c.n = c.p = detail::scaled_size(50, scale);
    c.beta = 0.8;
    for (std::size_t k = 1; k <= 30 && k <= c.p; ++k) c.k_grid.push_back(k);
    c.replications = replications.value_or(100);
    c.base_seed = 9404;
    preset.configs.push_back(std::move(c));
  } else {
    throw std::invalid_argument("make_preset: unknown figure id '" +
                                figure_id + "'");
  }
  for (const auto& c : preset.configs) c.validate();
  return preset;
}

// ---------------------------------------------------------------------------
// JSON config

namespace detail {

inline std::size_t config_count_field(const nlohmann::json& j,
                                      const char* name) {
  if (!j.contains(name))
    throw std::invalid_argument(std::string("config: missing field '") + name +
                                "'");
  const auto& v = j.at(name);
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0)
    throw std::invalid_argument(std::string("config: field '") + name +
                                "' must be a positive integer");
  return v.get<std::size_t>();
}

inline double config_real_field(const nlohmann::json& j, const char* name,
                                double min_value) {
  if (!j.contains(name))
    throw std::invalid_argument(std::string("config: missing field '") + name +
                                "'");
  const auto& v = j.at(name);
  if (!v.is_number() || !(v.get<double>() >= min_value))
    throw std::invalid_argument(std::string("config: field '") + name +
                                "' must be a number >= " +
                                format_double(min_value));
  return v.get<double>();
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw std::invalid_argument("config: top level must be a JSON object");

  static const char* const known[] = {
      "estimators", "n",           "p",          "np",
      "k_grid",     "beta",        "threshold",  "threshold_rule",
      "replications", "base_seed", "sdp",        "record_bounds",
      "max_failure_fraction"};
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* name : known)
      if (item.key() == name) ok = true;
    if (!ok)
      throw std::invalid_argument("config: unknown field '" + item.key() +
                                  "'");
  }

  ExperimentConfig c;

  if (!j.contains("estimators") || !j["estimators"].is_array() ||
      j["estimators"].empty())
    throw std::invalid_argument(
        "config: field 'estimators' must be a non-empty array of names");
  for (const auto& e : j["estimators"]) {
    if (!e.is_string())
      throw std::invalid_argument(
          "config: field 'estimators' entries must be strings");
    try {
      c.estimators.push_back(parse_estimator(e.get<std::string>()));
    } catch (const std::invalid_argument& err) {
      throw std::invalid_argument(std::string("config: field 'estimators': ") +
                                  err.what());
    }
  }

  if (j.contains("np")) {
    if (j.contains("n") || j.contains("p"))
      throw std::invalid_argument(
          "config: give either 'np' or separate 'n' and 'p', not both");
    c.n = c.p = detail::config_count_field(j, "np");
  } else {
    c.n = detail::config_count_field(j, "n");
    c.p = detail::config_count_field(j, "p");
  }

  if (!j.contains("k_grid") || !j["k_grid"].is_array() || j["k_grid"].empty())
    throw std::invalid_argument(
        "config: field 'k_grid' must be a non-empty array of counts");
  for (const auto& e : j["k_grid"]) {
    if (!e.is_number_unsigned() || e.get<std::uint64_t>() == 0)
      throw std::invalid_argument(
          "config: field 'k_grid' entries must be positive integers");
    c.k_grid.push_back(e.get<std::size_t>());
  }

  c.beta = detail::config_real_field(j, "beta", 0.0);

  if (j.contains("threshold") && j.contains("threshold_rule"))
    throw std::invalid_argument(
        "config: set 'threshold' or 'threshold_rule', not both");
  if (j.contains("threshold"))
    c.threshold = detail::config_real_field(j, "threshold", 0.0);
  if (j.contains("threshold_rule")) {
    const auto& v = j.at("threshold_rule");
    const std::string rule = v.is_string() ? v.get<std::string>() : "";
    if (rule == "experiment")
      c.threshold_rule = ThresholdRule::experiment;
    else if (rule == "theory")
      c.threshold_rule = ThresholdRule::theory;
    else
      throw std::invalid_argument(
          "config: field 'threshold_rule' must be 'experiment' or 'theory'");
  }

  c.replications = detail::config_count_field(j, "replications");

  if (j.contains("base_seed")) {
    const auto& v = j.at("base_seed");
    if (!v.is_number_unsigned())
      throw std::invalid_argument(
          "config: field 'base_seed' must be a non-negative integer");
    c.base_seed = v.get<std::uint64_t>();
  }

  if (j.contains("sdp")) {
    const auto& s = j.at("sdp");
    if (!s.is_object())
      throw std::invalid_argument("config: field 'sdp' must be an object");
    for (const auto& item : s.items()) {
      if (item.key() == "rho")
        c.sdp_opts.rho = detail::config_real_field(s, "rho", 1e-12);
      else if (item.key() == "tol")
        c.sdp_opts.tol = detail::config_real_field(s, "tol", 1e-15);
      else if (item.key() == "max_iter")
        c.sdp_opts.max_iter = detail::config_count_field(s, "max_iter");
      else
        throw std::invalid_argument("config: unknown field 'sdp." +
                                    item.key() + "'");
    }
  }

  if (j.contains("record_bounds")) {
    const auto& v = j.at("record_bounds");
    if (!v.is_boolean())
      throw std::invalid_argument(
          "config: field 'record_bounds' must be a boolean");
    c.record_bounds = v.get<bool>();
  }

  if (j.contains("max_failure_fraction")) {
    c.max_failure_fraction =
        detail::config_real_field(j, "max_failure_fraction", 0.0);
    if (c.max_failure_fraction > 1.0)
      throw std::invalid_argument(
          "config: field 'max_failure_fraction' must be in [0, 1]");
  }

  try {
    c.validate();
  } catch (const std::invalid_argument& err) {
    throw std::invalid_argument(std::string("config: ") + err.what());
  }
  return c;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") +
                                e.what());
  }
  return config_from_json(j);
}

}  // namespace sparsespike
