#pragma once

// Theorem statements as executable arithmetic, plus Monte Carlo validators
// for the concentration facts they rest on. Every evaluator is pure; every
// validator reports what it measured instead of asserting.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "rng.hpp"
#include "sdp.hpp"
#include "spike_model.hpp"

namespace sparsespike {

enum class BoundDirection { upper, lower };  // upper: holds iff lhs <= rhs

struct BoundReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  BoundDirection direction = BoundDirection::upper;
  bool holds = false;
  bool applicable = true;  // false when the regime assumptions are unmet
  std::size_t n = 0, p = 0, k = 0;
  double beta = 0.0;

  double slack() const noexcept { return rhs - lhs; }

  std::string csv_row() const {
    std::string row = name;
    row += ',';
    row += std::to_string(n) + ',' + std::to_string(p) + ',' +
           std::to_string(k) + ',';
    row += detail::format_double(beta) + ',' + detail::format_double(lhs) +
           ',' + detail::format_double(rhs) + ',' +
           detail::format_double(slack()) + ',';
    row += holds ? '1' : '0';
    row += ',';
    row += applicable ? '1' : '0';
    return row;
  }
};

inline const char* bound_report_csv_header() {
  return "name,n,p,k,beta,lhs,rhs,slack,holds,applicable";
}

namespace detail {

inline BoundReport make_report(std::string name, double lhs, double rhs,
                               BoundDirection dir, bool applicable,
                               std::size_t n, std::size_t p, std::size_t k,
                               double beta) {
  BoundReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.direction = dir;
  r.holds = dir == BoundDirection::upper ? lhs <= rhs : lhs >= rhs;
  r.applicable = applicable;
  r.n = n;
  r.p = p;
  r.k = k;
  r.beta = beta;
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// closed-form bound evaluators

// upper bound on |<zhat, z>|^2 in the high-dimensional regime:
// (23 / lambda1) sqrt(n/p) (1 + sqrt(beta)) + eps / lambda1
inline double cosine_bound(std::size_t n, std::size_t p, double beta,
                           double lambda1, double eps = 0.0) {
  if (n == 0 || p == 0)
    throw std::invalid_argument("cosine_bound: n and p must be >= 1");
  if (!(lambda1 > 0.0))
    throw std::invalid_argument("cosine_bound: lambda1 must be positive");
  if (!(beta >= 0.0))
    throw std::invalid_argument("cosine_bound: beta must be >= 0");
  const double ratio = std::sqrt(static_cast<double>(n) / static_cast<double>(p));
  return (23.0 / lambda1) * ratio * (1.0 + std::sqrt(beta)) + eps / lambda1;
}

struct ValueBand {
  double lower = 0.0;
  double upper = 0.0;
};

// two-sided band for the relaxation value:
// (1-zeta)(1 + p/n)  <=  objective  <=  (1+zeta)(1 + sqrt(p/n) + sqrt(beta))^2
inline ValueBand sdp_value_bounds(std::size_t n, std::size_t p, double beta,
                                  double zeta = 0.0) {
  if (n == 0 || p == 0)
    throw std::invalid_argument("sdp_value_bounds: n and p must be >= 1");
  if (!(beta >= 0.0))
    throw std::invalid_argument("sdp_value_bounds: beta must be >= 0");
  const double c = static_cast<double>(p) / static_cast<double>(n);
  const double edge = 1.0 + std::sqrt(c) + std::sqrt(beta);
  return {(1.0 - zeta) * (1.0 + c), (1.0 + zeta) * edge * edge};
}

// ceiling for <Sigma_hat, X> over rank-one trace-one X built from null data
inline double rank_one_bound(std::size_t n, std::size_t p) {
  if (n == 0) throw std::invalid_argument("rank_one_bound: n must be >= 1");
  return (8.0 / 9.0) * static_cast<double>(p) / static_cast<double>(n);
}

// ceiling for lambda_max of the sample covariance under the spiked model
inline double lambda_max_bound(std::size_t n, std::size_t p, double beta,
                               double eps = 0.0) {
  if (n == 0 || p == 0)
    throw std::invalid_argument("lambda_max_bound: n and p must be >= 1");
  if (!(beta >= 0.0))
    throw std::invalid_argument("lambda_max_bound: beta must be >= 0");
  const double edge =
      1.0 + std::sqrt(static_cast<double>(p) / static_cast<double>(n)) +
      std::sqrt(beta);
  return (1.0 + eps) * edge * edge;
}

// ---------------------------------------------------------------------------
// Monte Carlo validators

// chi-square tails: Pr[X >= n + 2 sqrt(nx) + x] and Pr[X <= n - 2 sqrt(nx)]
// are both at most e^{-x}. Reported lhs is the worse of the two empirical
// frequencies; rhs adds three binomial standard errors at p = e^{-x}.
inline BoundReport chi_square_tail_check(std::size_t n, double x,
                                         std::size_t trials,
                                         std::uint64_t seed) {
  if (n == 0 || trials == 0)
    throw std::invalid_argument(
        "chi_square_tail_check: n and trials must be >= 1");
  if (!(x >= 0.0))
    throw std::invalid_argument("chi_square_tail_check: x must be >= 0");

  const double nd = static_cast<double>(n);
  const double upper_cut = nd + 2.0 * std::sqrt(nd * x) + x;
  const double lower_cut = nd - 2.0 * std::sqrt(nd * x);

  std::size_t upper_hits = 0, lower_hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    CounterRng rng(derive_seed(seed, 0, t, trials));
    double chi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = rng.next_gaussian();
      chi += g * g;
    }
    if (chi >= upper_cut) ++upper_hits;
    if (chi <= lower_cut) ++lower_hits;
  }

  const double td = static_cast<double>(trials);
  const double bound = std::exp(-x);
  const double se = std::sqrt(bound * (1.0 - bound) / td);
  const double freq =
      static_cast<double>(std::max(upper_hits, lower_hits)) / td;

  BoundReport r = detail::make_report("chi_square_tail", freq,
                                      bound + 3.0 * se, BoundDirection::upper,
                                      true, n, 0, 0, 0.0);
  return r;
}

// null covariance trace moments: E tr(S) = p and E tr(S^2) ~ p (1 + p/n).
// lhs is the worse deviation as a fraction of its tolerance (5% on the
// trace, 10% on the second moment); rhs is 1.
inline BoundReport trace_moments_check(std::size_t n, std::size_t p,
                                       std::size_t trials,
                                       std::uint64_t seed) {
  if (trials == 0)
    throw std::invalid_argument("trace_moments_check: trials must be >= 1");
  ModelParams null_model = ModelParams::create(n, p, 1, 0.0);

  double mean_tr = 0.0, mean_tr2 = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    SampleSet s = draw_samples(null_model, derive_seed(seed, 0, t, trials));
    SymMatrix sig = sample_covariance(s);
    mean_tr += trace(sig);
    mean_tr2 += frobenius_inner(sig, sig);
  }
  mean_tr /= static_cast<double>(trials);
  mean_tr2 /= static_cast<double>(trials);

  const double pd = static_cast<double>(p);
  const double target2 =
      pd * (1.0 + pd / static_cast<double>(n));
  const double dev_tr = std::abs(mean_tr / pd - 1.0) / 0.05;
  const double dev_tr2 = std::abs(mean_tr2 / target2 - 1.0) / 0.10;

  return detail::make_report("trace_moments", std::max(dev_tr, dev_tr2), 1.0,
                             BoundDirection::upper, true, n, p, 0, 0.0);
}

// ---------------------------------------------------------------------------
// theorem-by-theorem audit of one solved instance

struct TheoremSlacks {
  double zeta = 0.25;  // band widening for the value bounds
  double eps = 0.0;    // additive slack in the cosine bound
};

inline std::vector<BoundReport> check_solution_against_theorems(
    const SdpSolution& sol, const ModelParams& params,
    const TheoremSlacks& slacks = {}) {
  params.validate();
  const std::size_t n = params.n, p = params.p, k = params.k;
  const double beta = params.beta;
  const double nd = static_cast<double>(n), pd = static_cast<double>(p);
  const double kd = static_cast<double>(k);

  std::vector<BoundReport> reports;
  auto add = [&](std::string name, double lhs, double rhs, BoundDirection dir,
                 bool applicable) {
    reports.push_back(detail::make_report(std::move(name), lhs, rhs, dir,
                                          applicable, n, p, k, beta));
  };

  // regime assumptions, recorded rather than enforced
  add("assumption_sparsity_scale", kd, 2.0 * pd / std::sqrt(nd),
      BoundDirection::lower, true);
  add("assumption_weak_signal", beta, std::sqrt(pd / nd),
      BoundDirection::upper, true);
  add("assumption_small_support", kd / pd, 0.5, BoundDirection::upper, true);

  // value band
  const ValueBand band = sdp_value_bounds(n, p, beta, slacks.zeta);
  add("sdp_value_lower", sol.objective, band.lower, BoundDirection::lower,
      true);
  add("sdp_value_upper", sol.objective, band.upper, BoundDirection::upper,
      true);

  // cosine ceiling in the high-dimensional regime (vacuous when rhs > 1)
  const Vec z = params.spike.dense();
  const double cosine = dot(sol.leading.vector, z);
  add("cosine_ceiling", cosine * cosine,
      cosine_bound(n, p, beta, sol.leading.value, slacks.eps),
      BoundDirection::upper, true);

  // a rank-one solution must sit below the rank-one ceiling; co-occurrence
  // with the lower value bound would contradict the p/n > 8 separation
  const bool rank_one = numerical_rank(sol.x) == 1;
  add("rank_one_consistency", rank_one ? sol.objective : 0.0,
      rank_one_bound(n, p), BoundDirection::upper, pd / nd > 8.0);

  // distance floor, only meaningful at astronomical aspect ratios
  SymMatrix diff(p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j)
      diff.set(i, j, sol.x(i, j) - z[i] * z[j]);
  const bool huge_ratio =
      pd >= 150.0 * 150.0 * 150.0 * 150.0 * nd;
  add("distance_floor", spectral_norm(diff), 1.0 / 3.0, BoundDirection::lower,
      huge_ratio);

  return reports;
}

}  // namespace sparsespike
