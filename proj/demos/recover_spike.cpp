// Walks one planted instance through every estimator and prints what each
// one recovered, then the bound reports for the relaxation's solution.

#include <cstdio>
#include <string>

#include "sparsespike/bounds.hpp"
#include "sparsespike/harness.hpp"

using namespace sparsespike;

namespace {

void report(const char* name, const SupportEstimate& est,
            const ModelParams& params) {
  std::string support;
  for (std::size_t i : est.indices) {
    support += support.empty() ? "" : " ";
    support += std::to_string(i);
  }
  std::printf("  %-12s {%s}  %s\n", name, support.c_str(),
              is_success(est, params.spike) ? "recovered" : "missed");
}

}  // namespace

int main() {
  const std::size_t n = 80, p = 40, k = 5;
  const double beta = 2.0;
  const ModelParams params = ModelParams::create(n, p, k, beta);
  const SampleSet samples = draw_samples(params, 7);
  const SymMatrix sigma_hat = sample_covariance(samples);

  std::printf("planted support {0 .. %zu} in %zu samples of dimension %zu,"
              " signal strength %.1f\n\n",
              k - 1, n, p, beta);

  report("variance", diagonal_thresholding(sigma_hat, k), params);
  const double t = default_threshold(n, k, ThresholdRule::experiment);
  report("threshold", covariance_thresholding(sigma_hat, t, k), params);
  report("eigenvector", eigen_topk(sigma_hat, k), params);

  const SpikeEstimate spike = sdp_estimator(samples, k);
  SupportEstimate sdp_est;
  sdp_est.indices = top_k_support(spike.zhat, k);
  sdp_est.score_vector = spike.zhat;
  report("relaxation", sdp_est, params);

  const SdpSolution& sol = spike.solution;
  const Vec z = params.spike.dense();
  std::printf("\nrelaxation solution: objective %.4f, lambda1 %.4f,"
              " rank %zu, |<v1, z>| %.4f, %zu iterations\n\n",
              sol.objective, sol.leading.value, numerical_rank(sol.x),
              std::abs(dot(sol.leading.vector, z)), sol.iterations);

  std::printf("%-26s %10s %10s  %s\n", "bound", "lhs", "rhs", "verdict");
  for (const BoundReport& r : check_solution_against_theorems(sol, params)) {
    std::printf("%-26s %10.4f %10.4f  %s\n", r.name.c_str(), r.lhs, r.rhs,
                !r.applicable ? "not applicable"
                              : (r.holds ? "holds" : "violated"));
  }
  return 0;
}
