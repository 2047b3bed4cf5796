#pragma once

// Support-recovery estimators: given a sample covariance (or the samples
// behind it) and the sparsity k, each returns the k coordinates it believes
// carry the spike, plus the score vector whose top-k produced them.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "spike_model.hpp"

namespace sparsespike {

struct SupportEstimate {
  std::vector<std::size_t> indices;  // ascending, size k
  Vec score_vector;                  // the p-vector ranked to get them
};

// top-k coordinates of the leading eigenvector by absolute value
inline SupportEstimate eigen_topk(const SymMatrix& sigma_hat, std::size_t k) {
  EigenPair lead = leading_eigenpair(sigma_hat);
  SupportEstimate est;
  est.indices = top_k_support(lead.vector, k);
  est.score_vector = std::move(lead.vector);
  return est;
}

// k largest diagonal variances
inline SupportEstimate diagonal_thresholding(const SymMatrix& sigma_hat,
                                             std::size_t k) {
  const std::size_t p = sigma_hat.dim();
  Vec diag(p);
  for (std::size_t i = 0; i < p; ++i) diag[i] = sigma_hat(i, i);
  SupportEstimate est;
  est.indices = top_k_support(diag, k);
  est.score_vector = std::move(diag);
  return est;
}

// zero every entry with |sigma_hat_ij| <= t (diagonal included), then rank
// by the leading eigenvector of what survives
inline SupportEstimate covariance_thresholding(const SymMatrix& sigma_hat,
                                               double t, std::size_t k) {
  if (!(t >= 0.0))
    throw std::invalid_argument("covariance_thresholding: t must be >= 0");
  const std::size_t p = sigma_hat.dim();
  SymMatrix thresholded(p);
  bool survivor = false;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) {
      const double v = sigma_hat(i, j);
      if (std::abs(v) > t) {
        thresholded.set(i, j, v);
        survivor = true;
      }
    }
  if (!survivor)
    throw DegenerateInputError(
        "covariance_thresholding: threshold zeroed every covariance entry");

  EigenPair lead = leading_eigenpair(thresholded);
  SupportEstimate est;
  est.indices = top_k_support(lead.vector, k);
  est.score_vector = std::move(lead.vector);
  return est;
}

inline SupportEstimate covariance_thresholding(const SampleSet& samples,
                                               double t, std::size_t k) {
  return covariance_thresholding(sample_covariance(samples), t, k);
}

enum class ThresholdRule { experiment, theory };

// experiment: 3/(2k), the setting used by the success-rate figures;
// theory: 5/sqrt(n), the setting the recovery guarantees are stated for
inline double default_threshold(std::size_t n, std::size_t k,
                                ThresholdRule rule) {
  if (n == 0 || k == 0)
    throw std::invalid_argument("default_threshold: n and k must be >= 1");
  switch (rule) {
    case ThresholdRule::experiment:
      return 3.0 / (2.0 * static_cast<double>(k));
    case ThresholdRule::theory:
      return 5.0 / std::sqrt(static_cast<double>(n));
  }
  throw std::invalid_argument("default_threshold: unknown rule");
}

// exact support recovery
inline bool is_success(const SupportEstimate& estimate,
                       const SpikeVector& truth) {
  for (std::size_t i : estimate.indices)
    if (i >= truth.p)
      throw std::invalid_argument(
          "is_success: estimate index out of range for the spike dimension");
  return estimate.indices == truth.support;
}

}  // namespace sparsespike
