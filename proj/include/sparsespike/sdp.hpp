#pragma once

// Solver for the sparse-PCA relaxation
//
//   maximize <C, X>   s.t.   X psd,  tr X = 1,  sum_ij |X_ij| <= k
//
// via two-block consensus ADMM: one block projects onto the spectahedron
// (with the linear objective folded in), the other onto the entrywise l1
// ball. Either projection alone is cheap; alternating them with scaled dual
// updates handles the intersection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "rng.hpp"
#include "spike_model.hpp"

namespace sparsespike {

struct SdpProblem {
  SymMatrix c;
  double k = 1.0;  // l1 budget, >= 1
};

struct SdpOptions {
  double rho = 1.0;
  double tol = 1e-6;
  std::size_t max_iter = 5000;
};

enum class SdpStatus { converged, max_iterations };

struct SdpSolution {
  SymMatrix x;
  double objective = 0.0;
  double primal_residual = 0.0;  // relative, ||X-Z||_F / max(1, ||X||, ||Z||)
  double dual_residual = 0.0;    // relative, rho ||Z-Z'||_F / max(1, rho ||U||)
  std::size_t iterations = 0;
  Vec spectrum;                  // eigenvalues of X, descending
  EigenPair leading;
  SdpStatus status = SdpStatus::max_iterations;

  bool converged() const noexcept { return status == SdpStatus::converged; }
};

// ---------------------------------------------------------------------------
// exact projections (these are the reference operations; the solver's hot
// loop uses a low-rank shortcut that is checked against them)

// Euclidean projection onto { x >= 0, sum x = total }
inline Vec project_simplex(const Vec& v, double total = 1.0) {
  if (!(total > 0.0))
    throw std::invalid_argument("project_simplex: total must be positive");
  if (v.empty()) throw std::invalid_argument("project_simplex: empty input");
  Vec u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double prefix = 0.0, tau = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    prefix += u[j];
    const double cand = (prefix - total) / static_cast<double>(j + 1);
    if (u[j] - cand > 0.0) tau = cand;
  }
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - tau, 0.0);
  return out;
}

inline SymMatrix project_spectahedron(const SymMatrix& a) {
  const std::size_t p = a.dim();
  EigenDecomposition ed = full_symmetric_eig(a);
  Vec w = project_simplex(ed.values, 1.0);
  SymMatrix x(p);
  Vec& xd = x.raw();
  for (std::size_t t = 0; t < p; ++t) {
    if (w[t] <= 0.0) continue;
    const double* vt = ed.vectors.row(t);
    for (std::size_t i = 0; i < p; ++i) {
      const double f = w[t] * vt[i];
      double* row = xd.data() + i * p;
      for (std::size_t j = i; j < p; ++j) row[j] += f * vt[j];
    }
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j) xd[j * p + i] = xd[i * p + j];
  return x;
}

namespace detail {

// soft-threshold level tau with sum max(m_i - tau, 0) = budget, given the
// magnitudes sorted descending; 0 if the ball already contains the point
inline double l1_level_sorted(const Vec& mags_desc, double budget) {
  double prefix = 0.0, tau = 0.0;
  for (std::size_t j = 0; j < mags_desc.size(); ++j) {
    prefix += mags_desc[j];
    const double cand = (prefix - budget) / static_cast<double>(j + 1);
    if (mags_desc[j] - cand > 0.0) tau = std::max(cand, 0.0);
  }
  return tau;
}

}  // namespace detail

inline SymMatrix project_l1_ball(const SymMatrix& a, double k) {
  if (!(k > 0.0))
    throw std::invalid_argument("project_l1_ball: budget must be positive");
  double total = 0.0;
  for (double x : a.data()) total += std::abs(x);
  if (total <= k) return a;

  Vec mags(a.data().size());
  for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::abs(a.data()[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  const double tau = detail::l1_level_sorted(mags, k);

  SymMatrix out(a.dim());
  Vec& od = out.raw();
  for (std::size_t t = 0; t < od.size(); ++t) {
    const double x = a.data()[t];
    const double m = std::abs(x) - tau;
    od[t] = m > 0.0 ? (x < 0.0 ? -m : m) : 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// warm-started low-rank spectahedron projection for the ADMM loop
//
// The projection of W only needs the eigenpairs whose simplex weight
// survives, and that set is small once tr X = 1 is spread over a spiked
// spectrum, so a subspace iteration warm-started from the previous call
// locks on in a round or two. The first call of a solve seeds the basis
// from the exact decomposition, a fresh random direction is injected every
// call so a rising eigenvalue outside the basis gets caught, a certificate
// (kept set strictly interior, small Ritz residuals, threshold clear of the
// basis floor) gates the shortcut, and the caller cross-checks against
// project_spectahedron periodically. Anything suspicious falls back to the
// exact path; repeated fallbacks disable the shortcut for the rest of the
// solve.

namespace detail {

struct LowRankPsd {
  std::vector<Vec> vectors;  // orthonormal
  Vec weights;               // positive, sums to 1
};

class SpectralProjector {
 public:
  // assembles X into x (dense) and returns the kept pairs
  LowRankPsd project(const SymMatrix& w, SymMatrix& x) {
    const std::size_t p = w.dim();
    if (p <= 32 || force_exact_) return exact(w, x);
    if (basis_.empty() || basis_[0].size() != p)
      return fallback(w, x, /*count_strike=*/false);  // cold start

    std::size_t m = std::clamp<std::size_t>(last_kept_ + 8, 12,
                                            std::min<std::size_t>(p - 1, 48));
    if (basis_.size() > m - 1) basis_.resize(m - 1);
    inject_random(p);

    while (true) {
      resize_basis(m, p);
      orthonormalize(basis_);
      std::vector<Vec> y(basis_.size());
      for (std::size_t i = 0; i < basis_.size(); ++i) matvec(w, basis_[i], y[i]);

      for (int round = 0; round < 5; ++round) {
        const std::size_t mm = basis_.size();
        SymMatrix s(mm);
        for (std::size_t i = 0; i < mm; ++i)
          for (std::size_t j = i; j < mm; ++j) s.set(i, j, dot(basis_[i], y[j]));
        EigenDecomposition small = full_symmetric_eig(s);

        // rotate basis and images to Ritz pairs, theta descending
        std::vector<Vec> u(mm, Vec(p, 0.0)), wu(mm, Vec(p, 0.0));
        for (std::size_t t = 0; t < mm; ++t)
          for (std::size_t j = 0; j < mm; ++j) {
            const double r = small.vectors(t, j);
            if (r == 0.0) continue;
            const double* bj = basis_[j].data();
            const double* yj = y[j].data();
            double* ut = u[t].data();
            double* wt = wu[t].data();
            for (std::size_t i = 0; i < p; ++i) {
              ut[i] += r * bj[i];
              wt[i] += r * yj[i];
            }
          }
        const Vec& theta = small.values;

        // simplex threshold over the Ritz values, tail assumed below the floor
        double prefix = 0.0, tau = 0.0;
        std::size_t kept = 0;
        for (std::size_t j = 0; j < mm; ++j) {
          prefix += theta[j];
          const double cand = (prefix - 1.0) / static_cast<double>(j + 1);
          if (theta[j] - cand > 0.0) {
            tau = cand;
            kept = j + 1;
          }
        }

        const double scale = std::max(1.0, std::abs(theta[0]));
        double res = 0.0;
        for (std::size_t t = 0; t < std::min(kept + 1, mm); ++t) {
          double rt = 0.0;
          for (std::size_t i = 0; i < p; ++i) {
            const double d = wu[t][i] - theta[t] * u[t][i];
            rt += d * d;
          }
          res = std::max(res, std::sqrt(rt));
        }

        const bool certified = kept + 1 < mm && res <= 1e-8 * scale &&
                               tau > theta[mm - 1] + 4.0 * res;
        if (certified) {
          LowRankPsd out;
          for (std::size_t t = 0; t < kept; ++t) {
            out.weights.push_back(theta[t] - tau);
            out.vectors.push_back(std::move(u[t]));
          }
          basis_.clear();
          for (std::size_t t = 0; t < mm; ++t)
            basis_.push_back(t < kept ? out.vectors[t] : std::move(u[t]));
          last_kept_ = kept;
          fallback_streak_ = 0;
          assemble(out, x);
          return out;
        }

        // power round: advance the subspace by one application of W
        basis_ = std::move(wu);
        orthonormalize(basis_);
        for (std::size_t i = 0; i < basis_.size(); ++i) matvec(w, basis_[i], y[i]);
      }

      if (m >= std::min<std::size_t>(p - 1, 48)) break;
      m = std::min<std::size_t>(2 * m, std::min<std::size_t>(p - 1, 48));
    }
    return fallback(w, x, /*count_strike=*/true);
  }

  void force_exact() noexcept { force_exact_ = true; }

 private:
  LowRankPsd exact(const SymMatrix& w, SymMatrix& x) {
    const std::size_t p = w.dim();
    EigenDecomposition ed = full_symmetric_eig(w);
    Vec pw = project_simplex(ed.values, 1.0);
    LowRankPsd out;
    for (std::size_t t = 0; t < p; ++t) {
      if (pw[t] <= 0.0) continue;
      out.vectors.emplace_back(ed.vectors.row(t), ed.vectors.row(t) + p);
      out.weights.push_back(pw[t]);
    }
    assemble(out, x);
    return out;
  }

  LowRankPsd fallback(const SymMatrix& w, SymMatrix& x, bool count_strike) {
    LowRankPsd out = exact(w, x);
    if (count_strike && ++fallback_streak_ >= 3) force_exact_ = true;
    last_kept_ = out.vectors.size();
    basis_.clear();
    const std::size_t p = w.dim();
    if (p > 32 && !force_exact_) {
      for (const Vec& v : out.vectors) basis_.push_back(v);
      while (basis_.size() < std::min<std::size_t>(11, p - 1)) inject_random(p);
    }
    return out;
  }

  void inject_random(std::size_t p) {
    Vec v(p);
    for (std::size_t i = 0; i < p; ++i)
      v[i] = static_cast<double>(mix64(inject_counter_ * p + i + 17) >> 11) *
                 0x1.0p-52 -
             1.0;
    ++inject_counter_;
    basis_.push_back(std::move(v));
  }

  void resize_basis(std::size_t m, std::size_t p) {
    while (basis_.size() < m) inject_random(p);
    if (basis_.size() > m) basis_.resize(m);
  }

  // two-pass modified Gram-Schmidt; near-dependent rows get re-randomized
  void orthonormalize(std::vector<Vec>& rows) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (int attempt = 0; attempt < 3; ++attempt) {
        for (int pass = 0; pass < 2; ++pass)
          for (std::size_t j = 0; j < i; ++j) {
            const double ip = dot(rows[j], rows[i]);
            for (std::size_t t = 0; t < rows[i].size(); ++t)
              rows[i][t] -= ip * rows[j][t];
          }
        const double nrm = norm2(rows[i]);
        if (nrm > 1e-10) {
          for (double& t : rows[i]) t /= nrm;
          break;
        }
        for (std::size_t t = 0; t < rows[i].size(); ++t)
          rows[i][t] = static_cast<double>(
                           mix64(inject_counter_ * 131 + i * 7 + t + 3) >> 11) *
                           0x1.0p-52 -
                       1.0;
        ++inject_counter_;
      }
    }
  }

  static void assemble(const LowRankPsd& lr, SymMatrix& x) {
    const std::size_t p = x.dim();
    Vec& xd = x.raw();
    std::fill(xd.begin(), xd.end(), 0.0);
    for (std::size_t t = 0; t < lr.vectors.size(); ++t) {
      const double* vt = lr.vectors[t].data();
      const double wt = lr.weights[t];
      for (std::size_t i = 0; i < p; ++i) {
        const double f = wt * vt[i];
        double* row = xd.data() + i * p;
        for (std::size_t j = i; j < p; ++j) row[j] += f * vt[j];
      }
    }
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i + 1; j < p; ++j) xd[j * p + i] = xd[i * p + j];
  }

  std::vector<Vec> basis_;
  std::size_t last_kept_ = 4;
  std::uint64_t inject_counter_ = 1;
  int fallback_streak_ = 0;
  bool force_exact_ = false;
};

// l1 soft-threshold level with a warm hint: only entries above half the
// previous level are sorted; falls back to the full sort when the level
// moved too much for the partition to be conclusive.
inline double l1_level_warm(const Vec& entries, double budget, double hint) {
  double total = 0.0;
  for (double x : entries) total += std::abs(x);
  if (total <= budget) return 0.0;

  if (hint > 0.0) {
    const double bound = 0.5 * hint;
    Vec cand;
    cand.reserve(256);
    for (double x : entries) {
      const double m = std::abs(x);
      if (m > bound) cand.push_back(m);
    }
    if (!cand.empty() && cand.size() < entries.size()) {
      std::sort(cand.begin(), cand.end(), std::greater<>());
      const double tau = l1_level_sorted(cand, budget);
      if (tau >= bound) return tau;
    }
  }

  Vec mags(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) mags[i] = std::abs(entries[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  return l1_level_sorted(mags, budget);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// ADMM solve

inline SdpSolution solve(const SdpProblem& prob, const SdpOptions& opts = {}) {
  const std::size_t p = prob.c.dim();
  if (p == 0) throw std::invalid_argument("sdp solve: empty objective matrix");
  if (!(prob.k >= 1.0))
    throw std::invalid_argument("sdp solve: budget k must be >= 1, got " +
                                std::to_string(prob.k));
  if (!(opts.rho > 0.0) || !(opts.tol > 0.0) || opts.max_iter == 0)
    throw std::invalid_argument(
        "sdp solve: rho and tol must be positive, max_iter >= 1");

  const double alpha = 1.6;  // over-relaxation
  double rho = opts.rho;

  SymMatrix x(p), w(p), z(p), u(p);
  for (std::size_t i = 0; i < p; ++i) z.set(i, i, 1.0 / static_cast<double>(p));

  detail::SpectralProjector projector;
  int strikes = 0;
  double tau_hint = 0.0;
  double rel_primal = 0.0, rel_dual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;

  Vec zprev;
  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    iterations = it;

    // X block: argmax <C,X> - rho/2 ||X - Z + U||^2 over the spectahedron
    {
      Vec& wd = w.raw();
      const double inv_rho = 1.0 / rho;
      for (std::size_t t = 0; t < p * p; ++t)
        wd[t] = z.data()[t] - u.data()[t] + prob.c.data()[t] * inv_rho;
    }
    detail::LowRankPsd lr = projector.project(w, x);

    // periodic exact cross-check of the shortcut
    if (it % 251 == 0 && strikes < 2) {
      SymMatrix xe = project_spectahedron(w);
      double diff = 0.0, norm = 0.0;
      for (std::size_t t = 0; t < p * p; ++t) {
        const double d = x.data()[t] - xe.data()[t];
        diff += d * d;
        norm += xe.data()[t] * xe.data()[t];
      }
      if (std::sqrt(diff) > 1e-6 * std::max(1.0, std::sqrt(norm))) {
        x = xe;
        if (++strikes >= 2) projector.force_exact();
      }
    }

    // Z block: project the relaxed point onto the l1 ball
    zprev = z.data();
    {
      Vec& zd = z.raw();
      for (std::size_t t = 0; t < p * p; ++t)
        zd[t] = alpha * x.data()[t] + (1.0 - alpha) * zprev[t] + u.data()[t];
      tau_hint = detail::l1_level_warm(zd, prob.k, tau_hint);
      if (tau_hint > 0.0)
        for (std::size_t t = 0; t < p * p; ++t) {
          const double v = zd[t];
          const double m = std::abs(v) - tau_hint;
          zd[t] = m > 0.0 ? (v < 0.0 ? -m : m) : 0.0;
        }
    }

    // scaled dual update and residuals
    double primal = 0.0, dual = 0.0, xnorm2 = 0.0, znorm = 0.0, unorm = 0.0;
    for (double wt : lr.weights) xnorm2 += wt * wt;
    {
      Vec& ud = u.raw();
      for (std::size_t t = 0; t < p * p; ++t) {
        const double xv = x.data()[t], zv = z.data()[t];
        ud[t] += alpha * xv + (1.0 - alpha) * zprev[t] - zv;
        const double pr = xv - zv;
        primal += pr * pr;
        const double dz = zv - zprev[t];
        dual += dz * dz;
        znorm += zv * zv;
        unorm += ud[t] * ud[t];
      }
    }
    primal = std::sqrt(primal);
    dual = rho * std::sqrt(dual);
    znorm = std::sqrt(znorm);
    unorm = std::sqrt(unorm);

    rel_primal = primal / std::max({1.0, std::sqrt(xnorm2), znorm});
    rel_dual = dual / std::max(1.0, rho * unorm);
    if (rel_primal <= opts.tol && rel_dual <= opts.tol) {
      converged = true;
      break;
    }

    // residual balancing: keep primal and dual within a decade of each other
    if (primal > 10.0 * dual && rho < 1e6) {
      rho *= 2.0;
      for (double& t : u.raw()) t *= 0.5;
    } else if (dual > 10.0 * primal && rho > 1e-6) {
      rho *= 0.5;
      for (double& t : u.raw()) t *= 2.0;
    }
  }

  // final answer: exact projection of the last X-block input, polished back
  // into the l1 ball if the stopped iterate sits epsilon outside it
  SdpSolution sol;
  sol.x = project_spectahedron(w);
  {
    const double l1 = absolute_sum_norm(sol.x);
    if (l1 > prob.k) {
      // convex combination with the best feasible coordinate matrix e_j e_j^T
      // restores feasibility exactly at O(excess) cost in the objective
      std::size_t j = 0;
      for (std::size_t i = 1; i < p; ++i)
        if (prob.c(i, i) > prob.c(j, j)) j = i;
      const double denom = l1 - 1.0;
      const double theta =
          denom > 0.0 ? std::min(1.0, (l1 - prob.k) / denom) : 0.0;
      Vec& xd = sol.x.raw();
      for (double& t : xd) t *= (1.0 - theta);
      xd[j * p + j] += theta;
    }
  }

  sol.objective = frobenius_inner(prob.c, sol.x);
  sol.primal_residual = rel_primal;
  sol.dual_residual = rel_dual;
  sol.iterations = iterations;
  sol.status = converged ? SdpStatus::converged : SdpStatus::max_iterations;

  EigenDecomposition ed = full_symmetric_eig(sol.x);
  sol.spectrum = ed.values;
  sol.leading.value = ed.values[0];
  sol.leading.vector.assign(ed.vectors.row(0), ed.vectors.row(0) + p);
  return sol;
}

// ---------------------------------------------------------------------------
// estimator: sample covariance -> SDP -> leading eigenvector of X

struct SpikeEstimate {
  Vec zhat;
  SdpSolution solution;
};

inline SpikeEstimate sdp_estimator(const SampleSet& samples, std::size_t k,
                                   const SdpOptions& opts = {}) {
  if (k == 0 || k > samples.params.p)
    throw std::invalid_argument("sdp_estimator: need 1 <= k <= p");
  SdpProblem prob{sample_covariance(samples), static_cast<double>(k)};
  SpikeEstimate est;
  est.solution = solve(prob, opts);
  est.zhat = est.solution.leading.vector;
  return est;
}

// ---------------------------------------------------------------------------
// feasible witness: the input matrix with the excluded rows and columns
// zeroed out, normalized to unit trace

struct Witness {
  SymMatrix xstar;
  double objective = 0.0;  // <sigma_hat, xstar>
};

inline Witness build_witness(const SymMatrix& sigma_hat,
                             const std::vector<std::size_t>& excluded) {
  const std::size_t p = sigma_hat.dim();
  std::vector<char> drop(p, 0);
  for (std::size_t i : excluded) {
    if (i >= p)
      throw std::invalid_argument("build_witness: excluded index out of range");
    drop[i] = 1;
  }

  SymMatrix tilde(p);
  Vec& td = tilde.raw();
  double tr = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    if (drop[i]) continue;
    for (std::size_t j = i; j < p; ++j) {
      if (drop[j]) continue;
      const double v = sigma_hat(i, j);
      td[i * p + j] = v;
      td[j * p + i] = v;
      if (i == j) tr += v;
    }
  }
  if (!(tr > 0.0))
    throw DegenerateInputError(
        "build_witness: retained block has nonpositive trace");

  Witness w;
  w.xstar = SymMatrix(p);
  Vec& xd = w.xstar.raw();
  for (std::size_t t = 0; t < p * p; ++t) xd[t] = td[t] / tr;
  w.objective = frobenius_inner(sigma_hat, w.xstar);
  return w;
}

}  // namespace sparsespike
