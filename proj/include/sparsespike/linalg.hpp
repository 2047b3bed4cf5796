#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace sparsespike {

using Vec = std::vector<double>;

// Dense row-major matrix; rows are observations when it holds a sample block.
class RowMatrix {
 public:
  RowMatrix() = default;
  RowMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
  double* row(std::size_t r) { return a_.data() + r * cols_; }
  const double* row(std::size_t r) const { return a_.data() + r * cols_; }
  const Vec& data() const noexcept { return a_; }
  Vec& data() noexcept { return a_; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  Vec a_;
};

// Dense symmetric p x p matrix with full storage. set() writes both triangles;
// hot loops may fill raw() directly but must leave the matrix symmetric.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t p) : p_(p), a_(p * p, 0.0) {}

  // (A + A^T)/2 of a square matrix, for inputs read from files etc.
  static SymMatrix symmetrized(const RowMatrix& full) {
    if (full.rows() != full.cols())
      throw std::invalid_argument("SymMatrix::symmetrized: matrix not square");
    SymMatrix s(full.rows());
    for (std::size_t i = 0; i < s.p_; ++i)
      for (std::size_t j = i; j < s.p_; ++j)
        s.set(i, j, 0.5 * (full(i, j) + full(j, i)));
    return s;
  }

  std::size_t dim() const noexcept { return p_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * p_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    a_[i * p_ + j] = v;
    a_[j * p_ + i] = v;
  }
  const double* row(std::size_t i) const { return a_.data() + i * p_; }
  const Vec& data() const noexcept { return a_; }
  Vec& raw() noexcept { return a_; }

 private:
  std::size_t p_ = 0;
  Vec a_;
};

struct EigenPair {
  double value = 0.0;
  Vec vector;
};

struct EigenDecomposition {
  Vec values;         // descending
  RowMatrix vectors;  // row j is the unit eigenvector for values[j]
};

// ---------------------------------------------------------------------------
// small vector helpers

inline double dot(const Vec& x, const Vec& y) {
  return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

inline double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

inline void matvec(const SymMatrix& a, const Vec& x, Vec& out) {
  const std::size_t p = a.dim();
  out.assign(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    const double* ai = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < p; ++j) s += ai[j] * x[j];
    out[i] = s;
  }
}

// Fix the sign so the entry of largest magnitude is positive; on exact ties
// the lowest index decides.
inline void canonicalize_sign(Vec& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  if (!v.empty() && v[best] < 0)
    for (double& x : v) x = -x;
}

// ---------------------------------------------------------------------------
// sample covariance, 1/n normalizer in both modes

inline SymMatrix sample_covariance(const RowMatrix& x, bool center = false) {
  const std::size_t n = x.rows(), p = x.cols();
  if (n == 0 || p == 0)
    throw std::invalid_argument("sample_covariance: empty sample block");

  Vec mean;
  if (center) {
    mean.assign(p, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const double* xr = x.row(r);
      for (std::size_t j = 0; j < p; ++j) mean[j] += xr[j];
    }
    for (double& m : mean) m /= static_cast<double>(n);
  }

  SymMatrix s(p);
  Vec& sd = s.raw();
  Vec buf(center ? p : 0);
  for (std::size_t r = 0; r < n; ++r) {
    const double* xr = x.row(r);
    if (center) {
      for (std::size_t j = 0; j < p; ++j) buf[j] = xr[j] - mean[j];
      xr = buf.data();
    }
    for (std::size_t i = 0; i < p; ++i) {
      const double f = xr[i];
      double* srow = sd.data() + i * p;
      for (std::size_t j = i; j < p; ++j) srow[j] += f * xr[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < p; ++i) {
    sd[i * p + i] *= inv;
    for (std::size_t j = i + 1; j < p; ++j) {
      const double v = sd[i * p + j] * inv;
      sd[i * p + j] = v;
      sd[j * p + i] = v;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// full symmetric eigendecomposition: Householder tridiagonalization followed
// by implicit-shift QL (the classic tred2/tql2 pair), then sort descending.

namespace detail {

inline void tred2(Vec& v, std::size_t n, Vec& d, Vec& e) {
  for (std::size_t j = 0; j < n; ++j) d[j] = v[(n - 1) * n + j];

  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0, h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = v[(i - 1) * n + j];
        v[i * n + j] = 0.0;
        v[j * n + i] = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = (f > 0) ? -std::sqrt(h) : std::sqrt(h);
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;

      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        v[j * n + i] = f;
        g = e[j] + v[j * n + j] * f;
        for (std::size_t k = j + 1; k < i; ++k) {
          g += v[k * n + j] * d[k];
          e[k] += v[k * n + j] * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (std::size_t k = j; k < i; ++k)
          v[k * n + j] -= (f * e[k] + g * d[k]);
        d[j] = v[(i - 1) * n + j];
        v[i * n + j] = 0.0;
      }
    }
    d[i] = h;
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    v[(n - 1) * n + i] = v[i * n + i];
    v[i * n + i] = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = v[k * n + i + 1] / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += v[k * n + i + 1] * v[k * n + j];
        for (std::size_t k = 0; k <= i; ++k) v[k * n + j] -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) v[k * n + i + 1] = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = v[(n - 1) * n + j];
    v[(n - 1) * n + j] = 0.0;
  }
  v[(n - 1) * n + (n - 1)] = 1.0;
  e[0] = 0.0;
}

inline void tql2(Vec& v, std::size_t n, Vec& d, Vec& e) {
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0, tst1 = 0.0;
  const double eps = std::ldexp(1.0, -52);
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n && std::abs(e[m]) > eps * tst1) ++m;

    if (m > l) {
      int iter = 0;
      do {
        if (++iter > 60)
          throw ConvergenceError("tql2: eigenvalue iteration stalled",
                                 std::abs(e[l]));
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = c, c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = m; i-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          for (std::size_t k = 0; k < n; ++k) {
            h = v[k * n + i + 1];
            v[k * n + i + 1] = s * v[k * n + i] + c * h;
            v[k * n + i] = c * v[k * n + i] - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace detail

inline EigenDecomposition full_symmetric_eig(const SymMatrix& a) {
  const std::size_t p = a.dim();
  if (p == 0) throw std::invalid_argument("full_symmetric_eig: empty matrix");

  Vec v = a.data();  // copy; columns of v become eigenvectors
  Vec d(p, 0.0), e(p, 0.0);
  detail::tred2(v, p, d, e);
  detail::tql2(v, p, d, e);

  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return d[x] > d[y]; });

  EigenDecomposition out;
  out.values.resize(p);
  out.vectors = RowMatrix(p, p);
  for (std::size_t r = 0; r < p; ++r) {
    const std::size_t j = order[r];
    out.values[r] = d[j];
    double* dst = out.vectors.row(r);
    for (std::size_t i = 0; i < p; ++i) dst[i] = v[i * p + j];
    std::size_t best = 0;
    for (std::size_t i = 1; i < p; ++i)
      if (std::abs(dst[i]) > std::abs(dst[best])) best = i;
    if (dst[best] < 0)
      for (std::size_t i = 0; i < p; ++i) dst[i] = -dst[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// leading eigenpair (algebraically largest eigenvalue)
//
// Small matrices go through the full decomposition. Larger ones use power
// iteration on A, which converges to the dominant-magnitude pair; if that
// pair has a negative eigenvalue the iteration is rerun on A + |lambda| I,
// whose dominant pair is the algebraically largest one of A.

namespace detail {

inline Vec deterministic_start(std::size_t p) {
  Vec v(p);
  for (std::size_t i = 0; i < p; ++i)
    v[i] = 0.5 + static_cast<double>(mix64(i + 1) >> 11) * 0x1.0p-53;
  const double nrm = norm2(v);
  for (double& x : v) x /= nrm;
  return v;
}

// returns true on convergence; (value, vector) is the dominant pair of
// A + shift*I minus the shift
inline bool power_iterate(const SymMatrix& a, double shift, double tol,
                          std::size_t max_iter, double& value, Vec& v,
                          double& last_residual) {
  const std::size_t p = a.dim();
  Vec w(p);
  for (std::size_t it = 0; it < max_iter; ++it) {
    matvec(a, v, w);
    if (shift != 0.0)
      for (std::size_t i = 0; i < p; ++i) w[i] += shift * v[i];
    const double lambda = dot(v, w);  // Rayleigh quotient, v is unit
    double res = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      const double r = w[i] - lambda * v[i];
      res += r * r;
    }
    res = std::sqrt(res);
    last_residual = res;
    value = lambda - shift;
    if (res <= tol * std::max(1.0, std::abs(value))) return true;
    const double nw = norm2(w);
    if (nw == 0.0) {  // annihilated: v is an eigenvector for eigenvalue -shift
      value = -shift;
      last_residual = 0.0;
      return true;
    }
    for (std::size_t i = 0; i < p; ++i) v[i] = w[i] / nw;
  }
  return false;
}

}  // namespace detail

inline EigenPair leading_eigenpair(const SymMatrix& a, double tol = 1e-8,
                                   std::size_t max_iter = 25000) {
  const std::size_t p = a.dim();
  if (p == 0) throw std::invalid_argument("leading_eigenpair: empty matrix");

  if (p <= 64) {
    EigenDecomposition full = full_symmetric_eig(a);
    EigenPair out;
    out.value = full.values[0];
    out.vector.assign(full.vectors.row(0), full.vectors.row(0) + p);
    return out;
  }

  Vec v = detail::deterministic_start(p);
  double value = 0.0, res = 0.0;
  if (detail::power_iterate(a, 0.0, tol, max_iter, value, v, res)) {
    if (value >= 0.0) {
      canonicalize_sign(v);
      return {value, std::move(v)};
    }
    // dominant pair is negative; shift to expose the algebraic top
    const double shift = std::abs(value) * (1.0 + 1e-3) + 1e-12;
    Vec v2 = detail::deterministic_start(p);
    double value2 = 0.0;
    if (detail::power_iterate(a, shift, tol, max_iter, value2, v2, res)) {
      canonicalize_sign(v2);
      return {value2, std::move(v2)};
    }
    throw ConvergenceError("leading_eigenpair: shifted power iteration did not converge", res);
  }
  // possible +/- dominant tie; a Gershgorin shift makes the matrix PSD so the
  // dominant pair of the shifted matrix is the algebraically largest of A
  double gersh = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double* ai = a.row(i);
    double rowsum = 0.0;
    for (std::size_t j = 0; j < p; ++j)
      if (j != i) rowsum += std::abs(ai[j]);
    gersh = std::min(gersh, ai[i] - rowsum);
  }
  const double shift = (gersh < 0.0) ? -gersh : 0.0;
  Vec v3 = detail::deterministic_start(p);
  double value3 = 0.0;
  if (detail::power_iterate(a, shift, tol, max_iter, value3, v3, res)) {
    canonicalize_sign(v3);
    return {value3, std::move(v3)};
  }
  throw ConvergenceError("leading_eigenpair: power iteration did not converge", res);
}

// ---------------------------------------------------------------------------
// norms, support selection, rank

inline double trace(const SymMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a(i, i);
  return s;
}

inline double frobenius_inner(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("frobenius_inner: dimension mismatch");
  return dot(a.data(), b.data());
}

// entrywise absolute sum over all p^2 entries
inline double absolute_sum_norm(const SymMatrix& a) {
  double s = 0.0;
  for (double x : a.data()) s += std::abs(x);
  return s;
}

inline double spectral_norm(const SymMatrix& a, double tol = 1e-10,
                            std::size_t max_iter = 25000) {
  const std::size_t p = a.dim();
  if (p <= 256) {
    EigenDecomposition full = full_symmetric_eig(a);
    double best = 0.0;
    for (double x : full.values) best = std::max(best, std::abs(x));
    return best;
  }
  // power iteration on A^2: always a nonnegative dominant eigenvalue
  Vec v = detail::deterministic_start(p), w(p), w2(p);
  double lam2 = 0.0, res = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    matvec(a, v, w);
    matvec(a, w, w2);
    lam2 = dot(v, w2);
    res = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      const double r = w2[i] - lam2 * v[i];
      res += r * r;
    }
    res = std::sqrt(res);
    if (res <= tol * std::max(1.0, std::abs(lam2)))
      return std::sqrt(std::max(lam2, 0.0));
    const double nw = norm2(w2);
    if (nw == 0.0) return 0.0;
    for (std::size_t i = 0; i < p; ++i) v[i] = w2[i] / nw;
  }
  throw ConvergenceError("spectral_norm: power iteration did not converge", res);
}

// Indices of the k largest |entries|, ties toward the lower index, output
// sorted ascending.
inline std::vector<std::size_t> top_k_support(const Vec& v, std::size_t k) {
  if (k == 0 || k > v.size())
    throw std::invalid_argument("top_k_support: k must be in [1, p], got " +
                                std::to_string(k));
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    const double ax = std::abs(v[x]), ay = std::abs(v[y]);
    if (ax != ay) return ax > ay;
    return x < y;
  });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Number of eigenvalues above rel_tol * lambda_max; intended for PSD-like
// matrices (returns 0 when nothing is positive). Full-decomposition cost.
inline std::size_t numerical_rank(const SymMatrix& a, double rel_tol = 1e-6) {
  EigenDecomposition full = full_symmetric_eig(a);
  const double lmax = full.values.empty() ? 0.0 : full.values[0];
  if (lmax <= 0.0) return 0;
  std::size_t r = 0;
  for (double x : full.values)
    if (x > rel_tol * lmax) ++r;
  return r;
}

}  // namespace sparsespike
