#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "rng.hpp"

namespace sparsespike {

// How the nonzero entries of the spike get their signs.
struct SignSpec {
  enum class Kind { all_positive, alternating, explicit_list, random_signs };
  Kind kind = Kind::all_positive;
  std::vector<int> signs;      // explicit_list: k entries of +/-1
  std::uint64_t seed = 0;      // random_signs

  static SignSpec all_positive() { return {}; }
  static SignSpec alternating() { return {Kind::alternating, {}, 0}; }
  static SignSpec explicit_list(std::vector<int> s) {
    return {Kind::explicit_list, std::move(s), 0};
  }
  static SignSpec random(std::uint64_t seed) {
    return {Kind::random_signs, {}, seed};
  }
};

// k-sparse unit vector with entries +/- 1/sqrt(k) on its support.
struct SpikeVector {
  std::size_t p = 0, k = 0;
  std::vector<std::size_t> support;  // ascending
  std::vector<int> signs;            // aligned with support

  Vec dense() const {
    Vec z(p, 0.0);
    const double mag = 1.0 / std::sqrt(static_cast<double>(k));
    for (std::size_t i = 0; i < k; ++i)
      z[support[i]] = signs[i] > 0 ? mag : -mag;
    return z;
  }
};

// Support defaults to {0..k-1}; scatter_seed draws a uniformly random k-subset
// instead (kept sorted, signs stay aligned with the sorted support).
inline SpikeVector make_spike(std::size_t p, std::size_t k,
                              const SignSpec& spec = {},
                              std::optional<std::uint64_t> scatter_seed = {}) {
  if (k == 0 || k > p)
    throw std::invalid_argument("make_spike: need 1 <= k <= p, got k=" +
                                std::to_string(k) + ", p=" + std::to_string(p));

  SpikeVector z;
  z.p = p;
  z.k = k;

  if (scatter_seed) {
    // partial Fisher-Yates over the index range
    std::vector<std::size_t> idx(p);
    for (std::size_t i = 0; i < p; ++i) idx[i] = i;
    CounterRng rng(*scatter_seed);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % (p - i));
      std::swap(idx[i], idx[j]);
    }
    z.support.assign(idx.begin(), idx.begin() + k);
    std::sort(z.support.begin(), z.support.end());
  } else {
    z.support.resize(k);
    for (std::size_t i = 0; i < k; ++i) z.support[i] = i;
  }

  z.signs.assign(k, 1);
  switch (spec.kind) {
    case SignSpec::Kind::all_positive:
      break;
    case SignSpec::Kind::alternating:
      for (std::size_t i = 0; i < k; ++i) z.signs[i] = (i % 2 == 0) ? 1 : -1;
      break;
    case SignSpec::Kind::explicit_list: {
      if (spec.signs.size() != k)
        throw std::invalid_argument("make_spike: explicit sign list has " +
                                    std::to_string(spec.signs.size()) +
                                    " entries, expected " + std::to_string(k));
      for (std::size_t i = 0; i < k; ++i) {
        if (spec.signs[i] != 1 && spec.signs[i] != -1)
          throw std::invalid_argument("make_spike: signs must be +/-1");
        z.signs[i] = spec.signs[i];
      }
      break;
    }
    case SignSpec::Kind::random_signs: {
      CounterRng rng(spec.seed);
      for (std::size_t i = 0; i < k; ++i)
        z.signs[i] = (rng.next_u64() & 1) ? 1 : -1;
      break;
    }
  }
  return z;
}

struct ModelParams {
  std::size_t n = 0, p = 0, k = 0;
  double beta = 0.0;
  SpikeVector spike;

  static ModelParams create(std::size_t n, std::size_t p, std::size_t k,
                            double beta, const SignSpec& signs = {},
                            std::optional<std::uint64_t> scatter_seed = {}) {
    ModelParams m;
    m.n = n;
    m.p = p;
    m.k = k;
    m.beta = beta;
    m.spike = make_spike(p, k, signs, scatter_seed);
    m.validate();
    return m;
  }

  // theorem_mode additionally enforces the weak-signal regime beta <= sqrt(p/n)
  void validate(bool theorem_mode = false) const {
    if (n < 1) throw std::invalid_argument("ModelParams: n must be >= 1");
    if (k == 0 || k > p)
      throw std::invalid_argument("ModelParams: need 1 <= k <= p");
    if (!(beta >= 0.0))
      throw std::invalid_argument("ModelParams: beta must be >= 0");
    if (spike.p != p || spike.k != k)
      throw std::invalid_argument("ModelParams: spike does not match (p, k)");
    if (theorem_mode && !weak_signal_regime())
      throw std::invalid_argument(
          "ModelParams: beta exceeds sqrt(p/n), outside the weak-signal regime");
  }

  bool weak_signal_regime() const {
    return beta <= std::sqrt(static_cast<double>(p) / static_cast<double>(n));
  }
};

// Sigma = beta z z^T + I
inline SymMatrix population_covariance(const ModelParams& m) {
  m.validate();
  SymMatrix s(m.p);
  const Vec z = m.spike.dense();
  Vec& sd = s.raw();
  for (std::size_t i = 0; i < m.p; ++i) {
    for (std::size_t j = i; j < m.p; ++j) {
      const double v = m.beta * z[i] * z[j] + (i == j ? 1.0 : 0.0);
      sd[i * m.p + j] = v;
      sd[j * m.p + i] = v;
    }
  }
  return s;
}

struct SampleSet {
  RowMatrix data;  // n rows of dimension p
  ModelParams params;
  std::uint64_t seed = 0;
};

// Row i is sqrt(beta) * u_i * z + xi_i with u_i, xi_i iid standard normal.
// Bit-exact reproducible from (params, seed): u_i is drawn first, then the
// noise row left to right.
inline SampleSet draw_samples(const ModelParams& m, std::uint64_t seed) {
  m.validate();
  SampleSet out;
  out.params = m;
  out.seed = seed;
  out.data = RowMatrix(m.n, m.p);

  const double mag = std::sqrt(m.beta) / std::sqrt(static_cast<double>(m.k));
  CounterRng rng(seed);
  for (std::size_t i = 0; i < m.n; ++i) {
    const double u = rng.next_gaussian();
    double* row = out.data.row(i);
    for (std::size_t j = 0; j < m.p; ++j) row[j] = rng.next_gaussian();
    const double su = mag * u;
    for (std::size_t t = 0; t < m.k; ++t)
      row[m.spike.support[t]] += m.spike.signs[t] > 0 ? su : -su;
  }
  return out;
}

inline SymMatrix sample_covariance(const SampleSet& s, bool center = false) {
  return sample_covariance(s.data, center);
}

// ---------------------------------------------------------------------------
// debug CSV: one-line header "# n,p,k,beta,seed" (the five generating values
// in that order), then n comma-separated sample rows

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline void write_samples_csv(const SampleSet& s, std::ostream& os) {
  os << "# " << s.params.n << ',' << s.params.p << ',' << s.params.k << ','
     << detail::format_double(s.params.beta) << ',' << s.seed << '\n';
  for (std::size_t i = 0; i < s.params.n; ++i) {
    const double* row = s.data.row(i);
    for (std::size_t j = 0; j < s.params.p; ++j) {
      if (j) os << ',';
      os << detail::format_double(row[j]);
    }
    os << '\n';
  }
}

// Parses the header line back; used to confirm a dump is regenerable.
struct SampleCsvHeader {
  std::size_t n, p, k;
  double beta;
  std::uint64_t seed;
};

inline SampleCsvHeader parse_samples_csv_header(const std::string& line) {
  if (line.size() < 2 || line[0] != '#')
    throw std::invalid_argument("sample CSV: missing '#' header line");
  std::istringstream ss(line.substr(1));
  SampleCsvHeader h{};
  char c;
  if (!(ss >> h.n >> c >> h.p >> c >> h.k >> c >> h.beta >> c >> h.seed))
    throw std::invalid_argument("sample CSV: malformed header line");
  return h;
}

}  // namespace sparsespike
