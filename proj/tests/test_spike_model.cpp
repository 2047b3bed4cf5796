#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "sparsespike/linalg.hpp"
#include "sparsespike/spike_model.hpp"

using namespace sparsespike;

TEST_CASE("make_spike basics", "[spikemodel]") {
  SpikeVector z = make_spike(10, 4);
  REQUIRE(z.support == std::vector<std::size_t>{0, 1, 2, 3});
  Vec d = z.dense();
  REQUIRE(norm2(d) == Catch::Approx(1.0).margin(1e-12));
  for (std::size_t i = 0; i < 4; ++i) REQUIRE(d[i] == Catch::Approx(0.5));
  for (std::size_t i = 4; i < 10; ++i) REQUIRE(d[i] == 0.0);

  SpikeVector alt = make_spike(6, 3, SignSpec::alternating());
  REQUIRE(alt.signs == std::vector<int>{1, -1, 1});

  SpikeVector ex = make_spike(6, 2, SignSpec::explicit_list({-1, 1}));
  REQUIRE(ex.signs == std::vector<int>{-1, 1});

  SpikeVector r1 = make_spike(6, 4, SignSpec::random(9));
  SpikeVector r2 = make_spike(6, 4, SignSpec::random(9));
  REQUIRE(r1.signs == r2.signs);

  REQUIRE_THROWS_AS(make_spike(5, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(make_spike(5, 6), std::invalid_argument);
  REQUIRE_THROWS_AS(make_spike(5, 2, SignSpec::explicit_list({1})),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(make_spike(5, 2, SignSpec::explicit_list({1, 2})),
                    std::invalid_argument);
}

TEST_CASE("scattered support is a sorted random k-subset", "[spikemodel]") {
  SpikeVector a = make_spike(50, 8, {}, 1234);
  SpikeVector b = make_spike(50, 8, {}, 1234);
  REQUIRE(a.support == b.support);
  REQUIRE(a.support.size() == 8);
  for (std::size_t i = 0; i + 1 < 8; ++i) REQUIRE(a.support[i] < a.support[i + 1]);
  REQUIRE(a.support.back() < 50);

  SpikeVector c = make_spike(50, 8, {}, 99);
  REQUIRE(a.support != c.support);  // overwhelmingly likely
}

TEST_CASE("spike outer product has absolute-sum norm exactly k", "[spikemodel]") {
  for (std::size_t k = 1; k <= 20; ++k) {
    SpikeVector z = make_spike(25, k, SignSpec::alternating());
    Vec d = z.dense();
    SymMatrix zz(25);
    for (std::size_t i = 0; i < 25; ++i)
      for (std::size_t j = i; j < 25; ++j) zz.set(i, j, d[i] * d[j]);
    REQUIRE(absolute_sum_norm(zz) ==
            Catch::Approx(static_cast<double>(k)).margin(1e-9));
  }
}

TEST_CASE("population covariance is beta z z^T plus identity", "[spikemodel]") {
  ModelParams m = ModelParams::create(100, 30, 5, 1.7);
  SymMatrix s = population_covariance(m);
  Vec z = m.spike.dense();
  for (std::size_t i = 0; i < 30; ++i)
    REQUIRE(s(i, i) == Catch::Approx(1.0 + 1.7 * z[i] * z[i]));

  EigenPair top = leading_eigenpair(s);
  REQUIRE(top.value == Catch::Approx(2.7).margin(1e-9));
  REQUIRE(std::abs(dot(top.vector, z)) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("model parameter validation", "[spikemodel]") {
  REQUIRE_THROWS_AS(ModelParams::create(0, 10, 2, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(ModelParams::create(10, 10, 11, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(ModelParams::create(10, 10, 2, -0.5), std::invalid_argument);

  // theorem mode enforces beta <= sqrt(p/n)
  ModelParams weak = ModelParams::create(100, 400, 10, 1.5);
  REQUIRE_NOTHROW(weak.validate(true));
  ModelParams strong = ModelParams::create(400, 100, 10, 1.5);
  REQUIRE(!strong.weak_signal_regime());
  REQUIRE_THROWS_AS(strong.validate(true), std::invalid_argument);
}

TEST_CASE("draw_samples is bit-exact reproducible", "[spikemodel]") {
  ModelParams m = ModelParams::create(20, 15, 3, 2.0);
  SampleSet a = draw_samples(m, 77);
  SampleSet b = draw_samples(m, 77);
  REQUIRE(a.data.data() == b.data.data());
  SampleSet c = draw_samples(m, 78);
  REQUIRE(a.data.data() != c.data.data());
  REQUIRE(a.data.rows() == 20);
  REQUIRE(a.data.cols() == 15);
}

TEST_CASE("sample moments match the model", "[spikemodel]") {
  // mean vector: norm of the empirical mean is O(sqrt(p/n))
  ModelParams m0 = ModelParams::create(10000, 10, 2, 1.0);
  SampleSet s0 = draw_samples(m0, 5);
  Vec mean(10, 0.0);
  for (std::size_t i = 0; i < 10000; ++i) {
    const double* r = s0.data.row(i);
    for (std::size_t j = 0; j < 10; ++j) mean[j] += r[j];
  }
  for (double& x : mean) x /= 10000.0;
  REQUIRE(norm2(mean) <= 4.0 * std::sqrt(10.0 / 10000.0));

  // covariance entries within 5/sqrt(n) of the population at beta = 1
  ModelParams m1 = ModelParams::create(10000, 6, 4, 1.0);
  SampleSet s1 = draw_samples(m1, 11);
  SymMatrix emp = sample_covariance(s1);
  SymMatrix pop = population_covariance(m1);
  const double tol = 5.0 / std::sqrt(10000.0);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      REQUIRE(std::abs(emp(i, j) - pop(i, j)) < tol);
}

TEST_CASE("null-model trace moments", "[spikemodel]") {
  // beta = 0: tr(S)/p ~ 1 and tr(S^2)/(p(1+p/n)) ~ 1
  ModelParams m = ModelParams::create(500, 500, 1, 0.0);
  SampleSet s = draw_samples(m, 31337);
  SymMatrix c = sample_covariance(s);
  const double tr = trace(c);
  double tr2 = 0.0;
  for (double x : c.data()) tr2 += x * x;
  REQUIRE(std::abs(tr / 500.0 - 1.0) < 0.10);
  REQUIRE(std::abs(tr2 / (500.0 * 2.0) - 1.0) < 0.10);
}

TEST_CASE("sample CSV header carries n,p,k,beta,seed and rows match", "[spikemodel]") {
  ModelParams m = ModelParams::create(4, 3, 2, 1.5);
  SampleSet s = draw_samples(m, 42);
  std::ostringstream os;
  write_samples_csv(s, os);
  const std::string text = os.str();

  std::istringstream is(text);
  std::string header;
  std::getline(is, header);
  SampleCsvHeader h = parse_samples_csv_header(header);
  REQUIRE(h.n == 4);
  REQUIRE(h.p == 3);
  REQUIRE(h.k == 2);
  REQUIRE(h.beta == Catch::Approx(1.5));
  REQUIRE(h.seed == 42);

  std::size_t rows = 0;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  REQUIRE(rows == 4);

  // deterministic text
  std::ostringstream os2;
  write_samples_csv(s, os2);
  REQUIRE(os2.str() == text);

  REQUIRE_THROWS_AS(parse_samples_csv_header("no header"), std::invalid_argument);
}
