#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "watrec/rng.hpp"
#include "watrec/stats.hpp"

using namespace watrec;

TEST_CASE("mix64 is a deterministic bijection on sampled points") {
  CHECK(mix64(0) == mix64(0));
  CHECK(mix64(1) != mix64(2));
  std::set<std::uint64_t> seen;
  for (std::uint64_t x = 0; x < 4096; ++x) seen.insert(mix64(x));
  CHECK(seen.size() == 4096);
}

TEST_CASE("derive_stream is order and length sensitive") {
  const std::uint64_t seed = 20260818;
  CHECK(derive_stream(seed, {1, 2}) == derive_stream(seed, {1, 2}));
  CHECK(derive_stream(seed, {1, 2}) != derive_stream(seed, {2, 1}));
  CHECK(derive_stream(seed, {1}) != derive_stream(seed, {1, 0}));
  CHECK(derive_stream(seed, {}) != derive_stream(seed, {0}));
  CHECK(derive_stream(seed, {7}) != derive_stream(seed + 1, {7}));

  // children with different key tails should not collide in practice
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 64; ++i)
    for (std::uint64_t j = 0; j < 64; ++j) seen.insert(derive_stream(seed, {i, j}));
  CHECK(seen.size() == 64 * 64);
}

TEST_CASE("Rng replays exactly from the same seed") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t x = a.next_u64();
    all_equal = all_equal && (x == b.next_u64());
    any_diff = any_diff || (x != c.next_u64());
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform01 stays in [0,1) with a sane mean") {
  Rng rng(7);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("uniform_open never returns 0") {
  Rng rng(11);
  for (int i = 0; i < 100000; ++i) {
    double u = rng.uniform_open();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("exponential draws are positive with the requested mean") {
  for (double mean : {0.8, 26.0, 155.0}) {
    Rng rng(static_cast<std::uint64_t>(mean * 1000) + 5);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      double x = rng.exponential(mean);
      REQUIRE(x > 0.0);
      sum += x;
    }
    CHECK(sum / n == doctest::Approx(mean).epsilon(0.02));
  }
}

TEST_CASE("below(n) is bounded and roughly uniform") {
  Rng rng(99);
  const std::uint64_t n = 8;
  std::array<int, 8> counts{};
  const int draws = 160000;
  for (int i = 0; i < draws; ++i) {
    std::uint64_t v = rng.below(n);
    REQUIRE(v < n);
    ++counts[v];
  }
  const double expect = static_cast<double>(draws) / static_cast<double>(n);
  for (int c : counts) CHECK(std::abs(c - expect) < 0.05 * expect);
  CHECK(rng.below(1) == 0);
}

TEST_CASE("normal cdf matches reference values") {
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(norm_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
  CHECK(norm_cdf(2.0) == doctest::Approx(0.9772498680518208).epsilon(1e-14));
  CHECK(norm_cdf(-1.0) == doctest::Approx(1.0 - 0.8413447460685429).epsilon(1e-14));
  CHECK(norm_cdf(1.0 / std::sqrt(0.2)) == doctest::Approx(0.9873263406612659).epsilon(1e-14));
  CHECK(norm_cdf(8.0) > 1.0 - 1e-12);
  CHECK(norm_cdf(-8.0) < 1e-12);
}

TEST_CASE("norm_ppf inverts norm_cdf across the open interval") {
  for (double p : {1e-9, 1e-6, 0.02425, 0.1, 0.25, 0.5, 0.75, 0.9, 0.97575, 1 - 1e-6}) {
    double x = norm_ppf(p);
    CHECK(norm_cdf(x) == doctest::Approx(p).epsilon(1e-11));
  }
  CHECK(norm_ppf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::isinf(norm_ppf(0.0)));
  CHECK(std::isinf(norm_ppf(1.0)));
  CHECK(norm_ppf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
}

TEST_CASE("sample_normal has standard moments") {
  Rng rng(2024);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double z = sample_normal(rng);
    sum += z;
    sumsq += z * z;
  }
  double mean = sum / n;
  double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("sample_lognormal matches its analytic median and mean") {
  Rng rng(31337);
  const double mu = std::log(0.34);
  const double sigma = 0.55;
  const int n = 200000;
  double sum = 0.0;
  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) {
    vals[static_cast<size_t>(i)] = sample_lognormal(rng, mu, sigma);
    REQUIRE(vals[static_cast<size_t>(i)] > 0.0);
    sum += vals[static_cast<size_t>(i)];
  }
  std::nth_element(vals.begin(), vals.begin() + n / 2, vals.end());
  CHECK(vals[n / 2] == doctest::Approx(std::exp(mu)).epsilon(0.02));
  CHECK(sum / n == doctest::Approx(std::exp(mu + 0.5 * sigma * sigma)).epsilon(0.02));
}
