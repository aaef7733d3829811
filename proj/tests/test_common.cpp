#include <doctest.h>

#include <atomic>
#include <cmath>
#include <set>
#include <stdexcept>

#include "perfband/common/matrix.hpp"
#include "perfband/common/parallel.hpp"
#include "perfband/common/rng.hpp"
#include "perfband/common/stats.hpp"

using namespace perfband;

TEST_CASE("rng: same seed reproduces the stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: child streams are independent of consumption order") {
  Rng a(7);
  a.uniform();
  a.uniform();
  Rng b(7);
  CHECK(a.child(3).next_u64() == b.child(3).next_u64());
  CHECK(a.child(3).next_u64() != a.child(4).next_u64());
}

TEST_CASE("rng: uniform stays in [0, 1) and covers the range") {
  Rng rng(1);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("rng: uniform_index is unbiased enough over 3 buckets") {
  Rng rng(5);
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 30000; ++i) counts[rng.uniform_index(3)]++;
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("rng: uniform_int covers the inclusive range") {
  Rng rng(9);
  std::set<long> seen;
  for (int i = 0; i < 1000; ++i) {
    long v = rng.uniform_int(5, 8);
    CHECK(v >= 5);
    CHECK(v <= 8);
    seen.insert(v);
  }
  CHECK(seen.size() == 4);
}

TEST_CASE("rng: normal matches first two moments") {
  Rng rng(11);
  double sum = 0.0, sumsq = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    sum += x;
    sumsq += x * x;
  }
  double mean = sum / n;
  double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("rng: shuffle is a permutation and seed-stable") {
  Rng a(13), b(13);
  std::vector<int> va{1, 2, 3, 4, 5, 6, 7}, vb = va;
  a.shuffle(va);
  b.shuffle(vb);
  CHECK(va == vb);
  std::multiset<int> sa(va.begin(), va.end());
  CHECK(sa == std::multiset<int>({1, 2, 3, 4, 5, 6, 7}));
}

TEST_CASE("matrix: indexing and row selection") {
  Matrix m(3, 2);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 2; ++c) m.at(r, c) = static_cast<double>(10 * r + c);
  Matrix sel = m.select_rows({2, 0});
  CHECK(sel.rows == 2);
  CHECK(sel.at(0, 0) == 20.0);
  CHECK(sel.at(0, 1) == 21.0);
  CHECK(sel.at(1, 0) == 0.0);
}

TEST_CASE("stats: mean/variance/stdev against precomputed values") {
  std::vector<double> a{3.1, -2.0, 5.5, 0.0, 9.9, 4.2, 4.2, -7.7, 1.3, 6.0};
  CHECK(mean(a) == doctest::Approx(2.45).epsilon(1e-12));
  CHECK(variance(a, 1) == doctest::Approx(23.78944444444444).epsilon(1e-12));
  CHECK(stdev(a, 1) == doctest::Approx(4.877442408111493).epsilon(1e-12));
}

TEST_CASE("stats: quantile uses linear interpolation between order statistics") {
  std::vector<double> a{3.1, -2.0, 5.5, 0.0, 9.9, 4.2, 4.2, -7.7, 1.3, 6.0};
  CHECK(quantile(a, 0.0) == doctest::Approx(-7.7));
  CHECK(quantile(a, 0.1) == doctest::Approx(-2.57));
  CHECK(quantile(a, 0.25) == doctest::Approx(0.325));
  CHECK(quantile(a, 0.5) == doctest::Approx(3.65));
  CHECK(quantile(a, 0.75) == doctest::Approx(5.175));
  CHECK(quantile(a, 0.9) == doctest::Approx(6.39));
  CHECK(quantile(a, 1.0) == doctest::Approx(9.9));
}

TEST_CASE("stats: entropy in nats") {
  std::vector<double> p{0.2, 0.5, 0.3};
  CHECK(entropy_nats(p) == doctest::Approx(1.0296530140645737).epsilon(1e-12));
  std::vector<double> point{1.0, 0.0};
  CHECK(entropy_nats(point) == doctest::Approx(0.0));
}

TEST_CASE("stats: normal quantile against reference values") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(normal_quantile(0.9) == doctest::Approx(1.2815515655446004).epsilon(1e-9));
  CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-9));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-9));
  CHECK(normal_quantile(0.99) == doctest::Approx(2.3263478740408408).epsilon(1e-9));
  CHECK(two_sided_normal_quantile(0.95) == doctest::Approx(1.959963984540054).epsilon(1e-9));
}

TEST_CASE("parallel_for: covers every index once, any job count") {
  for (int jobs : {1, 2, 4}) {
    std::vector<std::atomic<int>> hits(257);
    parallel_for(hits.size(), jobs, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
}

TEST_CASE("parallel_for: propagates the first exception") {
  CHECK_THROWS_AS(
      parallel_for(16, 4,
                   [](std::size_t i) {
                     if (i == 7) throw std::runtime_error("boom");
                   }),
      std::runtime_error);
}
