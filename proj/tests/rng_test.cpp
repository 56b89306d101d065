#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <thread>

#include "tinyrl/rng.hpp"

using namespace tinyrl;

TEST_CASE("identical (seed, stream) pairs produce identical sequences") {
  auto a = make_rng(42, 0);
  auto b = make_rng(42, 0);
  for (int i = 0; i < 10000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct stream ids diverge") {
  auto a = make_rng(42, 0);
  auto b = make_rng(42, 1);
  bool differs = false;
  for (int i = 0; i < 16; ++i)
    if (a.next_u64() != b.next_u64()) differs = true;
  CHECK(differs);
}

TEST_CASE("draws are identical regardless of thread count") {
  std::vector<std::uint64_t> serial;
  {
    auto r = make_rng(42, 7);
    for (int i = 0; i < 1000; ++i) serial.push_back(r.next_u64());
  }
  std::vector<std::uint64_t> threaded(1000);
  std::vector<std::thread> pool;
  for (int w = 0; w < 8; ++w) {
    pool.emplace_back([&, w] {
      auto r = make_rng(42, 7);
      std::vector<std::uint64_t> local;
      for (int i = 0; i < 1000; ++i) local.push_back(r.next_u64());
      if (w == 3) threaded = local;
    });
  }
  for (auto& t : pool) t.join();
  CHECK(serial == threaded);
}

TEST_CASE("next_below stays in range and covers values") {
  auto r = make_rng(1, 2);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 5000; ++i) counts[r.next_below(5)]++;
  for (int c : counts) CHECK(c > 800);
}

TEST_CASE("next_double lies in [0,1)") {
  auto r = make_rng(9, 9);
  for (int i = 0; i < 1000; ++i) {
    double d = r.next_double();
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
  }
}

TEST_CASE("categorical sampling respects the distribution") {
  auto r = make_rng(3, 4);
  std::vector<double> probs = {0.25, 0.25, 0.25, 0.25};
  std::vector<int> counts(4, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) counts[r.next_categorical(probs)]++;
  // 3 sigma for a binomial(n, 0.25)
  const double sigma = std::sqrt(n * 0.25 * 0.75);
  for (int c : counts) CHECK(std::abs(c - n * 0.25) < 3 * sigma);
}

TEST_CASE("shuffle is deterministic for a fixed stream") {
  std::vector<int> a{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> b = a;
  auto ra = make_rng(5, 5);
  auto rb = make_rng(5, 5);
  shuffle(a, ra);
  shuffle(b, rb);
  CHECK(a == b);
}
