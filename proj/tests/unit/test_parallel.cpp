#include <doctest.h>

#include <atomic>
#include <set>
#include <stdexcept>
#include <vector>

#include "fmto/parallel.hpp"

using namespace fmto;

TEST_CASE("mix_seed gives distinct streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::uint64_t i = 0; i < 5000; ++i) seen.insert(mix_seed(s, i));
  CHECK(seen.size() == 20000);
  static_assert(mix_seed(1, 2) == mix_seed(1, 2));
}

TEST_CASE("parallel_for visits every index once, in either mode") {
  for (auto exec : {Exec::serial, Exec::parallel}) {
    std::vector<int> hits(10007, 0);
    parallel_for(static_cast<std::ptrdiff_t>(hits.size()), exec, [&](std::ptrdiff_t i) { ++hits[static_cast<std::size_t>(i)]; });
    for (int h : hits) CHECK(h == 1);
    std::atomic<long> total{0};
    parallel_for_dynamic(1000, exec, [&](std::ptrdiff_t i) { total += i; });
    CHECK(total == 999 * 1000 / 2);
  }
}

TEST_CASE("exceptions escape parallel loops") {
  for (auto exec : {Exec::serial, Exec::parallel}) {
    CHECK_THROWS_AS(parallel_for(100, exec, [](std::ptrdiff_t i) {
                      if (i == 57) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
    CHECK_THROWS_AS(parallel_for_dynamic(100, exec, [](std::ptrdiff_t i) {
                      if (i % 10 == 3) throw std::logic_error("boom");
                    }),
                    std::logic_error);
  }
}

TEST_CASE("thread control") {
  const int before = max_threads();
  CHECK(before >= 1);
  set_threads(2);
  CHECK(max_threads() == 2);
  set_threads(before);
  CHECK(max_threads() == before);
}
