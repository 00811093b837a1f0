#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>

namespace fmto {

/// Selects the OpenMP path or the plain serial loop of a kernel. Both paths
/// produce bitwise-identical results; every random stream is keyed by item
/// index, never by thread.
enum class Exec { serial, parallel };

/// SplitMix64 finalizer. Derives independent per-item seeds from a base seed.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int max_threads() noexcept;
void set_threads(int n) noexcept;

/// Runs body(i) for i in [0, n). Exceptions thrown by any iteration are
/// captured and the first one is rethrown after the loop.
template <class Body>
void parallel_for(std::ptrdiff_t n, Exec exec, Body&& body) {
  std::exception_ptr error;
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(fmto_parallel_for_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

/// As parallel_for, for iterations of very uneven cost.
template <class Body>
void parallel_for_dynamic(std::ptrdiff_t n, Exec exec, Body&& body) {
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1) if (exec == Exec::parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(fmto_parallel_for_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace fmto
