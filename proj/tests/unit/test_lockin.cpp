#include <doctest.h>

#include <cmath>
#include <random>

#include "fmto/error.hpp"
#include "fmto/lockin.hpp"
#include "oracles.hpp"

using namespace fmto;

TEST_CASE("property: lock-in recovers amplitude and phase on jittered timestamps") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 2e-3);
  for (int trial = 0; trial < 50; ++trial) {
    const double f = 0.05 + 5.0 * u(rng);
    const double a = std::pow(10.0, -3 + 6 * u(rng));
    const double ph = oracle::pi * (2 * u(rng) - 1);
    const double dc = 10.0 * u(rng);
    std::vector<double> t, x;
    for (int k = 0; k < 3000; ++k) {
      t.push_back((k + 0.5) / 50.0 + jitter(rng));
      x.push_back(dc + a * std::cos(2 * oracle::pi * f * t.back() + ph));
    }
    const auto r = lock_in(t, x, f);
    CHECK(r.amplitude == doctest::Approx(a).epsilon(1e-9));
    CHECK(std::abs(std::remainder(r.phase - ph, 2 * oracle::pi)) < 1e-8);
    CHECK(r.in_phase == doctest::Approx(a * std::cos(ph)).scale(a * 1e-8));
    CHECK(r.quadrature == doctest::Approx(a * std::sin(ph)).scale(a * 1e-8));
    CHECK(r.integration_time <= t.back() - t.front() + 1e-12);
    CHECK(r.integration_time * f == doctest::Approx(std::round(r.integration_time * f)));
  }
}

TEST_CASE("lock-in rejects an off-reference tone and white noise") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> t, x;
  const double fs = 50.0;
  for (int k = 0; k < 500000; ++k) {
    t.push_back(k / fs);
    x.push_back(1e-3 * std::cos(2 * oracle::pi * 0.1 * t.back()) +
                std::cos(2 * oracle::pi * 0.37 * t.back()) + n(rng));
  }
  const auto r = lock_in(t, x, 0.1);
  // White noise of unit variance gives an amplitude error ~ sqrt(2 / N).
  CHECK(std::abs(r.amplitude - 1e-3) < 4.0 * std::sqrt(2.0 / 5e5));
}

TEST_CASE("lock-in preconditions") {
  std::vector<double> t{0, 1, 2, 3, 4};
  std::vector<double> x{0, 1, 2, 3};
  CHECK_THROWS_AS(lock_in(t, x, 0.1), DomainError);
  x.push_back(0);
  CHECK_THROWS_AS(lock_in(t, x, 0.0), DomainError);
  CHECK_THROWS_AS(lock_in(t, x, 0.1), PreconditionError);  // < 10 periods
  CHECK_THROWS_AS(lock_in(t, x, 0.6), PreconditionError);  // above Nyquist
}

TEST_CASE("linear grid") {
  const auto g = linear_grid(4.5, 5.5, 0.01);
  CHECK(g.size() == 101);
  CHECK(g.back() == doctest::Approx(5.5));
  CHECK(linear_grid(1.0, 1.05, 0.1).size() == 1);
  CHECK_THROWS_AS(linear_grid(1.0, 0.0, 0.1), DomainError);
}

TEST_CASE("noise-free sweep reproduces the susceptibility") {
  const auto p = OscillatorParams::from_frequency(3e-10, 8.74e-3, 39.0, 4.99);
  const std::vector<double> grid{4.0, 4.8, 4.99, 5.2, 6.0};
  SweepSettings s;
  const auto r = frequency_sweep(p, 1e-10, grid, s);
  const auto r_serial = frequency_sweep(p, 1e-10, grid, s, Exec::serial);
  CHECK(r.amplitudes == r_serial.amplitudes);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto chi = susceptibility(grid[i], p);
    CHECK(r.amplitudes[i] ==
          doctest::Approx(s.geometry.lever_gain() * 8.74e-3 * 1e-10 * std::abs(chi)).epsilon(1e-6));
    CHECK(std::abs(r.phases[i] - std::arg(chi)) < 1e-6);
  }
  CHECK(r.phases[2] == doctest::Approx(-oracle::pi / 2).epsilon(1e-6));
  CHECK_THROWS_AS(frequency_sweep(p, 1e-10, std::vector<double>{5.0, 4.0}, s), DomainError);
  CHECK_THROWS_AS(frequency_sweep(p, 1e-10, std::vector<double>{100.0}, s), PreconditionError);
}

TEST_CASE("thermal sweep stays within the noise of the analytic response") {
  const auto p = OscillatorParams::from_frequency(3e-10, 8.74e-3, 39.0, 4.99);
  SweepSettings s;
  s.temperature = 300.0;
  s.seed = 3;
  s.min_duration = 200.0;
  const std::vector<double> grid{4.99};
  // Drive well above the thermal motion in the lock-in bandwidth.
  const auto r = frequency_sweep(p, 1e-9, grid, s);
  const double expect = s.geometry.lever_gain() * 8.74e-3 * 1e-9 * std::abs(susceptibility(4.99, p));
  CHECK(r.amplitudes[0] == doctest::Approx(expect).epsilon(0.05));
}
