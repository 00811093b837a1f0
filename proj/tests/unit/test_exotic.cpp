#include <doctest.h>

#include <cmath>
#include <random>

#include "fmto/calibration.hpp"
#include "fmto/error.hpp"
#include "fmto/exotic.hpp"
#include "fmto/quadrature.hpp"
#include "fmto/reference.hpp"
#include "oracles.hpp"

using namespace fmto;

TEST_CASE("C_lambda peaks at l0 = sqrt(2) lambda") {
  const double lambda = 3e-3;
  // Zero of the derivative, found by bisection on a finite difference.
  const auto d = [&](double l0) {
    const double h = 1e-9;
    return (c_lambda(l0 + h, lambda) - c_lambda(l0 - h, lambda)) / (2 * h);
  };
  const double l_opt = oracle::bisect(d, 0.5 * lambda, 3 * lambda, 1e-12);
  CHECK(l_opt == doctest::Approx(std::sqrt(2.0) * lambda).epsilon(1e-6));
  CHECK(c_lambda(std::sqrt(2.0) * lambda, lambda) == doctest::Approx(1.173871).epsilon(1e-6));
  std::mt19937_64 rng(81);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    CHECK(c_lambda(x * lambda, lambda) <= c_lambda(std::sqrt(2.0) * lambda, lambda) + 1e-15);
    CHECK(c_lambda(x * lambda, lambda) == doctest::Approx(c_lambda(x, 1.0)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(c_lambda(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(c_lambda(1.0, 0.0), DomainError);
}

TEST_CASE("C0 constant") {
  const double expect = 1.054571817e-34 * 4e30 / (4 * oracle::pi * 9.1093837015e-31 * 299792458.0 * 1.76085963023e11);
  CHECK(c0_constant(MaterialProperties::bgo()) == doctest::Approx(expect).epsilon(1e-14));
  CHECK_THROWS_AS(c0_constant(MaterialProperties::ndfeb()), DomainError);
}

TEST_CASE("source configuration") {
  const auto r = ExoticSourceConfig::reference();
  CHECK(r.eps_a() == doctest::Approx(0.2));
  CHECK(r.velocity() == doctest::Approx(2 * oracle::pi * 4.99 * 1.5e-3));
  CHECK_NOTHROW(r.validate());
  CHECK(r.large_amplitude());
  auto bad = r;
  bad.amplitude = 2e-3;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = r;
  bad.lm = 1e-3;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = r;
  bad.solid_angle = 13.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  const auto o = r.at_optimal_distance(1e-3);
  CHECK(o.l0 == doctest::Approx(std::sqrt(2.0) * 1e-3));
  CHECK(o.eps_a() == doctest::Approx(0.2));
  CHECK(o.lm == r.lm);
  const auto far = r.at_optimal_distance(0.5);
  CHECK(far.lm >= far.l0 + 10 * 0.5);
}

TEST_CASE("property: numeric and closed pseudo-field agree for thick shells") {
  std::mt19937_64 rng(82);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    auto c = ExoticSourceConfig::reference();
    const double lambda = std::pow(10.0, -5 + 4 * u(rng));
    c.l0 = lambda * (0.1 + 5 * u(rng));
    c.amplitude = 0.2 * c.l0 * u(rng);
    c.lm = c.l0 + lambda * (40 + 1000 * u(rng));
    const double f45 = std::pow(10.0, -20 + 10 * u(rng));
    const double closed = pseudo_field_closed(c, lambda, f45);
    const double num = pseudo_field_numeric(c, lambda, f45);
    CHECK(num == doctest::Approx(closed).epsilon(1e-9));
  }
  // The spot value quoted for lambda = 1 mm.
  auto c = ExoticSourceConfig::reference();
  c.l0 = std::sqrt(2.0) * 1e-3;
  c.amplitude = 0.2 * c.l0;
  CHECK(pseudo_field_closed(c, 1e-3, 1.0) == doctest::Approx(pseudo_field_numeric(c, 1e-3, 1.0)).epsilon(1e-10));
}

TEST_CASE("property: thin shells match the truncation ratio and a Simpson oracle") {
  std::mt19937_64 rng(83);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    auto c = ExoticSourceConfig::reference();
    const double lambda = 1e-3;
    c.l0 = lambda * (0.5 + 3 * u(rng));
    c.amplitude = 0.1 * c.l0;
    c.lm = c.l0 + lambda * 6.9 * u(rng) + 1e-6;
    const double closed = pseudo_field_closed(c, lambda, 1.0, WarningPolicy::ignore);
    const double num = pseudo_field_numeric(c, lambda, 1.0);
    CHECK(num / closed == doctest::Approx(shell_truncation_ratio(c, lambda)).epsilon(1e-9));
    // Physical-radius integral of (r/lambda + 1) exp(-r/lambda) / lambda, Simpson.
    const double integral = oracle::simpson(
        [&](double r) { return (r / lambda + 1) * std::exp(-r / lambda) / lambda; }, c.l0, c.lm, 2000);
    const double oracle_val = c0_constant(c.material) * c.solid_angle * c.velocity() * lambda * integral;
    CHECK(num == doctest::Approx(oracle_val).epsilon(1e-9));
    CHECK_THROWS_AS(pseudo_field_closed(c, lambda, 1.0), RegimeWarning);
  }
}

TEST_CASE("property: the bound equals the field noise floor") {
  std::mt19937_64 rng(84);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto c = ExoticSourceConfig::reference();
  for (int i = 0; i < 200; ++i) {
    const double lambda = std::pow(10.0, -4 + 3 * u(rng));
    const double eta = std::pow(10.0, -18 + 6 * u(rng));
    const double t = std::pow(10.0, 2 + 4 * u(rng));
    const auto b = coupling_bound(c, lambda, eta, t);
    CHECK(pseudo_field_closed(c, lambda, b.delta_f45, WarningPolicy::ignore) ==
          doctest::Approx(eta / std::sqrt(t)).epsilon(1e-12));
    CHECK(coupling_bound(c, lambda, 2 * eta, t).delta_f45 == doctest::Approx(2 * b.delta_f45).epsilon(1e-14));
    CHECK(coupling_bound(c, lambda, eta, 4 * t).delta_f45 == doctest::Approx(0.5 * b.delta_f45).epsilon(1e-14));
  }
  CHECK(coupling_bound(c, 1e-2, 55e-15, 1e4).delta_f45 == doctest::Approx(1.2897e-16).epsilon(1e-4));
  CHECK_THROWS_AS(coupling_bound(c, 1e-2, 0.0, 1e4), DomainError);
  CHECK_THROWS_AS(coupling_bound(c, 1e-2, 1e-15, 0.0), DomainError);
}

TEST_CASE("property: thermal bound is the bound of the thermal-limit sensor at the optimum") {
  std::mt19937_64 rng(85);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto c = ExoticSourceConfig::reference();
  const auto nd = MaterialProperties::ndfeb();
  for (int i = 0; i < 200; ++i) {
    const double lambda = std::pow(10.0, -4 + 3 * u(rng));
    const double b = std::pow(10.0, -9 + 6 * u(rng));
    const double temp = 0.01 + u(rng);
    const double q = std::pow(10.0, 5 + 3 * u(rng));
    const auto th = thermal_bound(nd, b, temp, q, c, lambda, 1e4);
    const auto opt = c.at_optimal_distance(lambda);
    const double eta = thermal_limit_sensitivity_fr(nd, b, c.f_n, temp, q);
    CHECK(th.sensitivity == doctest::Approx(eta).epsilon(1e-12));
    CHECK(th.delta_f45 == doctest::Approx(coupling_bound(opt, lambda, eta, 1e4).delta_f45).epsilon(1e-10));
    CHECK(th.config.l0 == doctest::Approx(std::sqrt(2.0) * lambda));
  }
}

TEST_CASE("bound curves: serial, parallel and reference agree") {
  const auto c = ExoticSourceConfig::reference();
  const auto grid = log_grid(1e-4, 1e-1, 200);
  CHECK(grid.size() == 200);
  CHECK(grid.front() == 1e-4);
  CHECK(grid.back() == 1e-1);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
  const auto par = coupling_bound_curve(c, grid, 55e-15, 1e4, Exec::parallel);
  const auto ser = coupling_bound_curve(c, grid, 55e-15, 1e4, Exec::serial);
  const auto ref = reference::coupling_bound_curve(c, grid, 55e-15, 1e4);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(par[i].delta_f45 == ser[i].delta_f45);
    CHECK(par[i].delta_f45 == ref[i].delta_f45);
  }
  const auto th = thermal_bound_curve(MaterialProperties::ndfeb(), 1e-6, 0.05, 1e7, c, grid, 1e4);
  const auto th_s = thermal_bound_curve(MaterialProperties::ndfeb(), 1e-6, 0.05, 1e7, c, grid, 1e4, Exec::serial);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(th[i].delta_f45 == th_s[i].delta_f45);
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 10), DomainError);
  CHECK_THROWS_AS(log_grid(1.0, 2.0, 1), DomainError);
}

TEST_CASE("quadrature against closed forms") {
  const auto r = integrate([](double x) { return std::exp(-x) * (x + 1); }, 0.0, 50.0);
  CHECK(r.value == doctest::Approx(2.0 - 52.0 * std::exp(-50.0)).epsilon(1e-12));
  CHECK(r.error < 1e-8);
  const auto s = integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0);
  CHECK(s.value == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  QuadratureOptions abs;
  abs.abs_tol = 1e-10;
  const auto osc = integrate([](double x) { return std::sin(x); }, 0.0, 100 * oracle::pi, abs);
  CHECK(std::abs(osc.value) < 1e-8);
  QuadratureOptions tight;
  tight.max_intervals = 2;
  tight.rel_tol = 1e-15;
  CHECK_THROWS_AS(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, tight), NumericalError);
}
