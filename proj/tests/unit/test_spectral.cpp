#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fmto/core.hpp"
#include "fmto/dynamics.hpp"
#include "fmto/error.hpp"
#include "fmto/reference.hpp"
#include "fmto/spectral.hpp"
#include "oracles.hpp"

using namespace fmto;

namespace {

struct Series {
  std::vector<double> t, x;
};

Series white(std::size_t n, double fs, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  Series s;
  for (std::size_t i = 0; i < n; ++i) {
    s.t.push_back(static_cast<double>(i) / fs);
    s.x.push_back(g(rng));
  }
  return s;
}

}  // namespace

TEST_CASE("windows") {
  CHECK(window_from_string("hann") == Window::hann);
  CHECK(window_from_string("rectangular") == Window::rectangular);
  CHECK(window_from_string("boxcar") == Window::rectangular);
  CHECK(to_string(Window::hann) == "hann");
  CHECK_THROWS_AS(window_from_string("kaiser"), DomainError);
}

TEST_CASE("property: rectangular Welch satisfies Parseval per segment") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double fs = 10.0 + 40.0 * u(rng);
    const auto s = white(4000, fs, 0.1 + u(rng), 100 + trial);
    WelchOptions o;
    o.window = Window::rectangular;
    o.segment_length = 1000.0 / fs;
    const auto r = welch_psd(s.t, s.x, o);
    REQUIRE(r.segments.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) {
      std::vector<double> seg(s.x.begin() + static_cast<long>(k * 1000),
                              s.x.begin() + static_cast<long>((k + 1) * 1000));
      double total = 0.0;
      for (double p : r.segments[k].psd) total += p * r.segments[k].bin_width;
      CHECK(total == doctest::Approx(oracle::variance(seg) * 999.0 / 1000.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("Welch segments match a direct-DFT periodogram") {
  const auto s = white(1200, 50.0, 1.0, 7);
  WelchOptions o;
  o.segment_length = 400.0 / 50.0;
  const auto r = welch_psd(s.t, s.x, o);
  REQUIRE(r.segments.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<double> seg(s.x.begin() + static_cast<long>(k * 400),
                            s.x.begin() + static_cast<long>((k + 1) * 400));
    const auto p = oracle::periodogram(seg, oracle::hann(400), 50.0);
    REQUIRE(p.size() == r.segments[k].size());
    for (std::size_t j = 0; j < p.size(); ++j)
      CHECK(r.segments[k].psd[j] == doctest::Approx(p[j]).epsilon(1e-9).scale(1e-14));
  }
  CHECK(r.average.frequencies[1] == doctest::Approx(50.0 / 400.0));
  CHECK(r.average.n_segments_used == 3);
}

TEST_CASE("FFTW, serial and direct-DFT Welch agree") {
  const auto s = white(6000, 50.0, 1.0, 8);
  WelchOptions o;
  o.segment_length = 20.0;
  o.overlap = 0.5;
  const auto par = welch_psd(s.t, s.x, o, Exec::parallel);
  const auto ser = welch_psd(s.t, s.x, o, Exec::serial);
  const auto ref = reference::welch_psd(s.t, s.x, o);
  CHECK(par.average.psd == ser.average.psd);
  REQUIRE(ref.segments.size() == par.segments.size());
  CHECK(par.segments.size() == 11);
  for (std::size_t j = 0; j < par.average.size(); ++j)
    CHECK(par.average.psd[j] == doctest::Approx(ref.average.psd[j]).epsilon(1e-9).scale(1e-14));
}

TEST_CASE("white noise level and tone area") {
  const double fs = 50.0, sigma = 0.3, a = 0.05, f0 = 3.0;
  auto s = white(500000, fs, sigma, 9);
  for (std::size_t i = 0; i < s.x.size(); ++i) s.x[i] += a * std::cos(2 * oracle::pi * f0 * s.t[i] + 0.4);
  const auto r = welch_psd(s.t, s.x, {});
  double level = 0.0;
  int n = 0;
  for (std::size_t j = 0; j < r.average.size(); ++j) {
    const double f = r.average.frequencies[j];
    if (f > 5.0 && f < 20.0) {
      level += r.average.psd[j];
      ++n;
    }
  }
  CHECK(level / n == doctest::Approx(2 * sigma * sigma / fs).epsilon(0.01));
  const auto area = peak_area(r.average, f0, 2);
  CHECK(area.area == doctest::Approx(0.5 * a * a).epsilon(0.02));
  CHECK(area.floor == doctest::Approx(2 * sigma * sigma / fs).epsilon(0.05));
  CHECK(area.f_low < f0);
  CHECK(area.f_high > f0);
}

TEST_CASE("Welch preconditions") {
  auto s = white(1000, 10.0, 1.0, 1);
  WelchOptions o;
  o.segment_length = 60.0;
  CHECK_THROWS_AS(welch_psd(s.t, s.x, o), PreconditionError);
  o.segment_length = 10.0;
  s.t[500] += 0.09;
  CHECK_THROWS_AS(welch_psd(s.t, s.x, o), PreconditionError);
  s.t[500] -= 0.09;
  s.t[500] += 0.02;  // mild jitter is tolerated
  CHECK_NOTHROW(welch_psd(s.t, s.x, o));
  // Frame-like jitter: each time within 0.45 of a step of its grid point.
  auto j = white(20000, 50.0, 1.0, 2);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d(0.0, 2e-3);
  for (auto& t : j.t) t += std::clamp(d(rng), -9e-3, 9e-3);
  CHECK_NOTHROW(welch_psd(j.t, j.x, o));
  o.overlap = 1.0;
  CHECK_THROWS_AS(welch_psd(s.t, s.x, o), DomainError);
  s.x.pop_back();
  CHECK_THROWS_AS(welch_psd(s.t, s.x, {}), DomainError);
}

TEST_CASE("segment SNR ranking picks the loud segments") {
  const double fs = 50.0, f0 = 0.1;
  auto s = white(60 * 5000, fs, 1.0, 10);
  // Tone present only in segments 7, 23 and 41, with decreasing amplitude.
  const std::pair<int, double> loud[] = {{7, 0.3}, {23, 0.2}, {41, 0.1}};
  for (auto [seg, a] : loud)
    for (std::size_t i = static_cast<std::size_t>(seg) * 5000; i < static_cast<std::size_t>(seg + 1) * 5000; ++i)
      s.x[i] += a * std::cos(2 * oracle::pi * f0 * s.t[i]);
  const auto r = welch_psd(s.t, s.x, {});
  REQUIRE(r.segments.size() == 60);
  const auto sel = select_segments_by_snr(r.segments, f0, 3);
  REQUIRE(sel.selected.size() == 3);
  CHECK(sel.selected[0] == 7);
  CHECK(sel.selected[1] == 23);
  CHECK(sel.selected[2] == 41);
  CHECK(sel.average.n_segments_used == 3);
  CHECK(sel.snr[7] > sel.snr[23]);
  CHECK(sel.snr[0] < sel.snr[41]);
  CHECK_THROWS_AS(select_segments_by_snr(r.segments, f0, 0), PreconditionError);
  CHECK_THROWS_AS(select_segments_by_snr(r.segments, f0, 61), PreconditionError);
  CHECK_THROWS_AS(segment_snr(r.segments[0], 0.0), DomainError);
  const std::vector<std::size_t> idx{7, 23};
  const auto avg = average_spectra(r.segments, idx);
  const std::size_t k = avg.bin_of(f0);
  CHECK(avg.psd[k] == doctest::Approx(0.5 * (r.segments[7].psd[k] + r.segments[23].psd[k])));
}

TEST_CASE("peak area refuses a band on the resonance") {
  const auto s = white(50000, 50.0, 1.0, 11);
  const auto r = welch_psd(s.t, s.x, {});
  const Resonance res{4.99, 39.0};
  CHECK_THROWS_AS(peak_area(r.average, 4.95, 2, res), RegimeWarning);
  CHECK_NOTHROW(peak_area(r.average, 4.95, 2, res, WarningPolicy::ignore));
  CHECK_NOTHROW(peak_area(r.average, 0.1, 2, res));
  CHECK_THROWS_AS(peak_area(r.average, 0.0, 2), DomainError);
  CHECK_THROWS_AS(peak_area(r.average, 0.1, -1), DomainError);
}

TEST_CASE("Lorentzian gradient matches finite differences") {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const LorentzianParams p{1.0 + 5 * u(rng), 5.0 + 100 * u(rng), 0.5 + u(rng), 0.1 * u(rng)};
    const double f = p.f_r * (0.8 + 0.4 * u(rng));
    const auto g = lorentzian_gradient(f, p);
    for (int k = 0; k < 4; ++k) {
      auto hi = p, lo = p;
      double* a = k == 0 ? &hi.f_r : k == 1 ? &hi.q_factor : k == 2 ? &hi.peak_amplitude : &hi.noise_offset;
      double* b = k == 0 ? &lo.f_r : k == 1 ? &lo.q_factor : k == 2 ? &lo.peak_amplitude : &lo.noise_offset;
      const double h = 1e-6 * std::max(std::abs(*a), 1e-3);
      *a += h;
      *b -= h;
      const double fd = (lorentzian_model(f, hi) - lorentzian_model(f, lo)) / (2 * h);
      CHECK(g[static_cast<std::size_t>(k)] == doctest::Approx(fd).epsilon(1e-5).scale(1e-6));
    }
  }
  const LorentzianParams p{5.0, 40.0, 2.0, 0.5};
  CHECK(lorentzian_model(5.0, p) == doctest::Approx(2.5));
}

TEST_CASE("noise-free Lorentzian fit is exact") {
  const LorentzianParams truth{4.99, 39.0, 3e-3, 1e-6};
  std::vector<double> f, y;
  for (double x = 4.0; x <= 6.0; x += 0.01) {
    f.push_back(x);
    y.push_back(lorentzian_model(x, truth));
  }
  const auto fit = fit_lorentzian(f, y);
  CHECK(fit.f_r() == doctest::Approx(4.99).epsilon(1e-9));
  CHECK(fit.q_factor() == doctest::Approx(39.0).epsilon(1e-8));
  CHECK(fit.params.peak_amplitude == doctest::Approx(3e-3).epsilon(1e-8));
  CHECK(fit.params.noise_offset == doctest::Approx(1e-6).epsilon(1e-5));
}

TEST_CASE("property: weighted fit covariance covers the truth") {
  std::mt19937_64 rng(53);
  std::normal_distribution<double> g(0.0, 1.0);
  const LorentzianParams truth{4.99, 39.0, 1.0, 0.02};
  int covered_f = 0, covered_q = 0;
  const int trials = 200;
  for (int i = 0; i < trials; ++i) {
    std::vector<double> f, y, w;
    for (double x = 4.5; x <= 5.5; x += 0.01) {
      const double m = lorentzian_model(x, truth);
      const double sd = 0.05 * m;
      f.push_back(x);
      y.push_back(m + sd * g(rng));
      w.push_back(1.0 / (sd * sd));
    }
    const auto fit = fit_lorentzian(f, y, w);
    covered_f += std::abs(fit.f_r() - truth.f_r) < fit.sigma(0);
    covered_q += std::abs(fit.q_factor() - truth.q_factor) < fit.sigma(1);
  }
  // One-sigma coverage of a Gaussian estimator: 68 %.
  CHECK(covered_f > 0.58 * trials);
  CHECK(covered_f < 0.78 * trials);
  CHECK(covered_q > 0.58 * trials);
  CHECK(covered_q < 0.78 * trials);
}

TEST_CASE("fit preconditions") {
  std::vector<double> f{1, 2, 3}, y{1, 2, 1};
  CHECK_THROWS_AS(fit_lorentzian(f, y), PreconditionError);
  std::vector<double> ff, yy;
  for (double x = 4.9; x <= 5.1; x += 0.01) {
    ff.push_back(x);
    yy.push_back(lorentzian_model(x, {4.99, 39.0, 1.0, 0.0}));
  }
  // Band narrower than the line: coverage check fails.
  CHECK_THROWS_AS(fit_lorentzian(ff, yy), PreconditionError);
  CHECK_THROWS_AS(fit_lorentzian(ff, std::vector<double>(ff.size(), 0.0)), NumericalError);
}

TEST_CASE("fit on a spectrum band and on a sweep") {
  SpectrumEstimate s;
  s.bin_width = 0.01;
  for (int k = 0; k <= 1000; ++k) {
    s.frequencies.push_back(k * 0.01);
    s.psd.push_back(lorentzian_model(k * 0.01, {4.99, 39.0, 1e-4, 1e-8}));
  }
  const auto fit = fit_lorentzian(s, 3.0, 7.0);
  CHECK(fit.f_r() == doctest::Approx(4.99).epsilon(1e-8));
  SweepResult sw;
  for (double f = 4.0; f <= 6.0; f += 0.01) {
    sw.frequencies.push_back(f);
    sw.amplitudes.push_back(std::sqrt(lorentzian_model(f, {5.1, 20.0, 4.0, 0.0})));
    sw.phases.push_back(0.0);
  }
  const auto fs = fit_lorentzian(sw);
  CHECK(fs.f_r() == doctest::Approx(5.1).epsilon(1e-8));
  CHECK(fs.q_factor() == doctest::Approx(20.0).epsilon(1e-6));
}

TEST_CASE("spectrum fit errors cover thermal runs") {
  const auto m = cylinder_inertia_and_moment(1e-3, 20e-3, MaterialProperties::ndfeb(), 0.0);
  const auto params = OscillatorParams::from_frequency(3e-10, m.moment, 39.0, 4.99);
  const int trials = 120;
  int in_f = 0, in_q = 0;
  double z2_f = 0.0, z2_q = 0.0, dq_sum = 0.0, sq_sum = 0.0;
  for (int t = 0; t < trials; ++t) {
    SimulationOptions o;
    o.temperature = 300.0;
    o.dt = 4e-3;
    o.duration = 800.0 - o.dt;
    o.seed = 7000 + static_cast<std::uint64_t>(t);
    o.start_in_equilibrium = true;
    const auto s = simulate(params, {}, o);
    WelchOptions wo;
    wo.segment_length = 50.0;
    const auto fit = fit_lorentzian(welch_psd(s.timestamps, s.angles, wo).average, 3.0, 7.0);
    const double zf = (fit.f_r() - 4.99) / fit.sigma(0);
    const double zq = (fit.q_factor() - 39.0) / fit.sigma(1);
    in_f += std::abs(zf) <= 1.0;
    in_q += std::abs(zq) <= 1.0;
    z2_f += zf * zf;
    z2_q += zq * zq;
    dq_sum += fit.q_factor() - 39.0;
    sq_sum += fit.sigma(1);
  }
  CHECK(in_f >= 0.55 * trials);
  CHECK(in_f <= 0.80 * trials);
  CHECK(in_q >= 0.55 * trials);
  CHECK(in_q <= 0.80 * trials);
  CHECK(std::sqrt(z2_f / trials) == doctest::Approx(1.0).epsilon(0.2));
  CHECK(std::sqrt(z2_q / trials) == doctest::Approx(1.0).epsilon(0.2));
  // no bias beyond 3 standard errors of the mean
  CHECK(std::abs(dq_sum / trials) < 3.0 * (sq_sum / trials) / std::sqrt(double(trials)));
}
