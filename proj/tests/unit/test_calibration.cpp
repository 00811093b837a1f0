#include <doctest.h>

#include <cmath>
#include <random>

#include "fmto/calibration.hpp"
#include "fmto/dynamics.hpp"
#include "fmto/error.hpp"
#include "oracles.hpp"

using namespace fmto;

namespace {

const auto experiment = [] { return OscillatorParams::from_frequency(3e-10, 8.74e-3, 39.0, 4.99); };

}  // namespace

TEST_CASE("transfer from a calibration line") {
  const auto c = transfer_from_calibration(0.5, 2.0, 0.1, 0.15);
  CHECK(c.value == doctest::Approx(0.5));
  CHECK(c.uncertainty == doctest::Approx(std::hypot(0.05, 0.15)));
  CHECK_THROWS_AS(transfer_from_calibration(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(transfer_from_calibration(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(transfer_from_calibration(1.0, 1.0, -0.1), DomainError);
}

TEST_CASE("property: a line of amplitude C B inverts to C") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double c = std::pow(10.0, 6 + 6 * u(rng));
    const double b = std::pow(10.0, -15 + 6 * u(rng));
    const double amp = c * b;
    CHECK(transfer_from_calibration(0.5 * amp * amp, b).value == doctest::Approx(c).epsilon(1e-12));
  }
}

TEST_CASE("property: extended transfer follows the response shape") {
  const auto p = experiment();
  ReadoutGeometry g;
  const auto tf = theoretical_transfer_function(p, g, 0.1);
  std::mt19937_64 rng(62);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  for (int i = 0; i < 500; ++i) {
    const double f = u(rng);
    CHECK(tf(f) == doctest::Approx(theoretical_transfer(p, g, f)).epsilon(1e-12));
    // Independent: mu * lever / |I (w0^2 - w^2 + i w w0/Q)|
    const double w = 2 * oracle::pi * f, w0 = 2 * oracle::pi * 4.99;
    const double mag = 1.0 / (3e-10 * std::hypot(w0 * w0 - w * w, w * w0 / 39.0));
    CHECK(tf(f) == doctest::Approx(8.74e-3 * g.lever_gain() * mag).epsilon(1e-12));
  }
  CHECK(tf(0.1) == tf.c_at_cal);
  CHECK(theoretical_transfer(p, g, 0.1) == doctest::Approx(8.648e9).epsilon(1e-3));
  CHECK_THROWS_AS(extend_transfer(tf, -1.0), DomainError);
}

TEST_CASE("calibration tone through the oscillator recovers the theoretical transfer") {
  const auto p = experiment();
  ReadoutGeometry g;
  const double b = 1e-10, f_cal = 0.1;
  SimulationOptions o;
  o.dt = 4e-3;
  o.duration = 2000.0;
  o.start_in_equilibrium = true;
  const auto s = simulate(p, DriveSignal::sinusoid(b, f_cal), o);
  const auto track = ideal_track(s, g);
  const auto w = welch_psd(track.timestamps, track.positions, {});
  const auto area = peak_area(w.average, f_cal, 2, Resonance{4.99, 39.0});
  const auto c = transfer_from_calibration(area.area, b);
  CHECK(c.value == doctest::Approx(theoretical_transfer(p, g, f_cal)).epsilon(2e-3));
}

TEST_CASE("sensitivity from a flat noise spectrum") {
  const auto p = experiment();
  ReadoutGeometry g;
  const auto tf = theoretical_transfer_function(p, g, 0.1);
  SpectrumEstimate s;
  for (int k = 0; k <= 100; ++k) {
    s.frequencies.push_back(0.1 * k);
    s.psd.push_back(k == 50 ? 0.0 : 4e-6);
  }
  const auto eta = sensitivity_from_noise(s, tf);
  CHECK(eta.size() == 99);  // DC and the empty bin dropped
  for (std::size_t i = 0; i < eta.size(); ++i)
    CHECK(eta.eta[i] == doctest::Approx(2e-3 / tf(eta.frequencies[i])).epsilon(1e-12));
  CHECK(eta.provenance == Provenance::measured);
  CHECK(to_string(Provenance::thermal_limit) == "thermal-limit");
  CHECK(to_string(Provenance::measurement_floor) == "measurement-floor");
}

TEST_CASE("thermal limit of the room-temperature oscillator") {
  const auto p = experiment();
  const double eta = thermal_limit_sensitivity(p, 300.0);
  const double s_tau = 8 * oracle::pi * 1.380649e-23 * 300.0 * 3e-10 * 4.99 / 39.0;
  CHECK(eta == doctest::Approx(std::sqrt(s_tau) / 8.74e-3).epsilon(1e-12));
  CHECK(eta < 391e-15);
  CHECK(eta == doctest::Approx(2.287e-13).epsilon(1e-3));
}

TEST_CASE("prefactors") {
  CHECK(sensitivity_prefactor_radius() == doctest::Approx(0.7759).epsilon(1e-3));
  CHECK(std::pow(sensitivity_prefactor_frequency(), 4) ==
        doctest::Approx(1152.0 * oracle::pi * oracle::pi / 125.0).epsilon(1e-13));
}

TEST_CASE("property: sphere closed forms agree with the general oscillator limit") {
  std::mt19937_64 rng(63);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto mat = MaterialProperties::ndfeb();
  for (int i = 0; i < 300; ++i) {
    const double r = std::pow(10.0, -4 + 3 * u(rng));
    const double b = std::pow(10.0, -12 + 9 * u(rng));
    const double temp = std::pow(10.0, -3 + 5 * u(rng));
    const double q = std::pow(10.0, 1 + 8 * u(rng));
    // From scratch: uniform sphere, I = 8 pi rho R^5 / 15, mu = 4 pi M R^3 / 3.
    const double inertia = 8 * oracle::pi * 7430.0 * std::pow(r, 5) / 15.0;
    const double mu = 4 * oracle::pi * mat.magnetization() * r * r * r / 3.0;
    const double fr = std::sqrt(mu * b / inertia) / (2 * oracle::pi);
    const double s_tau = 8 * oracle::pi * 1.380649e-23 * temp * inertia * fr / q;
    const double direct = std::sqrt(s_tau) / mu;
    CHECK(thermal_limit_sensitivity(mat, r, b, temp, q) == doctest::Approx(direct).epsilon(1e-10));
    CHECK(thermal_limit_sensitivity_fr(mat, b, fr, temp, q) == doctest::Approx(direct).epsilon(1e-10));
    const auto osc = OscillatorParams::from_bias(inertia, mu, q, b);
    CHECK(thermal_limit_sensitivity(osc, temp) == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("property: thermal limit scalings") {
  const auto mat = MaterialProperties::ndfeb();
  std::mt19937_64 rng(64);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int i = 0; i < 100; ++i) {
    const double r = 1e-3 * u(rng), b = 1e-6 * u(rng), t = u(rng), q = 1e5 * u(rng);
    const double e = thermal_limit_sensitivity(mat, r, b, t, q);
    CHECK(thermal_limit_sensitivity(mat, 2 * r, b, t, q) == doctest::Approx(e / 2).epsilon(1e-12));
    CHECK(thermal_limit_sensitivity(mat, r, 16 * b, t, q) == doctest::Approx(2 * e).epsilon(1e-12));
    CHECK(thermal_limit_sensitivity(mat, r, b, 4 * t, q) == doctest::Approx(2 * e).epsilon(1e-12));
    CHECK(thermal_limit_sensitivity(mat, r, b, t, 4 * q) == doctest::Approx(e / 2).epsilon(1e-12));
    const double ef = thermal_limit_sensitivity_fr(mat, b, 1.0, t, q);
    CHECK(thermal_limit_sensitivity_fr(mat, b, 3.0, t, q) == doctest::Approx(3 * ef).epsilon(1e-12));
    CHECK(thermal_limit_sensitivity_fr(mat, 16 * b, 1.0, t, q) == doctest::Approx(ef / 2).epsilon(1e-12));
  }
  CHECK_THROWS_AS(thermal_limit_sensitivity(MaterialProperties::bgo(), 1e-3, 1e-6, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(thermal_limit_sensitivity(mat, 0.0, 1e-6, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(thermal_limit_sensitivity_fr(mat, 1e-6, 0.0, 1.0, 1.0), DomainError);
}
