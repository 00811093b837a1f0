#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "fmto/core.hpp"

namespace fmto {

struct Tone {
  double amplitude;  // T
  double frequency;  // Hz
  double phase = 0.0;  // rad, drive is amplitude * cos(2 pi f t + phase)
};

/// Signal field B_sig(t) perpendicular to the moment and the z-axis.
class DriveSignal {
 public:
  enum class Kind { sinusoid, multi_tone, tabulated };

  /// No drive: an empty multi-tone.
  DriveSignal();

  static DriveSignal none() { return {}; }
  static DriveSignal sinusoid(double amplitude, double frequency, double phase = 0.0);
  static DriveSignal multi_tone(std::vector<Tone> tones);
  /// Piecewise-linear between samples, zero outside the table. Times must be
  /// strictly increasing.
  static DriveSignal tabulated(std::vector<double> times, std::vector<double> field);

  Kind kind() const noexcept { return kind_; }
  std::span<const Tone> tones() const noexcept { return tones_; }
  bool empty() const noexcept { return kind_ != Kind::tabulated && tones_.empty(); }

  /// B_sig at time t, tesla.
  double operator()(double t) const;
  DriveSignal scaled(double factor) const;

 private:
  Kind kind_ = Kind::multi_tone;
  std::vector<Tone> tones_;
  std::vector<double> table_t_;
  std::vector<double> table_b_;
};

struct AngleSeries {
  std::vector<double> timestamps;     // s
  std::vector<double> angles;         // rad
  std::vector<double> angular_rates;  // rad/s, empty if not recorded
  std::uint64_t seed = 0;
  double dt = 0.0;
  OscillatorParams params;

  std::size_t size() const noexcept { return angles.size(); }
  double duration() const noexcept {
    return timestamps.empty() ? 0.0 : timestamps.back() - timestamps.front();
  }
};

enum class Integrator {
  exact,          ///< exact discretization of the linear SDE
  euler_maruyama  ///< semi-implicit Euler-Maruyama, cross-check only
};

struct SimulationOptions {
  double temperature = 0.0;  // K
  double dt = 0.0;           // s
  double duration = 0.0;     // s
  std::uint64_t seed = 0;
  double initial_angle = 0.0;  // rad
  double initial_rate = 0.0;   // rad/s
  /// Draw the initial state from the thermal equilibrium distribution on top
  /// of the drive's steady state.
  bool start_in_equilibrium = false;
  Integrator integrator = Integrator::exact;
};

/// Complex mechanical susceptibility, rad per N m.
std::complex<double> susceptibility(double f, const OscillatorParams& params);

/// One-sided thermal torque PSD 8 pi k_B T I f_r / Q, N^2 m^2 / Hz.
double thermal_torque_psd(const OscillatorParams& params, double temperature);

/// Integrates I th'' + I (2 pi f_r / Q) th' + k th = mu B_sig(t) + tau_th(t).
AngleSeries simulate(const OscillatorParams& params, const DriveSignal& drive,
                     const SimulationOptions& options);

struct AnglePsd {
  double continuum;  // rad^2/Hz, one-sided
  struct Line {
    double frequency;     // Hz
    double mean_square;   // rad^2
  };
  std::vector<Line> lines;
};

/// Analytic one-sided angle PSD: |chi|^2 S_tau plus one discrete line per tone.
AnglePsd analytic_angle_psd(double f, const OscillatorParams& params, double temperature,
                            const DriveSignal& drive);

/// Continuum of analytic_angle_psd as seen by point sampling at sample_rate:
/// images folded back into [0, fs/2].
double sampled_angle_psd(double f, const OscillatorParams& params, double temperature,
                         double sample_rate, int images = 64);

/// Drops the first 10 Q / f_r seconds.
AngleSeries drop_transient(const AngleSeries& series);
AngleSeries drop_before(const AngleSeries& series, double t_min);

}  // namespace fmto
