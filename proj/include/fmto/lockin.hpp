#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fmto/dynamics.hpp"
#include "fmto/optics.hpp"
#include "fmto/parallel.hpp"

namespace fmto {

/// Signal model x(t) = amplitude cos(2 pi f t + phase) with
/// in_phase = amplitude cos(phase), quadrature = amplitude sin(phase).
struct LockInResult {
  double frequency = 0.0;
  double in_phase = 0.0;
  double quadrature = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;             // (-pi, pi]
  double integration_time = 0.0;  // s, integer number of reference periods
};

/// Demodulates samples against cos/sin(2 pi f_ref t) over the longest
/// integer number of reference periods starting at t[0]. Samples are
/// weighted by their trapezoidal time share and the projection is solved
/// against the sampled reference (DC, cos, sin), so arbitrary timestamps are
/// handled without leakage.
LockInResult lock_in(std::span<const double> t, std::span<const double> x, double f_ref);

LockInResult lock_in(const SpotTrack& track, double f_ref, bool use_actual_timestamps = true);

struct SweepResult {
  std::vector<double> frequencies;  // Hz, strictly increasing
  std::vector<double> amplitudes;   // px
  std::vector<double> phases;       // rad, relative to a cos(2 pi f t) drive
};

struct SweepSettings {
  double temperature = 0.0;   // K
  double dt = 0.0;            // s; 0 selects 1/(50 f_r)
  double min_duration = 20.0; // s of lock-in integration per point
  double min_periods = 20.0;  // reference periods per point
  double settle_time = -1.0;  // s discarded per point; < 0 selects 10 Q / f_r
  std::uint64_t seed = 0;
  ReadoutGeometry geometry;
  bool render_and_track = false;
  RenderOptions render;
  TrackerSettings tracker;
};

/// Drives the oscillator with drive_amplitude cos(2 pi f t) at each grid
/// frequency, discards the transient and lock-in detects the response.
SweepResult frequency_sweep(const OscillatorParams& params, double drive_amplitude,
                            std::span<const double> f_grid, const SweepSettings& settings,
                            Exec exec = Exec::parallel);

/// Uniform grid [start, stop] with the given step (inclusive when stop lands
/// on the grid).
std::vector<double> linear_grid(double start, double stop, double step);

}  // namespace fmto
