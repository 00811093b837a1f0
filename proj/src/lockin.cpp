#include "fmto/lockin.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "fmto/error.hpp"

namespace fmto {

LockInResult lock_in(std::span<const double> t, std::span<const double> x, double f_ref) {
  if (t.size() != x.size()) throw DomainError("lock-in needs equal-length time and value arrays");
  if (!(f_ref > 0.0)) throw DomainError("reference frequency must be positive");
  if (t.size() < 4) throw PreconditionError("lock-in needs at least 4 samples");
  const double t0 = t.front();
  const double span = t.back() - t0;
  const double mean_rate = static_cast<double>(t.size() - 1) / span;
  if (!(f_ref < 0.5 * mean_rate))
    throw PreconditionError("reference frequency above the Nyquist frequency of the track");
  const double periods = std::floor(span * f_ref * (1.0 + 1e-12));
  if (periods < 10.0) throw PreconditionError("track shorter than 10 reference periods");
  const double t_end = t0 + periods / f_ref;

  std::size_t n = 0;
  while (n < t.size() && t[n] <= t_end + 1e-9 / f_ref) ++n;

  const double omega = two_pi * f_ref;
  Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
  Eigen::Vector3d proj = Eigen::Vector3d::Zero();
  for (std::size_t k = 0; k < n; ++k) {
    const double prev = k == 0 ? t[0] : t[k - 1];
    const double next = k + 1 == n ? t[n - 1] : t[k + 1];
    const double w = 0.5 * (next - prev);
    const double ph = omega * t[k];
    const Eigen::Vector3d basis(1.0, std::cos(ph), std::sin(ph));
    gram.noalias() += w * basis * basis.transpose();
    proj.noalias() += w * x[k] * basis;
  }
  const Eigen::Vector3d coef = gram.ldlt().solve(proj);

  LockInResult r;
  r.frequency = f_ref;
  r.in_phase = coef(1);
  r.quadrature = -coef(2);
  r.amplitude = std::hypot(r.in_phase, r.quadrature);
  r.phase = std::atan2(r.quadrature, r.in_phase);
  if (r.phase <= -pi) r.phase = pi;
  r.integration_time = periods / f_ref;
  return r;
}

LockInResult lock_in(const SpotTrack& track, double f_ref, bool use_actual_timestamps) {
  const auto& t = use_actual_timestamps ? track.timestamps : track.nominal_timestamps;
  return lock_in(t, track.positions, f_ref);
}

std::vector<double> linear_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) throw DomainError("invalid grid");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = start + static_cast<double>(i) * step;
  return g;
}

SweepResult frequency_sweep(const OscillatorParams& params, double drive_amplitude,
                            std::span<const double> f_grid, const SweepSettings& s,
                            Exec exec) {
  for (std::size_t i = 1; i < f_grid.size(); ++i)
    if (!(f_grid[i] > f_grid[i - 1]))
      throw DomainError("sweep frequencies must be strictly increasing");
  const double dt = s.dt > 0.0 ? s.dt : 1.0 / (50.0 * params.f_res());
  for (double f : f_grid)
    if (!(f > 0.0) || f >= 0.25 / dt)
      throw PreconditionError("sweep frequency outside the simulator band (0, 1/(4 dt))");
  const double settle = s.settle_time >= 0.0 ? s.settle_time
                                             : 10.0 * params.q_factor() / params.f_res();

  SweepResult out;
  out.frequencies.assign(f_grid.begin(), f_grid.end());
  out.amplitudes.resize(f_grid.size());
  out.phases.resize(f_grid.size());

  parallel_for_dynamic(static_cast<std::ptrdiff_t>(f_grid.size()), exec, [&](std::ptrdiff_t k) {
    const auto i = static_cast<std::size_t>(k);
    const double f = f_grid[i];
    SimulationOptions so;
    so.temperature = s.temperature;
    so.dt = dt;
    so.duration = settle + std::max(s.min_duration, s.min_periods / f) + 2.0 / f;
    so.seed = mix_seed(s.seed, 2 * i);
    const auto series =
        drop_before(simulate(params, DriveSignal::sinusoid(drive_amplitude, f), so), settle);
    LockInResult r;
    if (s.render_and_track) {
      RenderOptions ro = s.render;
      ro.seed = mix_seed(s.seed, 2 * i + 1);
      const auto track = render_and_track(series, s.geometry, ro, s.tracker, 4096, Exec::serial);
      r = lock_in(track, f, true);
    } else {
      std::vector<double> px(series.size());
      const double gain = s.geometry.lever_gain();
      for (std::size_t j = 0; j < px.size(); ++j) px[j] = gain * series.angles[j];
      r = lock_in(series.timestamps, px, f);
    }
    out.amplitudes[i] = r.amplitude;
    out.phases[i] = r.phase;
  });
  return out;
}

}  // namespace fmto
