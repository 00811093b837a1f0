#include "fmto/reference.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fmto/error.hpp"

namespace fmto::reference {

WelchResult welch_psd(std::span<const double> t, std::span<const double> x,
                      const WelchOptions& o) {
  if (t.size() != x.size() || x.size() < 4) throw PreconditionError("bad input series");
  const double fs = static_cast<double>(t.size() - 1) / (t.back() - t.front());
  const auto n = static_cast<std::size_t>(std::llround(o.segment_length * fs));
  if (2 * n > x.size() + 1) throw PreconditionError("series shorter than two segments");
  const auto step = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(n) * (1.0 - o.overlap))));
  const std::size_t nbins = n / 2 + 1;

  std::vector<double> w(n, 1.0);
  double u = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (o.window == Window::hann)
      w[i] = 0.5 - 0.5 * std::cos(two_pi * static_cast<double>(i) / static_cast<double>(n));
    u += w[i] * w[i];
  }

  WelchResult r;
  for (std::size_t first = 0; first + n <= x.size(); first += step) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x[first + i];
    mean /= static_cast<double>(n);
    SpectrumEstimate s;
    s.bin_width = fs / static_cast<double>(n);
    s.window = o.window;
    s.window_power = u / static_cast<double>(n);
    s.n_segments_used = 1;
    for (std::size_t k = 0; k < nbins; ++k) {
      double re = 0.0, im = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double ph = two_pi * static_cast<double>((k * i) % n) / static_cast<double>(n);
        const double v = (x[first + i] - mean) * w[i];
        re += v * std::cos(ph);
        im -= v * std::sin(ph);
      }
      const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
      s.frequencies.push_back(static_cast<double>(k) * s.bin_width);
      s.psd.push_back((edge ? 1.0 : 2.0) * (re * re + im * im) / (fs * u));
    }
    r.segments.push_back(std::move(s));
  }
  r.average = average_spectra(r.segments);
  return r;
}

FrameSequence render_frames(const AngleSeries& angles, const ReadoutGeometry& g,
                            const RenderOptions& o, std::size_t first, std::size_t count) {
  g.validate();
  const std::size_t total = frame_count(angles, g);
  if (count == 0 || first + count > total) count = total - first;
  FrameSequence seq;
  seq.width = g.width;
  seq.height = g.height;
  seq.first_index = first;
  seq.geometry = g;

  const double interval = 1.0 / g.frame_rate;
  const double k = 1.0 / (std::sqrt(2.0) * g.spot_sigma);
  const double norm = g.spot_sigma * std::sqrt(pi / 2.0);
  const double max_count = g.max_count();
  const double gain = max_count / g.full_well;

  for (std::size_t f = first; f < first + count; ++f) {
    std::mt19937_64 rng(mix_seed(o.seed, f));
    const double nominal = angles.timestamps.front() + (static_cast<double>(f) + 0.5) * interval;
    double delay = 0.0;
    if (o.jitter_sigma > 0.0) {
      if (o.jitter_kind == JitterKind::gaussian) {
        delay = o.jitter_sigma * std::normal_distribution<double>(0.0, 1.0)(rng);
      } else {
        const double half = std::sqrt(3.0) * o.jitter_sigma;
        delay = std::uniform_real_distribution<double>(-half, half)(rng);
      }
      delay = std::clamp(delay, -0.45 * interval, 0.45 * interval);
    }
    const double actual = nominal + delay;
    seq.nominal_timestamps.push_back(nominal);
    seq.actual_timestamps.push_back(actual);

    const double cx = g.rest_x() + angle_to_displacement(interpolate_angle(angles, actual), g);
    const double cy = g.rest_y();
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int r = 0; r < g.height; ++r) {
      for (int c = 0; c < g.width; ++c) {
        const double px = norm * (std::erf((c + 0.5 - cx) * k) - std::erf((c - 0.5 - cx) * k));
        const double py = norm * (std::erf((r + 0.5 - cy) * k) - std::erf((r - 0.5 - cy) * k));
        double e = (g.background + g.spot_peak * px * py) * g.full_well;
        if (o.photon_noise) e += std::sqrt(e) * normal(rng);
        seq.pixels.push_back(
            static_cast<std::uint16_t>(std::clamp(std::nearbyint(e * gain), 0.0, max_count)));
      }
    }
  }
  return seq;
}

std::vector<CouplingBound> coupling_bound_curve(const ExoticSourceConfig& config,
                                                const std::vector<double>& lambdas,
                                                double eta, double t_mea) {
  std::vector<CouplingBound> out;
  for (double l : lambdas) out.push_back(coupling_bound(config, l, eta, t_mea));
  return out;
}

}  // namespace fmto::reference
