#include "fmto/optics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fmto/error.hpp"

namespace fmto {

void ReadoutGeometry::validate() const {
  if (!(path_length > 0.0) || !(pixel_size > 0.0))
    throw DomainError("path length and pixel size must be positive");
  if (!(frame_rate > 0.0)) throw DomainError("frame rate must be positive");
  if (bit_depth != 8 && bit_depth != 10 && bit_depth != 12 && bit_depth != 16)
    throw DomainError("bit depth must be 8, 10, 12 or 16");
  if (!(spot_sigma > 0.0)) throw DomainError("spot sigma must be positive");
  if (!(spot_peak > 0.0) || !(background >= 0.0) || spot_peak + background > 1.0)
    throw DomainError("need spot_peak > 0, background >= 0, spot_peak + background <= 1");
  if (!(full_well > 0.0)) throw DomainError("full well must be positive");
  if (width < 8 || height < 1) throw DomainError("frame must be at least 8 x 1 px");
}

double angle_to_displacement(double angle, const ReadoutGeometry& geometry) {
  if (!(std::abs(angle) < 1e-2))
    throw DomainError("angle outside the small-angle range |angle| < 1e-2 rad");
  return geometry.lever_gain() * angle;
}

std::size_t frame_count(const AngleSeries& angles, const ReadoutGeometry& geometry) {
  if (angles.size() < 2) return 0;
  return static_cast<std::size_t>(std::floor(angles.duration() * geometry.frame_rate));
}

double interpolate_angle(const AngleSeries& s, double t) {
  const auto n = s.size();
  const double t0 = s.timestamps.front();
  const double h = s.dt > 0.0 ? s.dt : (s.timestamps.back() - t0) / static_cast<double>(n - 1);
  auto i = static_cast<std::size_t>(std::clamp(std::floor((t - t0) / h), 0.0,
                                               static_cast<double>(n - 2)));
  // Tolerate slightly non-uniform timestamps.
  while (i + 2 < n && s.timestamps[i + 1] <= t) ++i;
  while (i > 0 && s.timestamps[i] > t) --i;
  const double ta = s.timestamps[i];
  const double hb = s.timestamps[i + 1] - ta;
  const double u = (t - ta) / hb;
  const double ya = s.angles[i];
  const double yb = s.angles[i + 1];
  if (s.angular_rates.empty()) return ya + u * (yb - ya);
  const double u2 = u * u;
  const double u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * ya + (u3 - 2 * u2 + u) * hb * s.angular_rates[i] +
         (-2 * u3 + 3 * u2) * yb + (u3 - u2) * hb * s.angular_rates[i + 1];
}

namespace {

void check_render(const AngleSeries& angles, const ReadoutGeometry& g, const RenderOptions& o) {
  g.validate();
  if (angles.size() < 2) throw PreconditionError("angle series too short to render");
  const double series_rate =
      static_cast<double>(angles.size() - 1) / angles.duration();
  if (series_rate < 2.0 * g.frame_rate * (1.0 - 1e-9))
    throw PreconditionError("angle series must be sampled at >= 2x the frame rate");
  if (!(o.jitter_sigma >= 0.0)) throw DomainError("jitter sigma must be >= 0");
  if (3.0 * o.jitter_sigma > 0.5 / g.frame_rate)
    throw PreconditionError("frame jitter too large to preserve frame ordering");
}

double draw_delay(std::mt19937_64& rng, const RenderOptions& o, double limit) {
  if (o.jitter_sigma == 0.0) return 0.0;
  double d;
  if (o.jitter_kind == JitterKind::gaussian) {
    d = o.jitter_sigma * std::normal_distribution<double>(0.0, 1.0)(rng);
  } else {
    const double half = std::sqrt(3.0) * o.jitter_sigma;
    d = std::uniform_real_distribution<double>(-half, half)(rng);
  }
  return std::clamp(d, -limit, limit);
}

// Integral of exp(-(x - c)^2 / 2 s^2) over the pixel [i - 0.5, i + 0.5].
void pixel_profile(std::vector<double>& out, int n, double center, double sigma) {
  out.resize(static_cast<std::size_t>(n));
  const double k = 1.0 / (std::sqrt(2.0) * sigma);
  const double norm = sigma * std::sqrt(pi / 2.0);
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] =
        norm * (std::erf((i + 0.5 - center) * k) - std::erf((i - 0.5 - center) * k));
}

void render_frame(const AngleSeries& angles, const ReadoutGeometry& g, const RenderOptions& o,
                  std::size_t global, std::uint16_t* px, double& nominal, double& actual) {
  std::mt19937_64 rng(mix_seed(o.seed, global));
  const double interval = 1.0 / g.frame_rate;
  nominal = angles.timestamps.front() + (static_cast<double>(global) + 0.5) * interval;
  actual = nominal + draw_delay(rng, o, 0.45 * interval);

  const double cx = g.rest_x() + angle_to_displacement(interpolate_angle(angles, actual), g);
  const double cy = g.rest_y();
  thread_local std::vector<double> ix;
  thread_local std::vector<double> iy;
  pixel_profile(ix, g.width, cx, g.spot_sigma);
  pixel_profile(iy, g.height, cy, g.spot_sigma);

  const double max_count = g.max_count();
  const double gain = max_count / g.full_well;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      const double frac = g.background +
                          g.spot_peak * ix[static_cast<std::size_t>(c)] *
                              iy[static_cast<std::size_t>(r)];
      double electrons = frac * g.full_well;
      if (o.photon_noise) electrons += std::sqrt(electrons) * normal(rng);
      const double counts = std::clamp(std::nearbyint(electrons * gain), 0.0, max_count);
      *px++ = static_cast<std::uint16_t>(counts);
    }
  }
}

}  // namespace

FrameSequence render_frames(const AngleSeries& angles, const ReadoutGeometry& geometry,
                            const RenderOptions& options, std::size_t first,
                            std::size_t count, Exec exec) {
  check_render(angles, geometry, options);
  const std::size_t total = frame_count(angles, geometry);
  if (first > total) throw PreconditionError("first frame beyond end of series");
  if (count == 0 || first + count > total) count = total - first;

  FrameSequence seq;
  seq.width = geometry.width;
  seq.height = geometry.height;
  seq.first_index = first;
  seq.geometry = geometry;
  const auto npx = static_cast<std::size_t>(geometry.width) *
                   static_cast<std::size_t>(geometry.height);
  seq.pixels.resize(count * npx);
  seq.nominal_timestamps.resize(count);
  seq.actual_timestamps.resize(count);

  parallel_for(static_cast<std::ptrdiff_t>(count), exec, [&](std::ptrdiff_t k) {
    const auto i = static_cast<std::size_t>(k);
    render_frame(angles, geometry, options, first + i, seq.pixels.data() + i * npx,
                 seq.nominal_timestamps[i], seq.actual_timestamps[i]);
  });
  return seq;
}

CentroidTracker::CentroidTracker(int width, int height, TrackerSettings settings)
    : width_(width), height_(height), settings_(settings) {
  if (settings_.roi_halfwidth < 1) throw DomainError("ROI half-width must be >= 1");
  if (!(settings_.threshold_sigma >= 0.0)) throw DomainError("threshold must be >= 0");
}

namespace {

double median_inplace(std::vector<double>& v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

CentroidTracker::Measurement CentroidTracker::process(std::span<const std::uint16_t> frame,
                                                      std::size_t index) {
  const int w = width_;
  const int h = height_;
  if (frame.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h))
    throw DomainError("frame size does not match tracker");

  if (!initialized_) {
    const auto it = std::max_element(frame.begin(), frame.end());
    const auto at = static_cast<int>(it - frame.begin());
    cx_ = at % w;
    cy_ = at / w;
  }

  const int hw = settings_.roi_halfwidth;
  const int x0 = std::max(0, static_cast<int>(std::lround(cx_)) - hw);
  const int x1 = std::min(w - 1, static_cast<int>(std::lround(cx_)) + hw);
  const int y0 = std::max(0, static_cast<int>(std::lround(cy_)) - hw);
  const int y1 = std::min(h - 1, static_cast<int>(std::lround(cy_)) + hw);

  scratch_.clear();
  for (int r = 0; r < h; ++r) {
    const bool row_in = r >= y0 && r <= y1;
    for (int c = 0; c < w; ++c) {
      if (row_in && c >= x0 && c <= x1) continue;
      scratch_.push_back(frame[static_cast<std::size_t>(r * w + c)]);
    }
  }
  if (scratch_.size() < 16)
    throw TrackingError("too few pixels outside the ROI to estimate the background", index);
  const double bg = median_inplace(scratch_);
  for (auto& v : scratch_) v = std::abs(v - bg);
  const double sigma = std::max(1.4826 * median_inplace(scratch_), settings_.min_noise_sigma);
  const double thr = settings_.threshold_sigma * sigma;

  double s = 0.0, sx = 0.0, sy = 0.0, peak = 0.0;
  for (int r = y0; r <= y1; ++r) {
    for (int c = x0; c <= x1; ++c) {
      const double d = frame[static_cast<std::size_t>(r * w + c)] - bg;
      if (d <= thr) continue;
      s += d;
      sx += d * c;
      sy += d * r;
      peak = std::max(peak, d);
    }
  }
  const double quality = peak / sigma;

  if (!initialized_) {
    if (quality < settings_.quality_floor || s <= 0.0)
      throw TrackingError("spot not visible in the first frame", index);
    initialized_ = true;
  }
  if (quality < settings_.quality_floor || s <= 0.0) {
    if (++lost_ > settings_.max_lost_frames) throw TrackingError("spot lost", index);
    return {cx_, cy_, quality};
  }
  lost_ = 0;
  cx_ = sx / s;
  cy_ = sy / s;
  return {cx_, cy_, quality};
}

namespace {

void append(SpotTrack& track, CentroidTracker& tracker, const FrameSequence& frames) {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto m = tracker.process(frames.frame(i), frames.first_index + i);
    track.positions.push_back(m.x);
    track.positions_y.push_back(m.y);
    track.quality.push_back(m.quality);
    track.timestamps.push_back(frames.actual_timestamps[i]);
    track.nominal_timestamps.push_back(frames.nominal_timestamps[i]);
  }
}

}  // namespace

SpotTrack track_centroid(const FrameSequence& frames, const TrackerSettings& settings) {
  CentroidTracker tracker(frames.width, frames.height, settings);
  SpotTrack track;
  append(track, tracker, frames);
  return track;
}

SpotTrack render_and_track(const AngleSeries& angles, const ReadoutGeometry& geometry,
                           const RenderOptions& options, const TrackerSettings& settings,
                           std::size_t chunk_frames, Exec exec) {
  const std::size_t total = frame_count(angles, geometry);
  if (chunk_frames == 0) chunk_frames = total;
  CentroidTracker tracker(geometry.width, geometry.height, settings);
  SpotTrack track;
  track.positions.reserve(total);
  for (std::size_t first = 0; first < total; first += chunk_frames) {
    const auto frames = render_frames(angles, geometry, options, first,
                                      std::min(chunk_frames, total - first), exec);
    append(track, tracker, frames);
  }
  return track;
}

double expected_centroid_noise_psd(const ReadoutGeometry& g, const TrackerSettings& settings) {
  g.validate();
  const double gain = g.max_count() / g.full_well;
  const double bg_e = g.background * g.full_well;
  const double bg_sigma = std::max(std::sqrt(bg_e * gain * gain + 1.0 / 12.0),
                                   settings.min_noise_sigma);
  const double thr = settings.threshold_sigma * bg_sigma;
  std::vector<double> ix, iy;
  const double cx = g.rest_x();
  const double cy = g.rest_y();
  pixel_profile(ix, g.width, cx, g.spot_sigma);
  pixel_profile(iy, g.height, cy, g.spot_sigma);
  const int hw = settings.roi_halfwidth;
  double s = 0.0, var = 0.0;
  for (int r = std::max(0, static_cast<int>(cy) - hw);
       r <= std::min(g.height - 1, static_cast<int>(cy) + hw); ++r) {
    for (int c = std::max(0, static_cast<int>(cx) - hw);
         c <= std::min(g.width - 1, static_cast<int>(cx) + hw); ++c) {
      const double sig_e =
          g.spot_peak * g.full_well * ix[static_cast<std::size_t>(c)] * iy[static_cast<std::size_t>(r)];
      const double d = sig_e * gain;
      if (d <= thr) continue;
      s += d;
      var += (c - cx) * (c - cx) * ((sig_e + bg_e) * gain * gain + 1.0 / 12.0);
    }
  }
  const double sigma_c2 = var / (s * s);
  return 2.0 * sigma_c2 / g.frame_rate;
}

SpotTrack ideal_track(const AngleSeries& angles, const ReadoutGeometry& geometry) {
  SpotTrack t;
  t.positions.reserve(angles.size());
  for (double a : angles.angles) t.positions.push_back(angle_to_displacement(a, geometry));
  t.positions_y.assign(angles.size(), 0.0);
  t.timestamps = angles.timestamps;
  t.nominal_timestamps = angles.timestamps;
  t.quality.assign(angles.size(), 0.0);
  return t;
}

}  // namespace fmto
