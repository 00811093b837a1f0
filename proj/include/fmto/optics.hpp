#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fmto/dynamics.hpp"
#include "fmto/parallel.hpp"

namespace fmto {

/// Laser-lever readout and camera model. Pixel coordinates have pixel
/// centers at integers; x is the torsion-sensitive axis.
struct ReadoutGeometry {
  double path_length = 0.7;    // mirror-to-camera, m
  double pixel_size = 4.8e-6;  // m
  double frame_rate = 50.0;    // Hz
  int bit_depth = 8;
  double spot_sigma = 3.0;     // px, isotropic Gaussian
  double spot_peak = 0.8;      // fraction of full scale
  double background = 0.05;    // fraction of full scale
  double full_well = 3.0e4;    // photoelectrons at full scale
  int width = 48;              // px
  int height = 24;             // px
  double spot_x0 = -1.0;       // rest position, px; negative = frame center
  double spot_y0 = -1.0;

  /// 2 L / l_c, pixels per radian.
  double lever_gain() const noexcept { return 2.0 * path_length / pixel_size; }
  int max_count() const noexcept { return (1 << bit_depth) - 1; }
  double rest_x() const noexcept { return spot_x0 < 0.0 ? 0.5 * (width - 1) : spot_x0; }
  double rest_y() const noexcept { return spot_y0 < 0.0 ? 0.5 * (height - 1) : spot_y0; }
  /// Throws DomainError on inconsistent settings.
  void validate() const;
};

/// Small-angle lever: 2 L angle / l_c. |angle| must stay below 1e-2 rad.
double angle_to_displacement(double angle, const ReadoutGeometry& geometry);

enum class JitterKind { gaussian, uniform };

struct RenderOptions {
  double jitter_sigma = 0.0;  // s, standard deviation of the per-frame delay
  JitterKind jitter_kind = JitterKind::gaussian;
  bool photon_noise = true;
  std::uint64_t seed = 0;
};

struct FrameSequence {
  int width = 0;
  int height = 0;
  std::size_t first_index = 0;  // global index of frames[0]
  std::vector<std::uint16_t> pixels;  // frame-major, row-major within a frame
  std::vector<double> nominal_timestamps;
  std::vector<double> actual_timestamps;
  ReadoutGeometry geometry;

  std::size_t size() const noexcept { return nominal_timestamps.size(); }
  std::span<const std::uint16_t> frame(std::size_t i) const {
    const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    return {pixels.data() + i * n, n};
  }
};

struct SpotTrack {
  std::vector<double> positions;    // px along x
  std::vector<double> positions_y;  // px, diagnostic only
  std::vector<double> timestamps;   // actual frame times, s
  std::vector<double> nominal_timestamps;
  std::vector<double> quality;      // peak / background sigma

  std::size_t size() const noexcept { return positions.size(); }
};

/// Number of frames render_frames produces for a series.
std::size_t frame_count(const AngleSeries& angles, const ReadoutGeometry& geometry);

/// Angle at an arbitrary time: cubic Hermite when rates are recorded,
/// linear otherwise.
double interpolate_angle(const AngleSeries& series, double t);

/// Renders frames [first, first + count) of the sequence; count = 0 means
/// to the end. Every frame draws from its own seed-derived stream, so chunked
/// and whole-sequence rendering agree bit for bit.
FrameSequence render_frames(const AngleSeries& angles, const ReadoutGeometry& geometry,
                            const RenderOptions& options, std::size_t first = 0,
                            std::size_t count = 0, Exec exec = Exec::parallel);

struct TrackerSettings {
  double threshold_sigma = 3.0;
  int roi_halfwidth = 12;           // px
  double quality_floor = 5.0;
  int max_lost_frames = 5;
  double min_noise_sigma = 0.5;     // counts; floor on the MAD noise estimate
};

/// Median-background, MAD-threshold, ROI-hysteresis centroid tracker.
class CentroidTracker {
 public:
  struct Measurement {
    double x;
    double y;
    double quality;
  };

  CentroidTracker(int width, int height, TrackerSettings settings = {});

  /// Frames must be fed in order; index is used only for error reporting.
  Measurement process(std::span<const std::uint16_t> frame, std::size_t index);
  void reset() noexcept { initialized_ = false; }

 private:
  int width_;
  int height_;
  TrackerSettings settings_;
  bool initialized_ = false;
  double cx_ = 0.0;
  double cy_ = 0.0;
  int lost_ = 0;
  std::vector<double> scratch_;
};

SpotTrack track_centroid(const FrameSequence& frames, const TrackerSettings& settings = {});

/// Render and track in bounded-memory chunks.
SpotTrack render_and_track(const AngleSeries& angles, const ReadoutGeometry& geometry,
                           const RenderOptions& options,
                           const TrackerSettings& settings = {},
                           std::size_t chunk_frames = 4096, Exec exec = Exec::parallel);

/// Expected one-sided PSD (px^2/Hz) of the x-centroid of a static spot under
/// shot and quantization noise; first-order error propagation through the
/// tracker's weighted mean.
double expected_centroid_noise_psd(const ReadoutGeometry& geometry,
                                   const TrackerSettings& settings = {});

/// Displacement track (px relative to rest) straight from angles, bypassing
/// the camera; samples at the series' own timestamps.
SpotTrack ideal_track(const AngleSeries& angles, const ReadoutGeometry& geometry);

}  // namespace fmto
