#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fmto/calibration.hpp"
#include "fmto/dynamics.hpp"
#include "fmto/exotic.hpp"
#include "fmto/lockin.hpp"
#include "fmto/optics.hpp"
#include "fmto/spectral.hpp"

namespace fmto {

namespace fs = std::filesystem;

/// Round-trip formatting for CSV cells.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const;
  std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
};

/// Numeric CSV with one header line.
CsvTable read_csv(const fs::path& path);
void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<const std::vector<double>*>& columns);

// time_s, angle_rad
void write_angle_series_csv(const fs::path& path, const AngleSeries& series);
AngleSeries read_angle_series_csv(const fs::path& path);

/// Lossless little-endian binary with a params snapshot and rates.
void write_angle_series_binary(const fs::path& path, const AngleSeries& series);
AngleSeries read_angle_series_binary(const fs::path& path);

/// Reads either format, by extension (.csv or anything else = binary).
AngleSeries read_angle_series(const fs::path& path);

/// One binary PGM per frame plus frames.json with timestamps and geometry.
void write_frames(const fs::path& dir, const FrameSequence& frames);
FrameSequence read_frames(const fs::path& dir);

// time_s, position_px, quality
void write_track_csv(const fs::path& path, const SpotTrack& track);
SpotTrack read_track_csv(const fs::path& path);

// freq_hz, amp, phase_rad
void write_sweep_csv(const fs::path& path, const SweepResult& sweep);
SweepResult read_sweep_csv(const fs::path& path);

// freq_hz, psd
void write_spectrum_csv(const fs::path& path, const SpectrumEstimate& spectrum);
SpectrumEstimate read_spectrum_csv(const fs::path& path);

void write_fit_json(const fs::path& path, const LorentzianFit& fit);

// freq_hz, eta_T_per_rtHz, provenance
void write_sensitivity_csv(const fs::path& path, const SensitivityCurve& curve);

// lambda_m, delta_f45
void write_bounds_csv(const fs::path& path, const std::vector<CouplingBound>& bounds);

/// Writes text atomically enough for our purposes: temp file, then rename.
void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

}  // namespace fmto
