#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fmto/calibration.hpp"
#include "fmto/coils.hpp"
#include "fmto/dynamics.hpp"
#include "fmto/exotic.hpp"
#include "fmto/optics.hpp"
#include "fmto/spectral.hpp"

namespace fmto {

struct MagnetConfig {
  double diameter = 1e-3;  // m
  double height = 20e-3;   // m
  std::string material = "ndfeb";
};

struct OscillatorConfig {
  double inertia = 3e-10;
  std::optional<double> moment;      // A m^2; from magnet when unset
  double q_factor = 39.0;
  std::optional<double> f_res = 4.99;
  std::optional<double> bias_field;  // T; used when f_res is unset
  double k_offset = 0.0;
  MagnetConfig magnet;

  OscillatorParams resolve() const;
};

struct SimulationConfig {
  double temperature = 300.0;
  double dt = 4e-3;
  double duration = 6000.0;
  bool start_in_equilibrium = true;
  std::string integrator = "exact";
};

struct ReadoutConfig {
  ReadoutGeometry geometry;
  double jitter_sigma = 2e-3;
  std::string jitter_kind = "gaussian";
  bool photon_noise = true;
  bool write_frames = false;
  std::size_t max_written_frames = 500;
  TrackerSettings tracker;
};

struct CoilConfig {
  CoilPair signal = CoilPair::ac_signal();
  CoilPair bias = CoilPair::dc_bias();
  double deviation_factor = 1.0;
  double calibration_current = 2e-6;   // A, amplitude
  double calibration_frequency = 0.1;  // Hz
  std::vector<double> profile_offsets = {-10e-3, -5e-3, 0.0, 5e-3, 10e-3};
};

struct AnalysisConfig {
  double segment_length = 100.0;
  std::string window = "hann";
  double overlap = 0.0;
  std::size_t top_n = 50;
  int halfwidth_bins = 2;
  double fit_low = 3.0;   // Hz
  double fit_high = 7.0;  // Hz
  bool use_actual_timestamps = true;
};

struct SweepConfig {
  double f_start = 4.5;
  double f_stop = 5.5;
  double f_step = 0.01;
  double drive_amplitude = 1e-12;  // T
  double min_duration = 20.0;
  bool render_and_track = false;
};

struct SensitivityConfig {
  std::string material = "ndfeb";
  double temperature = 0.05;
  double q_factor = 1e5;
  std::vector<double> radii = {1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2};
  std::vector<double> f_res = {1e-3, 1e-2, 1e-1, 1.0};
};

struct BoundsConfig {
  double eta = 55e-15;  // T/sqrt(Hz)
  double t_mea = 1e4;   // s
  ExoticSourceConfig source = ExoticSourceConfig::reference();
  double lambda_min = 1e-4;
  double lambda_max = 1e-1;
  int points = 200;
  bool thermal = true;
  std::string thermal_material = "ndfeb";
  double thermal_temperature = 0.05;
  double thermal_q_factor = 1e7;
  std::vector<double> thermal_bias_fields = {1e-9, 1e-6, 1e-3};
};

struct ScenarioConfig {
  std::string name;
  std::uint64_t seed = 1;
  OscillatorConfig oscillator;
  SimulationConfig simulation;
  ReadoutConfig readout;
  CoilConfig coils;
  AnalysisConfig analysis;
  SweepConfig sweep;
  SensitivityConfig sensitivity;
  BoundsConfig bounds;
};

struct RunConfig {
  std::vector<ScenarioConfig> scenarios;
};

/// Parses and validates a YAML run configuration. Unknown keys, wrong types
/// and invalid values are ConfigErrors naming the offending key.
RunConfig parse_config(const std::string& yaml_text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON text of a fully resolved scenario.
std::string scenario_json(const ScenarioConfig& scenario);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& text);

}  // namespace fmto
