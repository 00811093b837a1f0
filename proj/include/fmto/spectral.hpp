#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fmto/error.hpp"
#include "fmto/lockin.hpp"
#include "fmto/parallel.hpp"

namespace fmto {

enum class Window { hann, rectangular };

std::string to_string(Window w);
Window window_from_string(const std::string& name);

/// One-sided PSD on a uniform grid starting at 0 Hz.
struct SpectrumEstimate {
  std::vector<double> frequencies;  // Hz
  std::vector<double> psd;          // units^2/Hz, one-sided
  double bin_width = 0.0;           // Hz
  std::size_t n_segments_used = 0;
  Window window = Window::hann;
  double window_power = 1.0;  // mean of w^2 over the segment

  std::size_t size() const noexcept { return psd.size(); }
  /// Index of the bin nearest to f; throws if f lies outside the grid.
  std::size_t bin_of(double f) const;
};

struct WelchOptions {
  double segment_length = 100.0;  // s
  Window window = Window::hann;
  double overlap = 0.0;           // fraction in [0, 1)
};

struct WelchResult {
  std::vector<SpectrumEstimate> segments;
  SpectrumEstimate average;
};

/// Welch estimate of an (approximately) uniformly sampled series. Each
/// segment has its mean removed, is windowed and normalized so that the
/// one-sided PSD integrates to the segment variance.
WelchResult welch_psd(std::span<const double> t, std::span<const double> x,
                      const WelchOptions& options = {}, Exec exec = Exec::parallel);

/// Bin-wise mean of the selected spectra (all when indices is empty).
SpectrumEstimate average_spectra(std::span<const SpectrumEstimate> spectra,
                                 std::span<const std::size_t> indices = {});

/// Peak power near f_cal over the median of the +-20 bin neighborhood
/// excluding +-2 bins.
double segment_snr(const SpectrumEstimate& spectrum, double f_cal);

struct SegmentSelection {
  SpectrumEstimate average;
  std::vector<std::size_t> selected;  // segment indices, best first
  std::vector<double> snr;            // per input segment
};

SegmentSelection select_segments_by_snr(std::span<const SpectrumEstimate> segments,
                                        double f_cal, std::size_t top_n);

struct Resonance {
  double f_r;
  double q_factor;
};

struct PeakArea {
  double area;   // units^2, mean-square power of the line
  double floor;  // units^2/Hz, subtracted median floor
  double f_low;  // band edges, Hz
  double f_high;
};

/// Sums (psd - local median floor) * bin_width over f_center +- halfwidth
/// bins. With a resonance given, a band reaching into f_r +- f_r/(2Q) is a
/// RegimeWarning.
PeakArea peak_area(const SpectrumEstimate& spectrum, double f_center, int halfwidth_bins,
                   std::optional<Resonance> resonance = std::nullopt,
                   WarningPolicy policy = WarningPolicy::raise);

/// Lorentzian parameters in fit order.
struct LorentzianParams {
  double f_r;
  double q_factor;
  double peak_amplitude;  // value of the Lorentzian part at f_r
  double noise_offset;
};

/// peak * (f_r^2/Q)^2 / [(f_r^2 - f^2)^2 + (f f_r / Q)^2] + offset
double lorentzian_model(double f, const LorentzianParams& p);
/// d model / d (f_r, Q, peak, offset).
std::array<double, 4> lorentzian_gradient(double f, const LorentzianParams& p);

struct LorentzianFit {
  LorentzianParams params;
  std::array<std::array<double, 4>, 4> covariance{};
  double residual_norm = 0.0;
  int iterations = 0;

  double f_r() const noexcept { return params.f_r; }
  double q_factor() const noexcept { return params.q_factor; }
  double sigma(int i) const;
};

struct FitOptions {
  int max_iterations = 200;
  double tolerance = 1e-10;
};

/// Levenberg-Marquardt fit with analytic Jacobian. Optional weights are
/// inverse variances. Covariance is scaled by the reduced chi-square.
LorentzianFit fit_lorentzian(std::span<const double> f, std::span<const double> y,
                             std::span<const double> weights = {},
                             const FitOptions& options = {});

/// Fits the bins of a spectrum within [f_low, f_high], weighting each bin by
/// 1 / model^2; the covariance accounts for window-correlated neighbours.
LorentzianFit fit_lorentzian(const SpectrumEstimate& spectrum, double f_low, double f_high,
                             const FitOptions& options = {});

/// Fits the squared sweep amplitudes.
LorentzianFit fit_lorentzian(const SweepResult& sweep, const FitOptions& options = {});

}  // namespace fmto
