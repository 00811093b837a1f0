#include "fmto/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include <Eigen/Dense>
#include <fftw3.h>
#include <fmt/format.h>

#include "fmto/core.hpp"

namespace fmto {

std::string to_string(Window w) { return w == Window::hann ? "hann" : "rectangular"; }

Window window_from_string(const std::string& name) {
  if (name == "hann") return Window::hann;
  if (name == "rectangular" || name == "boxcar") return Window::rectangular;
  throw DomainError("unknown window '" + name + "'");
}

std::size_t SpectrumEstimate::bin_of(double f) const {
  if (psd.empty()) throw DomainError("empty spectrum");
  const double k = std::round((f - frequencies.front()) / bin_width);
  if (!(k >= 0.0) || k > static_cast<double>(psd.size() - 1))
    throw DomainError(fmt::format("frequency {} Hz outside the spectrum", f));
  return static_cast<std::size_t>(k);
}

namespace {

std::vector<double> make_window(Window w, std::size_t n) {
  std::vector<double> out(n, 1.0);
  if (w == Window::hann)
    for (std::size_t i = 0; i < n; ++i)
      out[i] = 0.5 - 0.5 * std::cos(two_pi * static_cast<double>(i) / static_cast<double>(n));
  return out;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

}  // namespace

WelchResult welch_psd(std::span<const double> t, std::span<const double> x,
                      const WelchOptions& o, Exec exec) {
  if (t.size() != x.size()) throw DomainError("time and value arrays differ in length");
  if (x.size() < 4) throw PreconditionError("series too short for a PSD");
  if (!(o.segment_length > 0.0)) throw DomainError("segment length must be positive");
  if (!(o.overlap >= 0.0 && o.overlap < 1.0)) throw DomainError("overlap must be in [0, 1)");

  const double span = t.back() - t.front();
  const double mean_dt = span / static_cast<double>(t.size() - 1);
  if (!(mean_dt > 0.0)) throw PreconditionError("timestamps must increase");
  // Every sample must sit within half a step of the least-squares uniform grid.
  const double n = static_cast<double>(t.size());
  const double i_mean = 0.5 * (n - 1.0);
  double t_mean = 0.0, sxy = 0.0, sxx = 0.0;
  for (double v : t) t_mean += v;
  t_mean /= n;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double di = static_cast<double>(i) - i_mean;
    sxy += di * (t[i] - t_mean);
    sxx += di * di;
  }
  const double step_ls = sxy / sxx;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (std::abs(t[i] - t_mean - (static_cast<double>(i) - i_mean) * step_ls) > 0.5 * mean_dt)
      throw PreconditionError("sampling is not approximately uniform; resample first");
  if (span + mean_dt < 2.0 * o.segment_length * (1.0 - 1e-9))
    throw PreconditionError("series shorter than two segments");

  const double fs = 1.0 / mean_dt;
  const auto nseg = static_cast<std::size_t>(std::llround(o.segment_length * fs));
  const auto step = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(nseg) * (1.0 - o.overlap))));
  const std::size_t count = (x.size() - nseg) / step + 1;
  const std::size_t nbins = nseg / 2 + 1;

  const auto w = make_window(o.window, nseg);
  const double wsum2 = std::inner_product(w.begin(), w.end(), w.begin(), 0.0);

  std::unique_ptr<double, FftwFree> plan_in(fftw_alloc_real(nseg));
  std::unique_ptr<fftw_complex, FftwFree> plan_out(fftw_alloc_complex(nbins));
  fftw_plan plan =
      fftw_plan_dft_r2c_1d(static_cast<int>(nseg), plan_in.get(), plan_out.get(), FFTW_ESTIMATE);
  if (plan == nullptr) throw NumericalError("FFT plan creation failed");

  WelchResult result;
  result.segments.resize(count);
  std::vector<double> freqs(nbins);
  for (std::size_t k = 0; k < nbins; ++k) freqs[k] = static_cast<double>(k) * fs / nseg;

  try {
    parallel_for(static_cast<std::ptrdiff_t>(count), exec, [&](std::ptrdiff_t s) {
      const std::size_t first = static_cast<std::size_t>(s) * step;
      std::unique_ptr<double, FftwFree> in(fftw_alloc_real(nseg));
      std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(nbins));
      double mean = 0.0;
      for (std::size_t i = 0; i < nseg; ++i) mean += x[first + i];
      mean /= static_cast<double>(nseg);
      for (std::size_t i = 0; i < nseg; ++i) in.get()[i] = (x[first + i] - mean) * w[i];
      fftw_execute_dft_r2c(plan, in.get(), out.get());

      auto& seg = result.segments[static_cast<std::size_t>(s)];
      seg.frequencies = freqs;
      seg.psd.resize(nbins);
      seg.bin_width = fs / nseg;
      seg.n_segments_used = 1;
      seg.window = o.window;
      seg.window_power = wsum2 / static_cast<double>(nseg);
      for (std::size_t k = 0; k < nbins; ++k) {
        const double re = out.get()[k][0];
        const double im = out.get()[k][1];
        const bool edge = k == 0 || (nseg % 2 == 0 && k == nbins - 1);
        seg.psd[k] = (edge ? 1.0 : 2.0) * (re * re + im * im) / (fs * wsum2);
      }
    });
  } catch (...) {
    fftw_destroy_plan(plan);
    throw;
  }
  fftw_destroy_plan(plan);
  result.average = average_spectra(result.segments);
  return result;
}

SpectrumEstimate average_spectra(std::span<const SpectrumEstimate> spectra,
                                 std::span<const std::size_t> indices) {
  if (spectra.empty()) throw DomainError("no spectra to average");
  std::vector<std::size_t> all;
  if (indices.empty()) {
    all.resize(spectra.size());
    std::iota(all.begin(), all.end(), 0);
    indices = all;
  }
  const auto& first = spectra[indices.front()];
  SpectrumEstimate avg = first;
  std::fill(avg.psd.begin(), avg.psd.end(), 0.0);
  avg.n_segments_used = 0;
  for (auto i : indices) {
    if (i >= spectra.size()) throw DomainError("segment index out of range");
    const auto& s = spectra[i];
    if (s.psd.size() != avg.psd.size() || s.bin_width != avg.bin_width)
      throw DomainError("spectra on different frequency grids");
    for (std::size_t k = 0; k < s.psd.size(); ++k) avg.psd[k] += s.psd[k] * s.n_segments_used;
    avg.n_segments_used += s.n_segments_used;
  }
  for (auto& v : avg.psd) v /= static_cast<double>(avg.n_segments_used);
  return avg;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) throw NumericalError("median of an empty set");
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

// Bins 2 < |j - k| <= 20 around k, excluding DC.
std::vector<double> neighborhood(const SpectrumEstimate& s, std::size_t k, std::size_t inner,
                                 std::size_t outer) {
  std::vector<double> out;
  const auto n = static_cast<std::ptrdiff_t>(s.size());
  for (std::ptrdiff_t d = static_cast<std::ptrdiff_t>(inner) + 1;
       d <= static_cast<std::ptrdiff_t>(outer); ++d) {
    for (const std::ptrdiff_t j : {static_cast<std::ptrdiff_t>(k) - d,
                                   static_cast<std::ptrdiff_t>(k) + d})
      if (j >= 1 && j < n) out.push_back(s.psd[static_cast<std::size_t>(j)]);
  }
  return out;
}

}  // namespace

double segment_snr(const SpectrumEstimate& spectrum, double f_cal) {
  const std::size_t k = spectrum.bin_of(f_cal);
  if (k == 0) throw DomainError("calibration frequency falls on the DC bin");
  double peak = spectrum.psd[k];
  if (k + 1 < spectrum.size()) peak = std::max(peak, spectrum.psd[k + 1]);
  if (k > 1) peak = std::max(peak, spectrum.psd[k - 1]);
  const auto around = neighborhood(spectrum, k, 2, 20);
  if (around.size() < 8) throw DomainError("too few bins around the calibration frequency");
  const double floor = median(around);
  return floor > 0.0 ? peak / floor : std::numeric_limits<double>::infinity();
}

SegmentSelection select_segments_by_snr(std::span<const SpectrumEstimate> segments,
                                        double f_cal, std::size_t top_n) {
  if (top_n == 0 || top_n > segments.size())
    throw PreconditionError("top_n must be between 1 and the number of segments");
  SegmentSelection out;
  out.snr.reserve(segments.size());
  for (const auto& s : segments) out.snr.push_back(segment_snr(s, f_cal));
  std::vector<std::size_t> order(segments.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out.snr[a] > out.snr[b]; });
  out.selected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top_n));
  out.average = average_spectra(segments, out.selected);
  return out;
}

PeakArea peak_area(const SpectrumEstimate& s, double f_center, int halfwidth_bins,
                   std::optional<Resonance> resonance, WarningPolicy policy) {
  if (halfwidth_bins < 0) throw DomainError("half-width must be >= 0");
  const std::size_t k = s.bin_of(f_center);
  const auto hw = static_cast<std::size_t>(halfwidth_bins);
  if (k < hw + 1 || k + hw >= s.size()) throw DomainError("band extends outside the spectrum");
  const double f_low = s.frequencies[k - hw];
  const double f_high = s.frequencies[k + hw];
  if (resonance && policy == WarningPolicy::raise) {
    const double half = resonance->f_r / (2.0 * resonance->q_factor);
    if (f_high >= resonance->f_r - half && f_low <= resonance->f_r + half)
      throw RegimeWarning("peak band overlaps the mechanical resonance; area is biased");
  }
  const double floor = median(neighborhood(s, k, hw, hw + 20));
  double area = 0.0;
  for (std::size_t j = k - hw; j <= k + hw; ++j) area += s.psd[j] - floor;
  return {area * s.bin_width, floor, f_low, f_high};
}

double lorentzian_model(double f, const LorentzianParams& p) {
  const double fr2 = p.f_r * p.f_r;
  const double a = fr2 - f * f;
  const double b = f * p.f_r / p.q_factor;
  const double num = fr2 / p.q_factor;
  return p.peak_amplitude * num * num / (a * a + b * b) + p.noise_offset;
}

std::array<double, 4> lorentzian_gradient(double f, const LorentzianParams& p) {
  const double fr = p.f_r;
  const double q = p.q_factor;
  const double fr2 = fr * fr;
  const double a = fr2 - f * f;
  const double b = f * fr / q;
  const double den = a * a + b * b;
  const double num = fr2 * fr2 / (q * q);
  const double shape = num / den;
  // d den / d fr, d den / d q
  const double dden_fr = 4.0 * fr * a + 2.0 * b * f / q;
  const double dden_q = -2.0 * b * b / q;
  const double dnum_fr = 4.0 * num / fr;
  const double dnum_q = -2.0 * num / q;
  const double d_fr = p.peak_amplitude * (dnum_fr * den - num * dden_fr) / (den * den);
  const double d_q = p.peak_amplitude * (dnum_q * den - num * dden_q) / (den * den);
  return {d_fr, d_q, shape, 1.0};
}

double LorentzianFit::sigma(int i) const {
  if (i < 0 || i > 3) throw DomainError("parameter index out of range");
  return std::sqrt(std::max(covariance[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)],
                            0.0));
}

namespace {

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;

LorentzianParams to_params(const Vec4& v) { return {v(0), v(1), v(2), v(3)}; }

double cost_of(std::span<const double> f, std::span<const double> y, std::span<const double> w,
               const LorentzianParams& p) {
  double c = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = y[i] - lorentzian_model(f[i], p);
    c += (w.empty() ? 1.0 : w[i]) * r * r;
  }
  return c;
}

void normal_equations(std::span<const double> f, std::span<const double> y,
                      std::span<const double> w, const LorentzianParams& p, Mat4& a, Vec4& g) {
  a.setZero();
  g.setZero();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto d = lorentzian_gradient(f[i], p);
    const Vec4 j(d[0], d[1], d[2], d[3]);
    const double wi = w.empty() ? 1.0 : w[i];
    const double r = y[i] - lorentzian_model(f[i], p);
    a.noalias() += wi * j * j.transpose();
    g += wi * r * j;
  }
}

LorentzianParams initial_guess(std::span<const double> f, std::span<const double> y) {
  const auto imax = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  const double offset = std::max(*std::min_element(y.begin(), y.end()), 0.0);
  const double peak = y[imax] - offset;
  if (!(peak > 0.0)) throw NumericalError("Lorentzian fit: data has no peak");
  const double half = offset + 0.5 * peak;

  auto crossing = [&](std::ptrdiff_t dir) -> std::optional<double> {
    for (auto i = static_cast<std::ptrdiff_t>(imax);
         i + dir >= 0 && i + dir < static_cast<std::ptrdiff_t>(y.size()); i += dir) {
      const auto a = static_cast<std::size_t>(i);
      const auto b = static_cast<std::size_t>(i + dir);
      if (y[b] <= half) return f[a] + (f[b] - f[a]) * (y[a] - half) / (y[a] - y[b]);
    }
    return std::nullopt;
  };
  const auto lo = crossing(-1);
  const auto hi = crossing(+1);
  double width;
  if (lo && hi) width = *hi - *lo;
  else if (lo) width = 2.0 * (f[imax] - *lo);
  else if (hi) width = 2.0 * (*hi - f[imax]);
  else throw NumericalError("Lorentzian fit: no half-power point in the data");
  if (!(width > 0.0)) {
    // Peak narrower than the grid.
    width = imax + 1 < f.size() ? f[imax + 1] - f[imax] : f[imax] - f[imax - 1];
  }
  return {f[imax], f[imax] / width, peak, offset};
}

}  // namespace

namespace {

struct Solved {
  Vec4 p;
  double cost;
  int iterations;
};

Solved levenberg_marquardt(std::span<const double> f, std::span<const double> y,
                           std::span<const double> weights, Vec4 p, const FitOptions& options,
                           bool positive = false) {
  auto feasible = [&](const Vec4& v) {
    if (!(v(0) > 0.0 && v(1) > 0.0)) return false;
    if (!positive) return true;
    for (double fi : f)
      if (!(lorentzian_model(fi, to_params(v)) > 0.0)) return false;
    return true;
  };
  double cost = cost_of(f, y, weights, to_params(p));
  double lambda = 1e-3;
  Mat4 a;
  Vec4 g;
  int it = 0;
  bool converged = false;
  for (; it < options.max_iterations && !converged; ++it) {
    normal_equations(f, y, weights, to_params(p), a, g);
    for (;;) {
      Mat4 damped = a;
      for (int i = 0; i < 4; ++i) damped(i, i) += lambda * std::max(a(i, i), 1e-300);
      const Vec4 step = damped.ldlt().solve(g);
      const Vec4 trial = p + step;
      const double trial_cost = feasible(trial)
                                    ? cost_of(f, y, weights, to_params(trial))
                                    : std::numeric_limits<double>::infinity();
      if (trial_cost <= cost) {
        const double scale_amp = std::abs(trial(2)) + std::abs(trial(3));
        const bool small = std::abs(step(0)) <= options.tolerance * trial(0) &&
                           std::abs(step(1)) <= options.tolerance * trial(1) &&
                           std::abs(step(2)) <= options.tolerance * scale_amp &&
                           std::abs(step(3)) <= options.tolerance * scale_amp;
        converged = small || cost - trial_cost <= 1e-15 * cost;
        p = trial;
        cost = trial_cost;
        lambda = std::max(lambda * 0.3, 1e-12);
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e16) {
        converged = true;  // no downhill step left: at a minimum to machine precision
        break;
      }
    }
  }
  if (!converged)
    throw NumericalError(fmt::format(
        "Lorentzian fit did not converge in {} iterations (f_r = {}, Q = {}, cost = {})", it,
        p(0), p(1), cost));
  return {p, cost, it};
}

void check_fit_input(std::span<const double> f, std::span<const double> y,
                     std::span<const double> weights) {
  if (f.size() != y.size() || (!weights.empty() && weights.size() != f.size()))
    throw DomainError("fit arrays differ in length");
  if (f.size() < 8) throw PreconditionError("too few points for a Lorentzian fit");
  for (std::size_t i = 1; i < f.size(); ++i)
    if (!(f[i] > f[i - 1])) throw DomainError("fit frequencies must be strictly increasing");
}

Vec4 checked_start(std::span<const double> f, std::span<const double> y) {
  const auto p0 = initial_guess(f, y);
  const double lo_needed = std::max(p0.f_r - 3.0 * p0.f_r / p0.q_factor, f.front());
  if (f.front() > lo_needed || f.back() < p0.f_r + 3.0 * p0.f_r / p0.q_factor)
    throw PreconditionError(fmt::format(
        "data [{}, {}] Hz does not cover f_r +- 3 f_r/Q around the initial estimate "
        "f_r = {}, Q = {}", f.front(), f.back(), p0.f_r, p0.q_factor));
  return {p0.f_r, p0.q_factor, p0.peak_amplitude, p0.noise_offset};
}

void store_covariance(const Mat4& cov, LorentzianFit& fit) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      fit.covariance[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          0.5 * (cov(i, j) + cov(j, i));
}

}  // namespace

LorentzianFit fit_lorentzian(std::span<const double> f, std::span<const double> y,
                             std::span<const double> weights, const FitOptions& options) {
  check_fit_input(f, y, weights);
  const auto r = levenberg_marquardt(f, y, weights, checked_start(f, y), options);
  LorentzianFit fit;
  fit.params = to_params(r.p);
  fit.iterations = r.iterations;
  fit.residual_norm = std::sqrt(r.cost);
  Mat4 a;
  Vec4 g;
  normal_equations(f, y, weights, fit.params, a, g);
  const double dof = static_cast<double>(f.size()) - 4.0;
  store_covariance((r.cost / dof) * a.inverse(), fit);
  return fit;
}

LorentzianFit fit_lorentzian(const SpectrumEstimate& s, double f_low, double f_high,
                             const FitOptions& options) {
  std::vector<double> f, y;
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (s.frequencies[k] < f_low || s.frequencies[k] > f_high) continue;
    f.push_back(s.frequencies[k]);
    y.push_back(s.psd[k]);
  }
  check_fit_input(f, y, {});

  // Averaged periodogram bins scatter in proportion to the spectrum itself:
  // refit with weights 1 / model^2 until the weights settle.
  const Vec4 start = checked_start(f, y);
  auto r = levenberg_marquardt(f, y, {}, start, options);
  double y_min = std::numeric_limits<double>::infinity();
  for (double v : y)
    if (v > 0.0) y_min = std::min(y_min, v);
  std::vector<double> w(f.size()), m(f.size());
  int total = r.iterations;
  for (int pass = 0; pass < 8; ++pass) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      m[i] = std::max(lorentzian_model(f[i], to_params(r.p)), y_min);
      w[i] = 1.0 / (m[i] * m[i]);
    }
    const Vec4 before = r.p;
    r = levenberg_marquardt(f, y, w, pass == 0 ? start : r.p, options, true);
    total += r.iterations;
    if (pass > 0 && std::abs(r.p(0) - before(0)) <= 1e-9 * r.p(0) &&
        std::abs(r.p(1) - before(1)) <= 1e-6 * r.p(1))
      break;
  }
  for (std::size_t i = 0; i < f.size(); ++i) {
    m[i] = lorentzian_model(f[i], to_params(r.p));
    w[i] = 1.0 / (m[i] * m[i]);
  }
  r.cost = cost_of(f, y, w, to_params(r.p));

  LorentzianFit fit;
  fit.params = to_params(r.p);
  fit.iterations = total;
  fit.residual_norm = std::sqrt(r.cost);

  // Sandwich covariance. Neighbouring bins of a windowed spectrum are
  // correlated; power correlation of bins k apart for a locally flat spectrum.
  std::vector<double> rho;
  if (s.window == Window::hann) rho = {4.0 / 9.0, 1.0 / 36.0};
  const double dof = static_cast<double>(f.size()) - 4.0;
  const double s2 = r.cost / dof;  // relative variance per bin, about 1 / segments
  Mat4 h = Mat4::Zero(), b = Mat4::Zero();
  std::vector<Vec4> jw(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto d = lorentzian_gradient(f[i], fit.params);
    const Vec4 j(d[0], d[1], d[2], d[3]);
    h.noalias() += w[i] * j * j.transpose();
    jw[i] = j / m[i];  // w_i m_i J_i
  }
  for (std::size_t i = 0; i < f.size(); ++i) {
    b.noalias() += jw[i] * jw[i].transpose();
    for (std::size_t k = 1; k <= rho.size() && i + k < f.size(); ++k) {
      const Mat4 c = rho[k - 1] * jw[i] * jw[i + k].transpose();
      b += c + c.transpose();
    }
  }
  const Mat4 hi = h.inverse();
  store_covariance(s2 * hi * b * hi, fit);
  return fit;
}

LorentzianFit fit_lorentzian(const SweepResult& sweep, const FitOptions& options) {
  std::vector<double> y(sweep.amplitudes.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = sweep.amplitudes[i] * sweep.amplitudes[i];
  return fit_lorentzian(sweep.frequencies, y, {}, options);
}

}  // namespace fmto
