#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's numerical kernels.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

inline constexpr double pi = std::numbers::pi;
inline constexpr double mu0 = 1.25663706212e-6;

// Moment of inertia of a solid cylinder (radius r, length h, unit density)
// by rejection sampling in its bounding box. axis 0: symmetry axis, 1: a
// diameter through the center.
inline double mc_cylinder_inertia(double r, double h, int axis, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-r, r), uz(-0.5 * h, 0.5 * h);
  double sum = 0.0;
  int inside = 0;
  for (int i = 0; i < samples; ++i) {
    const double x = ux(rng), y = ux(rng), z = uz(rng);
    if (x * x + y * y > r * r) continue;
    ++inside;
    sum += axis == 0 ? x * x + y * y : y * y + z * z;
  }
  const double box = 4.0 * r * r * h;
  // mass = volume = box * inside / samples
  return sum / samples * box;
}

inline double bisect(const std::function<double(double)>& f, double a, double b, double tol = 1e-14) {
  double fa = f(a);
  for (int i = 0; i < 200 && b - a > tol * std::abs(b); ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// On-axis B of one circular loop (radius a, in the plane z = z0, unit
// current) at (0, 0, z), by summing Biot-Savart over n straight elements.
inline double biot_savart_loop_axis(double a, double z0, double z, int n) {
  double bz = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p0 = 2.0 * pi * i / n, p1 = 2.0 * pi * (i + 1) / n;
    const double pm = 0.5 * (p0 + p1);
    // element dl at midpoint
    const double dlx = a * (std::cos(p1) - std::cos(p0));
    const double dly = a * (std::sin(p1) - std::sin(p0));
    const double rx = -a * std::cos(pm), ry = -a * std::sin(pm), rz = z - z0;
    const double r3 = std::pow(rx * rx + ry * ry + rz * rz, 1.5);
    bz += (dlx * ry - dly * rx) / r3;
  }
  return mu0 / (4.0 * pi) * bz;
}

// One-sided periodogram of x (mean removed) with window w, direct DFT.
inline std::vector<double> periodogram(const std::vector<double>& x, const std::vector<double>& w,
                                       double fs) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double u = 0.0;
  for (double v : w) u += v * v;
  std::vector<double> out(n / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      s += (x[i] - mean) * w[i] * std::polar(1.0, -2.0 * pi * double(k) * double(i) / double(n));
    const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
    out[k] = (edge ? 1.0 : 2.0) * std::norm(s) / (fs * u);
  }
  return out;
}

inline std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * pi * double(i) / double(n));
  return w;
}

// Least-squares amplitude of a sinusoid at known frequency (DC, cos, sin
// basis), plain unweighted normal equations solved by Cramer's rule.
inline double tone_amplitude(const std::vector<double>& t, const std::vector<double>& x, double f) {
  double a[3][3] = {}, b[3] = {};
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double v[3] = {1.0, std::cos(2 * pi * f * t[i]), std::sin(2 * pi * f * t[i])};
    for (int r = 0; r < 3; ++r) {
      b[r] += v[r] * x[i];
      for (int c = 0; c < 3; ++c) a[r][c] += v[r] * v[c];
    }
  }
  auto det = [](double m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const double d = det(a);
  double sol[3];
  for (int k = 0; k < 3; ++k) {
    double m[3][3];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m[r][c] = c == k ? b[r] : a[r][c];
    sol[k] = det(m) / d;
  }
  return std::hypot(sol[1], sol[2]);
}

// Damped free oscillation from (theta0, rate0), underdamped closed form.
inline double ringdown(double t, double theta0, double rate0, double f_r, double q) {
  const double w0 = 2 * pi * f_r, g = w0 / q;
  const double wd = w0 * std::sqrt(1.0 - 1.0 / (4.0 * q * q));
  const double a = theta0, b = (rate0 + 0.5 * g * theta0) / wd;
  return std::exp(-0.5 * g * t) * (a * std::cos(wd * t) + b * std::sin(wd * t));
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

}  // namespace oracle
