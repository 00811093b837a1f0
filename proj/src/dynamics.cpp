#include "fmto/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "fmto/error.hpp"

namespace fmto {

DriveSignal::DriveSignal() = default;

DriveSignal DriveSignal::sinusoid(double amplitude, double frequency, double phase) {
  if (!(frequency >= 0.0)) throw DomainError("drive frequency must be >= 0");
  DriveSignal d;
  d.kind_ = Kind::sinusoid;
  d.tones_.push_back({amplitude, frequency, phase});
  return d;
}

DriveSignal DriveSignal::multi_tone(std::vector<Tone> tones) {
  for (const auto& t : tones)
    if (!(t.frequency >= 0.0)) throw DomainError("drive frequency must be >= 0");
  DriveSignal d;
  d.kind_ = Kind::multi_tone;
  d.tones_ = std::move(tones);
  return d;
}

DriveSignal DriveSignal::tabulated(std::vector<double> times, std::vector<double> field) {
  if (times.size() != field.size() || times.size() < 2)
    throw DomainError("tabulated drive needs matching time/field arrays of length >= 2");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw DomainError("tabulated drive times must be strictly increasing");
  DriveSignal d;
  d.kind_ = Kind::tabulated;
  d.table_t_ = std::move(times);
  d.table_b_ = std::move(field);
  return d;
}

double DriveSignal::operator()(double t) const {
  if (kind_ == Kind::tabulated) {
    if (t < table_t_.front() || t > table_t_.back()) return 0.0;
    const auto it = std::upper_bound(table_t_.begin(), table_t_.end(), t);
    if (it == table_t_.end()) return table_b_.back();
    const auto i = static_cast<std::size_t>(it - table_t_.begin());
    const double w = (t - table_t_[i - 1]) / (table_t_[i] - table_t_[i - 1]);
    return (1.0 - w) * table_b_[i - 1] + w * table_b_[i];
  }
  double b = 0.0;
  for (const auto& tone : tones_)
    b += tone.amplitude * std::cos(two_pi * tone.frequency * t + tone.phase);
  return b;
}

DriveSignal DriveSignal::scaled(double factor) const {
  DriveSignal d = *this;
  for (auto& t : d.tones_) t.amplitude *= factor;
  for (auto& b : d.table_b_) b *= factor;
  return d;
}

std::complex<double> susceptibility(double f, const OscillatorParams& params) {
  if (!(f >= 0.0)) throw DomainError("frequency must be >= 0");
  const double fr = params.f_res();
  const std::complex<double> den(fr * fr - f * f, f * fr / params.q_factor());
  return 1.0 / (4.0 * pi * pi * params.inertia() * den);
}

double thermal_torque_psd(const OscillatorParams& params, double temperature) {
  if (!(temperature >= 0.0)) throw DomainError("temperature must be >= 0");
  return 8.0 * pi * constants.k_B * temperature * params.inertia() * params.f_res() /
         params.q_factor();
}

namespace {

struct ToneResponse {
  double amplitude;  // rad
  double omega;
  double phase;  // drive phase + arg chi
};

std::vector<ToneResponse> tone_responses(const OscillatorParams& params,
                                         const DriveSignal& drive) {
  std::vector<ToneResponse> out;
  for (const auto& tone : drive.tones()) {
    const auto c = params.moment() * tone.amplitude * susceptibility(tone.frequency, params);
    out.push_back({std::abs(c), two_pi * tone.frequency, tone.phase + std::arg(c)});
  }
  return out;
}

// Steady-state angle and rate of the tone drives at time t.
std::pair<double, double> particular(const std::vector<ToneResponse>& tones, double t) {
  double th = 0.0;
  double w = 0.0;
  for (const auto& r : tones) {
    const double ph = r.omega * t + r.phase;
    th += r.amplitude * std::cos(ph);
    w -= r.omega * r.amplitude * std::sin(ph);
  }
  return {th, w};
}

void check_options(const OscillatorParams& params, const SimulationOptions& o) {
  if (!(o.dt > 0.0)) throw PreconditionError("dt must be positive");
  if (o.dt > (1.0 + 1e-12) / (50.0 * params.f_res()))
    throw PreconditionError("dt must be <= 1/(50 f_r) to resolve the resonance");
  if (!(o.duration >= 10.0 * o.dt)) throw PreconditionError("duration must be >= 10 dt");
  if (!(o.temperature >= 0.0)) throw DomainError("temperature must be >= 0");
}

}  // namespace

AngleSeries simulate(const OscillatorParams& params, const DriveSignal& drive,
                     const SimulationOptions& options) {
  check_options(params, options);
  const double h = options.dt;
  const auto n = static_cast<std::size_t>(std::llround(options.duration / h)) + 1;
  const double w0 = params.omega0();
  const double gamma = params.dissipation_rate();
  const double accel_per_tesla = params.moment() / params.inertia();
  const double kT = constants.k_B * options.temperature;

  AngleSeries out;
  out.timestamps.resize(n);
  out.angles.resize(n);
  out.angular_rates.resize(n);
  out.seed = options.seed;
  out.dt = h;
  out.params = params;

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double var_angle = kT / params.stiffness();
  const double var_rate = kT / params.inertia();

  const bool tabulated = drive.kind() == DriveSignal::Kind::tabulated;
  const auto tones = tabulated ? std::vector<ToneResponse>{} : tone_responses(params, drive);

  double th = options.initial_angle;
  double w = options.initial_rate;
  if (options.start_in_equilibrium) {
    if (!tabulated) {
      const auto [tp, wp] = particular(tones, 0.0);
      th += tp;
      w += wp;
    }
    th += std::sqrt(var_angle) * normal(rng);
    w += std::sqrt(var_rate) * normal(rng);
  }

  if (options.integrator == Integrator::euler_maruyama) {
    const double kick = std::sqrt(2.0 * kT * gamma * h / params.inertia());
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) * h;
      out.timestamps[i] = t;
      out.angles[i] = th;
      out.angular_rates[i] = w;
      const double u = accel_per_tesla * drive(t);
      w += h * (-w0 * w0 * th - gamma * w + u);
      if (kT > 0.0) w += kick * normal(rng);
      th += h * w;
    }
    return out;
  }

  // Augmented generator for first-order-hold inputs: y = [theta, rate, u, du].
  Eigen::Matrix4d gen = Eigen::Matrix4d::Zero();
  gen(0, 1) = 1.0;
  gen(1, 0) = -w0 * w0;
  gen(1, 1) = -gamma;
  gen(1, 2) = 1.0;
  gen(2, 3) = 1.0 / h;
  const Eigen::Matrix4d prop = (gen * h).exp();
  const Eigen::Matrix2d phi = prop.topLeftCorner<2, 2>();
  const Eigen::Vector2d g_u = prop.block<2, 1>(0, 2);
  const Eigen::Vector2d g_du = prop.block<2, 1>(0, 3);

  Eigen::Matrix2d chol = Eigen::Matrix2d::Zero();
  if (kT > 0.0) {
    const Eigen::Matrix2d p_inf = Eigen::Vector2d(var_angle, var_rate).asDiagonal();
    const Eigen::Matrix2d qd = p_inf - phi * p_inf * phi.transpose();
    chol(0, 0) = std::sqrt(std::max(qd(0, 0), 0.0));
    chol(1, 0) = chol(0, 0) > 0.0 ? qd(1, 0) / chol(0, 0) : 0.0;
    chol(1, 1) = std::sqrt(std::max(qd(1, 1) - chol(1, 0) * chol(1, 0), 0.0));
  }

  // Tone drives: propagate the deviation from the analytic steady state.
  Eigen::Vector2d z(th, w);
  if (!tabulated) {
    const auto [tp, wp] = particular(tones, 0.0);
    z -= Eigen::Vector2d(tp, wp);
  }
  double u_prev = tabulated ? accel_per_tesla * drive(0.0) : 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * h;
    out.timestamps[i] = t;
    if (tabulated) {
      out.angles[i] = z(0);
      out.angular_rates[i] = z(1);
    } else {
      const auto [tp, wp] = particular(tones, t);
      out.angles[i] = z(0) + tp;
      out.angular_rates[i] = z(1) + wp;
    }
    if (i + 1 == n) break;
    Eigen::Vector2d next = phi * z;
    if (tabulated) {
      const double u_next = accel_per_tesla * drive(t + h);
      next += g_u * u_prev + g_du * (u_next - u_prev);
      u_prev = u_next;
    }
    if (kT > 0.0) {
      const double e0 = normal(rng);
      const double e1 = normal(rng);
      next(0) += chol(0, 0) * e0;
      next(1) += chol(1, 0) * e0 + chol(1, 1) * e1;
    }
    z = next;
  }
  return out;
}

AnglePsd analytic_angle_psd(double f, const OscillatorParams& params, double temperature,
                            const DriveSignal& drive) {
  const double chi2 = std::norm(susceptibility(f, params));
  AnglePsd out{chi2 * thermal_torque_psd(params, temperature), {}};
  for (const auto& tone : drive.tones()) {
    const double a = params.moment() * tone.amplitude *
                     std::abs(susceptibility(tone.frequency, params));
    out.lines.push_back({tone.frequency, 0.5 * a * a});
  }
  return out;
}

double sampled_angle_psd(double f, const OscillatorParams& params, double temperature,
                         double sample_rate, int images) {
  if (!(sample_rate > 0.0)) throw DomainError("sample rate must be positive");
  const double s_tau = thermal_torque_psd(params, temperature);
  double total = 0.0;
  for (int m = -images; m <= images; ++m) {
    const double fm = std::abs(f + m * sample_rate);
    total += std::norm(susceptibility(fm, params));
  }
  return total * s_tau;
}

AngleSeries drop_before(const AngleSeries& series, double t_min) {
  const auto it = std::lower_bound(series.timestamps.begin(), series.timestamps.end(), t_min);
  const auto first = static_cast<std::size_t>(it - series.timestamps.begin());
  AngleSeries out;
  out.seed = series.seed;
  out.dt = series.dt;
  out.params = series.params;
  out.timestamps.assign(series.timestamps.begin() + first, series.timestamps.end());
  out.angles.assign(series.angles.begin() + first, series.angles.end());
  if (!series.angular_rates.empty())
    out.angular_rates.assign(series.angular_rates.begin() + first, series.angular_rates.end());
  return out;
}

AngleSeries drop_transient(const AngleSeries& series) {
  if (series.timestamps.empty()) return series;
  const double settle = 10.0 * series.params.q_factor() / series.params.f_res();
  return drop_before(series, series.timestamps.front() + settle);
}

}  // namespace fmto
