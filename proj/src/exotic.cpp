#include "fmto/exotic.hpp"

#include <cmath>

#include "fmto/calibration.hpp"

namespace fmto {

double c_lambda(double l0, double lambda) {
  if (!(l0 > 0.0)) throw DomainError("l0 must be positive");
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  const double x = l0 / lambda;
  return (x * x + 2.0 * x) * std::exp(-x);
}

double c0_constant(const MaterialProperties& m, const PhysicalConstants& k) {
  if (!(m.rho_n() > 0.0)) throw DomainError("source material has no nucleon density");
  return k.hbar * m.rho_n() / (4.0 * pi * k.m_e * k.c * k.gamma_e);
}

double ExoticSourceConfig::velocity() const noexcept { return two_pi * f_n * amplitude; }

void ExoticSourceConfig::validate() const {
  if (!(solid_angle > 0.0 && solid_angle <= 4.0 * pi))
    throw DomainError("solid angle must be in (0, 4 pi]");
  if (!(l0 > 0.0)) throw DomainError("l0 must be positive");
  if (!(lm > l0)) throw DomainError("lm must exceed l0");
  if (!(amplitude >= 0.0)) throw DomainError("amplitude must be >= 0");
  if (!(f_n > 0.0)) throw DomainError("vibration frequency must be positive");
  if (eps_a() > 0.2 * (1.0 + 1e-12))
    throw DomainError("amplitude / l0 must not exceed 0.2");
  if (!(material.rho_n() > 0.0)) throw DomainError("source material has no nucleon density");
}

ExoticSourceConfig ExoticSourceConfig::reference() {
  return {1e-2, 7.5e-3, 1.0, 1.5e-3, 4.99, MaterialProperties::bgo()};
}

ExoticSourceConfig ExoticSourceConfig::at_optimal_distance(double lambda) const {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  ExoticSourceConfig c = *this;
  const double eps = eps_a();
  c.l0 = std::sqrt(2.0) * lambda;
  c.amplitude = eps * c.l0;
  c.lm = std::max(lm, c.l0 + 10.0 * lambda);
  return c;
}

double pseudo_field_closed(const ExoticSourceConfig& c, double lambda, double f45,
                           WarningPolicy policy) {
  c.validate();
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  if (policy == WarningPolicy::raise && c.lm - c.l0 < 7.0 * lambda * (1.0 - 1e-12))
    throw RegimeWarning("shell thinner than 7 lambda; closed form is biased");
  return two_pi * c0_constant(c.material) * c_lambda(c.l0, lambda) * f45 * c.f_n *
         c.solid_angle * c.eps_a() * lambda * lambda;
}

double pseudo_field_numeric(const ExoticSourceConfig& c, double lambda, double f45,
                            const QuadratureOptions& options) {
  c.validate();
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  // Integrate in units of lambda from l0 to lm; the tail beyond ~750 lambda
  // is below double precision and only costs intervals.
  const double x0 = c.l0 / lambda;
  const double x1 = std::min(c.lm / lambda, x0 + 750.0);
  const auto r = integrate([](double x) { return (x + 1.0) * std::exp(-x); }, x0, x1, options);
  return f45 * c0_constant(c.material) * c.solid_angle * c.velocity() * lambda * r.value;
}

double shell_truncation_ratio(const ExoticSourceConfig& c, double lambda) {
  c.validate();
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  const double x0 = c.l0 / lambda;
  const double xm = c.lm / lambda;
  return 1.0 - std::exp(-(xm - x0)) * (xm + 2.0) / (x0 + 2.0);
}

CouplingBound coupling_bound(const ExoticSourceConfig& c, double lambda, double eta,
                             double t_mea) {
  c.validate();
  if (!(eta > 0.0)) throw DomainError("sensitivity must be positive");
  if (!(t_mea > 0.0)) throw DomainError("measurement time must be positive");
  const double cl = c_lambda(c.l0, lambda);
  const double lever = two_pi * c.eps_a() * c.solid_angle * c0_constant(c.material) * cl *
                       c.f_n * lambda * lambda;
  if (!(lever > 0.0)) throw DomainError("source produces no pseudo-field at this lambda");
  return {lambda, eta / std::sqrt(t_mea) / lever, c, eta, t_mea};
}

CouplingBound thermal_bound(const MaterialProperties& sensor, double bias_field,
                            double temperature, double q_factor,
                            const ExoticSourceConfig& config, double lambda, double t_mea) {
  if (!(sensor.rho_e() > 0.0)) throw DomainError("sensor material needs a spin density");
  if (!(bias_field > 0.0) || !(temperature > 0.0) || !(q_factor > 0.0))
    throw DomainError("bias field, temperature and Q must be positive");
  if (!(t_mea > 0.0)) throw DomainError("measurement time must be positive");
  const auto c = config.at_optimal_distance(lambda);
  c.validate();
  const double num = std::sqrt(constants.k_B * temperature) * std::pow(sensor.rho_m(), 0.75) *
                     sensitivity_prefactor_frequency();
  const double den = two_pi * c.eps_a() * c.solid_angle * c0_constant(c.material) *
                     c_lambda(c.l0, lambda) * lambda * lambda *
                     std::pow(constants.mu_B, 1.25) * std::sqrt(q_factor) *
                     std::pow(sensor.rho_e(), 1.25) * std::pow(bias_field, 0.25) *
                     std::sqrt(t_mea);
  // Sensor resonant at the source frequency; f_r cancels against f_n.
  const double eta = thermal_limit_sensitivity_fr(sensor, bias_field, c.f_n, temperature, q_factor);
  return {lambda, num / den, c, eta, t_mea};
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo)) throw DomainError("log grid needs 0 < lo < hi");
  if (n < 2) throw DomainError("log grid needs at least two points");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<CouplingBound> coupling_bound_curve(const ExoticSourceConfig& config,
                                                const std::vector<double>& lambdas,
                                                double eta, double t_mea, Exec exec) {
  std::vector<CouplingBound> out(lambdas.size(), CouplingBound{0, 0, config, eta, t_mea});
  parallel_for(static_cast<std::ptrdiff_t>(lambdas.size()), exec, [&](std::ptrdiff_t i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = coupling_bound(config, lambdas[k], eta, t_mea);
  });
  return out;
}

std::vector<CouplingBound> thermal_bound_curve(const MaterialProperties& sensor,
                                               double bias_field, double temperature,
                                               double q_factor,
                                               const ExoticSourceConfig& config,
                                               const std::vector<double>& lambdas,
                                               double t_mea, Exec exec) {
  std::vector<CouplingBound> out(lambdas.size(), CouplingBound{0, 0, config, 0, t_mea});
  parallel_for(static_cast<std::ptrdiff_t>(lambdas.size()), exec, [&](std::ptrdiff_t i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = thermal_bound(sensor, bias_field, temperature, q_factor, config, lambdas[k], t_mea);
  });
  return out;
}

}  // namespace fmto
