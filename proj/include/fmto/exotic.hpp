#pragma once

#include <vector>

#include "fmto/core.hpp"
#include "fmto/error.hpp"
#include "fmto/parallel.hpp"
#include "fmto/quadrature.hpp"

namespace fmto {

/// (l0^2/lambda^2 + 2 l0/lambda) exp(-l0/lambda); peaks at l0 = sqrt(2) lambda.
double c_lambda(double l0, double lambda);

/// hbar rho_n / (4 pi m_e c gamma_e).
double c0_constant(const MaterialProperties& material,
                   const PhysicalConstants& k = constants);

/// Vibrating shell-sector nucleon source facing the sensor.
struct ExoticSourceConfig {
  double solid_angle;  // sr
  double l0;           // inner radius, m
  double lm;           // outer radius, m
  double amplitude;    // vibration amplitude A_n, m
  double f_n;          // vibration frequency, Hz
  MaterialProperties material = MaterialProperties::bgo();

  double eps_a() const noexcept { return amplitude / l0; }
  /// v_n = 2 pi f_n A_n.
  double velocity() const noexcept;
  /// Throws DomainError on invalid geometry or eps_A > 0.2.
  void validate() const;
  /// eps_A above 0.1: the small-amplitude expansion is getting coarse.
  bool large_amplitude() const noexcept { return eps_a() > 0.1; }

  /// Omega = 1e-2 sr, l0 = 7.5 mm, lm = 1 m, A_n = 1.5 mm, f_n = 4.99 Hz, BGO.
  static ExoticSourceConfig reference();
  /// Same source moved to l0 = sqrt(2) lambda at fixed eps_A.
  ExoticSourceConfig at_optimal_distance(double lambda) const;
};

struct CouplingBound {
  double lambda;       // m
  double delta_f45;
  ExoticSourceConfig config;
  double sensitivity;  // T/sqrt(Hz)
  double t_mea;        // s
};

/// Closed-form pseudo-field amplitude, valid for lm - l0 >= 7 lambda (a
/// shorter shell is a RegimeWarning).
double pseudo_field_closed(const ExoticSourceConfig& config, double lambda, double f45,
                           WarningPolicy policy = WarningPolicy::raise);

/// Radial integral of the pseudo-field over the finite shell, by adaptive
/// quadrature.
double pseudo_field_numeric(const ExoticSourceConfig& config, double lambda, double f45,
                            const QuadratureOptions& options = {});

/// numeric / closed for the finite shell, analytically.
double shell_truncation_ratio(const ExoticSourceConfig& config, double lambda);

/// Delta f = eta T_mea^(-1/2) / (2 pi eps_A Omega C0 C_lambda f_n lambda^2).
CouplingBound coupling_bound(const ExoticSourceConfig& config, double lambda, double eta,
                             double t_mea);

/// Thermal-noise-limited bound for a sphere driven at its own resonance
/// (f_n = f_r) with the source at l0 = sqrt(2) lambda; eps_A and Omega come
/// from config. The sphere radius drops out.
CouplingBound thermal_bound(const MaterialProperties& sensor, double bias_field,
                            double temperature, double q_factor,
                            const ExoticSourceConfig& config, double lambda, double t_mea);

/// n log-spaced points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int n);

std::vector<CouplingBound> coupling_bound_curve(const ExoticSourceConfig& config,
                                                const std::vector<double>& lambdas,
                                                double eta, double t_mea,
                                                Exec exec = Exec::parallel);

std::vector<CouplingBound> thermal_bound_curve(const MaterialProperties& sensor,
                                               double bias_field, double temperature,
                                               double q_factor,
                                               const ExoticSourceConfig& config,
                                               const std::vector<double>& lambdas,
                                               double t_mea, Exec exec = Exec::parallel);

}  // namespace fmto
