#pragma once

#include <numbers>
#include <string>
#include <utility>

namespace fmto {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// CODATA 2018 values, SI units.
struct PhysicalConstants {
  double k_B = 1.380649e-23;        // J/K
  double mu_B = 9.2740100783e-24;   // J/T
  double hbar = 1.054571817e-34;    // J s
  double c = 299792458.0;           // m/s
  double m_e = 9.1093837015e-31;    // kg
  double gamma_e = 1.76085963023e11;  // rad s^-1 T^-1, electron gyromagnetic ratio
  double mu_0 = 1.25663706212e-6;   // N/A^2
};

inline constexpr PhysicalConstants constants{};

/// Bulk material: mass density, electron spin density, nucleon density.
class MaterialProperties {
 public:
  MaterialProperties(std::string name, double rho_m, double rho_e, double rho_n);

  const std::string& name() const noexcept { return name_; }
  double rho_m() const noexcept { return rho_m_; }
  double rho_e() const noexcept { return rho_e_; }
  double rho_n() const noexcept { return rho_n_; }
  /// M = rho_e * mu_B, A/m.
  double magnetization() const noexcept { return rho_e_ * constants.mu_B; }

  /// NdFeB with M = rho_e mu_B (rho_e = 6e28 m^-3).
  static MaterialProperties ndfeb();
  /// NdFeB with rho_e back-derived from a 0.71 T remanence (mu_0 M).
  static MaterialProperties ndfeb_remanence();
  /// Bi4Ge3O12 nucleon source, rho_n = 4e30 m^-3.
  static MaterialProperties bgo();
  /// Look up "ndfeb", "ndfeb-remanence" or "bgo".
  static MaterialProperties preset(const std::string& name);

 private:
  std::string name_;
  double rho_m_;
  double rho_e_;
  double rho_n_;
};

/// Torsional mode of one levitated oscillator. Stiffness and resonant
/// frequency are kept consistent: one is always derived from the other.
class OscillatorParams {
 public:
  /// Unit oscillator: I = 1, mu = 1, Q = 1, f_res = 1 Hz.
  OscillatorParams();

  /// Stiffness k = moment * bias_field + k_offset; f_res derived.
  static OscillatorParams from_bias(double inertia, double moment, double q_factor,
                                    double bias_field, double k_offset = 0.0);
  /// Stiffness k = inertia (2 pi f_res)^2; bias_field = (k - k_offset)/moment.
  static OscillatorParams from_frequency(double inertia, double moment, double q_factor,
                                         double f_res, double k_offset = 0.0);

  double inertia() const noexcept { return inertia_; }
  double moment() const noexcept { return moment_; }
  double q_factor() const noexcept { return q_factor_; }
  double f_res() const noexcept { return f_res_; }
  double bias_field() const noexcept { return bias_field_; }
  double stiffness() const noexcept { return stiffness_; }
  double k_offset() const noexcept { return k_offset_; }

  double omega0() const noexcept { return two_pi * f_res_; }
  /// Inertia-normalized damping 2 pi f_r / Q, 1/s.
  double dissipation_rate() const noexcept { return omega0() / q_factor_; }
  /// Amplitude ring-down time Q/(pi f_r).
  double ringdown_time() const noexcept { return q_factor_ / (pi * f_res_); }

  OscillatorParams with_q(double q) const;

 private:
  OscillatorParams(double inertia, double moment, double q, double f_res, double bias,
                   double stiffness, double k_offset);

  double inertia_;
  double moment_;
  double q_factor_;
  double f_res_;
  double bias_field_;
  double stiffness_;
  double k_offset_;
};

double stiffness_from_bias(double moment, double bias_field, double k_offset = 0.0);

/// Torsional resonance of a uniformly magnetized sphere in a bias field.
double sphere_resonant_frequency(double radius, const MaterialProperties& material,
                                 double bias_field);
/// Inverse of sphere_resonant_frequency in the bias field.
double sphere_bias_for_frequency(double radius, const MaterialProperties& material,
                                 double f_res);
double sphere_inertia(double radius, const MaterialProperties& material);
double sphere_moment(double radius, const MaterialProperties& material);

enum class RotationAxis {
  longitudinal,  ///< about the cylinder's symmetry axis (m d^2 / 8)
  transverse,    ///< about a diameter through the center (m (3 r^2 + h^2) / 12)
};

struct InertiaAndMoment {
  double inertia;  // kg m^2
  double moment;   // A m^2
};

/// Magnet cylinder magnetized across its axis; extra_inertia lumps the rod,
/// mirror and levitation discs.
InertiaAndMoment cylinder_inertia_and_moment(double diameter, double height,
                                             const MaterialProperties& material,
                                             double extra_inertia,
                                             RotationAxis axis = RotationAxis::longitudinal);

}  // namespace fmto
