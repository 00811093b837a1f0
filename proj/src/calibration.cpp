#include "fmto/calibration.hpp"

#include <cmath>

#include "fmto/dynamics.hpp"
#include "fmto/error.hpp"

namespace fmto {

double TransferFunction::operator()(double f) const { return extend_transfer(*this, f); }

CalibrationValue transfer_from_calibration(double a_cal, double b_cal, double a_unc,
                                           double b_unc) {
  if (!(a_cal > 0.0)) throw DomainError("calibration peak area must be positive");
  if (!(b_cal > 0.0)) throw DomainError("calibration field must be positive");
  if (!(a_unc >= 0.0) || !(b_unc >= 0.0)) throw DomainError("uncertainties must be >= 0");
  // sqrt halves the relative error of the area.
  return {std::sqrt(2.0 * a_cal) / b_cal, std::hypot(0.5 * a_unc, b_unc)};
}

double extend_transfer(const TransferFunction& tf, double f) {
  if (!(f >= 0.0)) throw DomainError("frequency must be >= 0");
  if (!(tf.c_at_cal > 0.0)) throw DomainError("transfer function must be positive");
  if (f == tf.f_cal) return tf.c_at_cal;
  return tf.c_at_cal * std::abs(susceptibility(f, tf.params)) /
         std::abs(susceptibility(tf.f_cal, tf.params));
}

double theoretical_transfer(const OscillatorParams& params, const ReadoutGeometry& geometry,
                            double f) {
  return params.moment() * geometry.lever_gain() * std::abs(susceptibility(f, params));
}

TransferFunction theoretical_transfer_function(const OscillatorParams& params,
                                               const ReadoutGeometry& geometry,
                                               double f_cal) {
  return {theoretical_transfer(params, geometry, f_cal), f_cal, params, 0.0};
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::measured: return "measured";
    case Provenance::thermal_limit: return "thermal-limit";
    case Provenance::measurement_floor: return "measurement-floor";
  }
  return "unknown";
}

SensitivityCurve sensitivity_from_noise(const SpectrumEstimate& s, const TransferFunction& tf,
                                        Provenance provenance) {
  SensitivityCurve out;
  out.provenance = provenance;
  out.uncertainty = tf.uncertainty;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double f = s.frequencies[k];
    if (!(f > 0.0) || !(s.psd[k] > 0.0)) continue;
    out.frequencies.push_back(f);
    out.eta.push_back(std::sqrt(s.psd[k]) / extend_transfer(tf, f));
  }
  return out;
}

double thermal_limit_sensitivity(const OscillatorParams& params, double temperature) {
  return std::sqrt(thermal_torque_psd(params, temperature)) / params.moment();
}

double sensitivity_prefactor_radius() {
  return std::sqrt(3.0 / pi) * std::pow(2.0 / 5.0, 0.25);
}

double sensitivity_prefactor_frequency() {
  return std::pow(128.0 * 9.0 * pi * pi / 125.0, 0.25);
}

namespace {

void check_sphere(const MaterialProperties& m, double b, double t, double q) {
  if (!(m.rho_e() > 0.0)) throw DomainError("material needs a nonzero spin density");
  if (!(b > 0.0)) throw DomainError("bias field must be positive");
  if (!(t > 0.0)) throw DomainError("temperature must be positive");
  if (!(q > 0.0)) throw DomainError("Q factor must be positive");
}

}  // namespace

double thermal_limit_sensitivity(const MaterialProperties& m, double radius, double b,
                                 double t, double q) {
  check_sphere(m, b, t, q);
  if (!(radius > 0.0)) throw DomainError("radius must be positive");
  return sensitivity_prefactor_radius() * std::sqrt(constants.k_B * t) *
         std::pow(m.magnetization(), -0.75) * std::pow(m.rho_m(), 0.25) / std::sqrt(q) *
         std::pow(b, 0.25) / radius;
}

double thermal_limit_sensitivity_fr(const MaterialProperties& m, double b, double f_res,
                                    double t, double q) {
  check_sphere(m, b, t, q);
  if (!(f_res > 0.0)) throw DomainError("resonant frequency must be positive");
  return sensitivity_prefactor_frequency() * std::sqrt(constants.k_B * t) *
         std::pow(m.magnetization(), -1.25) * std::pow(m.rho_m(), 0.75) / std::sqrt(q) *
         std::pow(b, -0.25) * f_res;
}

}  // namespace fmto
