#include "fmto/core.hpp"

#include <cmath>

#include "fmto/error.hpp"

namespace fmto {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive");
}

void require_non_negative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be >= 0");
}

}  // namespace

MaterialProperties::MaterialProperties(std::string name, double rho_m, double rho_e,
                                       double rho_n)
    : name_(std::move(name)), rho_m_(rho_m), rho_e_(rho_e), rho_n_(rho_n) {
  require_positive(rho_m, "mass density");
  require_non_negative(rho_e, "electron spin density");
  require_non_negative(rho_n, "nucleon density");
}

MaterialProperties MaterialProperties::ndfeb() { return {"ndfeb", 7430.0, 6e28, 0.0}; }

MaterialProperties MaterialProperties::ndfeb_remanence() {
  const double m = 0.71 / constants.mu_0;
  return {"ndfeb-remanence", 7430.0, m / constants.mu_B, 0.0};
}

MaterialProperties MaterialProperties::bgo() { return {"bgo", 7130.0, 0.0, 4e30}; }

MaterialProperties MaterialProperties::preset(const std::string& name) {
  if (name == "ndfeb") return ndfeb();
  if (name == "ndfeb-remanence") return ndfeb_remanence();
  if (name == "bgo") return bgo();
  throw DomainError("unknown material preset '" + name + "'");
}

OscillatorParams::OscillatorParams(double inertia, double moment, double q, double f_res,
                                   double bias, double stiffness, double k_offset)
    : inertia_(inertia),
      moment_(moment),
      q_factor_(q),
      f_res_(f_res),
      bias_field_(bias),
      stiffness_(stiffness),
      k_offset_(k_offset) {}

OscillatorParams::OscillatorParams()
    : OscillatorParams(1.0, 1.0, 1.0, 1.0, two_pi * two_pi, two_pi * two_pi, 0.0) {}

OscillatorParams OscillatorParams::from_bias(double inertia, double moment, double q_factor,
                                             double bias_field, double k_offset) {
  require_positive(inertia, "inertia");
  require_positive(moment, "magnetic moment");
  require_positive(q_factor, "Q factor");
  const double k = stiffness_from_bias(moment, bias_field, k_offset);
  require_positive(k, "stiffness");
  const double f = std::sqrt(k / inertia) / two_pi;
  return {inertia, moment, q_factor, f, bias_field, k, k_offset};
}

OscillatorParams OscillatorParams::from_frequency(double inertia, double moment,
                                                  double q_factor, double f_res,
                                                  double k_offset) {
  require_positive(inertia, "inertia");
  require_positive(moment, "magnetic moment");
  require_positive(q_factor, "Q factor");
  require_positive(f_res, "resonant frequency");
  require_non_negative(k_offset, "k_offset");
  const double w = two_pi * f_res;
  const double k = inertia * w * w;
  const double bias = (k - k_offset) / moment;
  if (bias < 0.0) throw DomainError("k_offset exceeds the stiffness implied by f_res");
  return {inertia, moment, q_factor, f_res, bias, k, k_offset};
}

OscillatorParams OscillatorParams::with_q(double q) const {
  require_positive(q, "Q factor");
  OscillatorParams p = *this;
  p.q_factor_ = q;
  return p;
}

double stiffness_from_bias(double moment, double bias_field, double k_offset) {
  require_positive(moment, "magnetic moment");
  require_non_negative(bias_field, "bias field");
  require_non_negative(k_offset, "k_offset");
  return moment * bias_field + k_offset;
}

double sphere_inertia(double radius, const MaterialProperties& material) {
  require_positive(radius, "radius");
  return (8.0 * pi / 15.0) * material.rho_m() * std::pow(radius, 5);
}

double sphere_moment(double radius, const MaterialProperties& material) {
  require_positive(radius, "radius");
  return (4.0 * pi / 3.0) * material.magnetization() * radius * radius * radius;
}

double sphere_resonant_frequency(double radius, const MaterialProperties& material,
                                 double bias_field) {
  require_positive(radius, "radius");
  require_positive(bias_field, "bias field");
  require_positive(material.rho_e(), "electron spin density");
  return std::sqrt(10.0) / (4.0 * pi) * std::sqrt(material.magnetization() * bias_field /
                                                  material.rho_m()) / radius;
}

double sphere_bias_for_frequency(double radius, const MaterialProperties& material,
                                 double f_res) {
  require_positive(radius, "radius");
  require_positive(f_res, "resonant frequency");
  require_positive(material.rho_e(), "electron spin density");
  const double s = f_res * radius * 4.0 * pi / std::sqrt(10.0);
  return s * s * material.rho_m() / material.magnetization();
}

InertiaAndMoment cylinder_inertia_and_moment(double diameter, double height,
                                             const MaterialProperties& material,
                                             double extra_inertia, RotationAxis axis) {
  require_positive(diameter, "diameter");
  require_positive(height, "height");
  require_non_negative(extra_inertia, "extra inertia");
  const double r = 0.5 * diameter;
  const double volume = pi * r * r * height;
  const double mass = material.rho_m() * volume;
  const double own = axis == RotationAxis::longitudinal
                         ? 0.5 * mass * r * r
                         : mass * (3.0 * r * r + height * height) / 12.0;
  return {own + extra_inertia, material.magnetization() * volume};
}

}  // namespace fmto
