#pragma once

#include <string>
#include <vector>

#include "fmto/core.hpp"
#include "fmto/optics.hpp"
#include "fmto/spectral.hpp"

namespace fmto {

/// Field-to-displacement transfer C_T(f), px/T, anchored at f_cal and
/// extended with the mechanical response shape.
struct TransferFunction {
  double c_at_cal;       // px/T
  double f_cal;          // Hz
  OscillatorParams params;
  double uncertainty = 0.0;  // relative, 1 sigma

  double operator()(double f) const;
};

struct CalibrationValue {
  double value;
  double uncertainty;  // relative, 1 sigma
};

/// sqrt(2 A_cal) / B_cal with first-order propagation of relative errors.
CalibrationValue transfer_from_calibration(double a_cal, double b_cal,
                                           double a_cal_rel_unc = 0.0,
                                           double b_cal_rel_unc = 0.0);

/// c_at_cal |chi(f)| / |chi(f_cal)|.
double extend_transfer(const TransferFunction& tf, double f);

/// 2 mu L |chi(f)| / l_c from the oscillator and readout geometry.
double theoretical_transfer(const OscillatorParams& params, const ReadoutGeometry& geometry,
                            double f);
TransferFunction theoretical_transfer_function(const OscillatorParams& params,
                                               const ReadoutGeometry& geometry, double f_cal);

enum class Provenance { measured, thermal_limit, measurement_floor };
std::string to_string(Provenance p);

struct SensitivityCurve {
  std::vector<double> frequencies;  // Hz
  std::vector<double> eta;          // T/sqrt(Hz)
  Provenance provenance = Provenance::measured;
  double uncertainty = 0.0;  // relative, 1 sigma

  std::size_t size() const noexcept { return eta.size(); }
};

/// eta(f) = sqrt(S_y(f)) / C_T(f) over the non-DC bins of the spectrum.
SensitivityCurve sensitivity_from_noise(const SpectrumEstimate& spectrum,
                                        const TransferFunction& tf,
                                        Provenance provenance = Provenance::measured);

/// sqrt(S_tau) / mu for an arbitrary oscillator; frequency independent.
double thermal_limit_sensitivity(const OscillatorParams& params, double temperature);

/// Sphere in a bias field, radius form.
double thermal_limit_sensitivity(const MaterialProperties& material, double radius,
                                 double bias_field, double temperature, double q_factor);

/// Sphere in a bias field, resonant-frequency form (radius eliminated).
double thermal_limit_sensitivity_fr(const MaterialProperties& material, double bias_field,
                                    double f_res, double temperature, double q_factor);

/// (3/pi)^(1/2) (2/5)^(1/4)
double sensitivity_prefactor_radius();
/// (2^7 3^2 pi^2 / 5^3)^(1/4)
double sensitivity_prefactor_frequency();

}  // namespace fmto
