#include "fmto/coils.hpp"

#include <algorithm>
#include <cmath>

#include "fmto/error.hpp"

namespace fmto {

void CoilPair::validate() const {
  if (turns < 1) throw DomainError("coil needs at least one turn");
  if (!(diameter > 0.0)) throw DomainError("coil diameter must be positive");
  if (!(separation > 0.0)) throw DomainError("coil separation must be positive");
}

CoilPair CoilPair::dc_bias() { return {80, 60e-3, 38e-3, Axis::z}; }
CoilPair CoilPair::ac_signal() { return {5, 50e-3, 65e-3, Axis::x}; }

double field_profile(const CoilPair& pair, double z) {
  pair.validate();
  const double a = 0.5 * pair.diameter;
  const double h = 0.5 * pair.separation;
  auto loop = [&](double dz) {
    return 0.5 * constants.mu_0 * pair.turns * a * a / std::pow(a * a + dz * dz, 1.5);
  };
  return loop(z - h) + loop(z + h);
}

double center_field_coefficient(const CoilPair& pair) { return field_profile(pair, 0.0); }

std::vector<double> field_profile(const CoilPair& pair, std::span<const double> offsets) {
  std::vector<double> out;
  out.reserve(offsets.size());
  for (double z : offsets) out.push_back(field_profile(pair, z));
  return out;
}

double field_nonuniformity(const CoilPair& pair, double half_span, int samples) {
  if (!(half_span >= 0.0)) throw DomainError("half span must be >= 0");
  if (samples < 2) throw DomainError("need at least two samples");
  const double b0 = center_field_coefficient(pair);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double z = -half_span + 2.0 * half_span * i / (samples - 1);
    worst = std::max(worst, std::abs(field_profile(pair, z) / b0 - 1.0));
  }
  return worst;
}

std::vector<double> signal_field(const CoilPair& pair, std::span<const double> current,
                                 double deviation_factor) {
  const double k = center_field_coefficient(pair) * deviation_factor;
  std::vector<double> out(current.size());
  std::transform(current.begin(), current.end(), out.begin(), [k](double i) { return k * i; });
  return out;
}

DriveSignal signal_drive(const CoilPair& pair, double current_amplitude, double frequency,
                         double deviation_factor, double phase) {
  return DriveSignal::sinusoid(
      center_field_coefficient(pair) * deviation_factor * current_amplitude, frequency, phase);
}

}  // namespace fmto
