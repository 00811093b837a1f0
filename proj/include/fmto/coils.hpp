#pragma once

#include <span>
#include <vector>

#include "fmto/dynamics.hpp"

namespace fmto {

enum class Axis { x, y, z };

/// Two coaxial circular coils carrying co-directed currents.
struct CoilPair {
  int turns;          // per coil
  double diameter;    // m
  double separation;  // m, between coil planes
  Axis axis = Axis::x;

  void validate() const;

  /// 80 turns, 60 mm diameter, 38 mm apart.
  static CoilPair dc_bias();
  /// 5 turns, 50 mm diameter, 65 mm apart.
  static CoilPair ac_signal();
};

/// On-axis field per unit current at the midpoint, T/A.
double center_field_coefficient(const CoilPair& pair);

/// On-axis field per unit current at axial offsets from the midpoint, T/A.
std::vector<double> field_profile(const CoilPair& pair, std::span<const double> offsets);
double field_profile(const CoilPair& pair, double offset);

/// Largest relative deviation from the center value over |z| <= half_span.
double field_nonuniformity(const CoilPair& pair, double half_span, int samples = 201);

/// B(t) = coefficient * deviation_factor * I(t).
std::vector<double> signal_field(const CoilPair& pair, std::span<const double> current,
                                 double deviation_factor = 1.0);

/// Sinusoidal current of the given amplitude (A) as a field drive.
DriveSignal signal_drive(const CoilPair& pair, double current_amplitude, double frequency,
                         double deviation_factor = 1.0, double phase = 0.0);

/// Measured/theory ratio of the bias pair.
inline constexpr double dc_deviation_factor = 0.856;
/// Relative uncertainty carried on coil coefficients.
inline constexpr double coil_uncertainty = 0.15;

}  // namespace fmto
