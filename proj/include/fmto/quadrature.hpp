#pragma once

#include <functional>

namespace fmto {

struct QuadratureOptions {
  double rel_tol = 1e-8;
  double abs_tol = 0.0;
  int max_intervals = 2000;
};

struct QuadratureResult {
  double value;
  double error;  // estimated absolute error
  int intervals;
  int evaluations;
};

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature on [a, b]. Throws
/// NumericalError if the tolerance is not met within max_intervals.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& options = {});

}  // namespace fmto
