#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fmto {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inputs valid individually but violating an operation's preconditions
/// (too short, too coarse, out of band).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Iterative method failed; what() carries the diagnostics.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Result would be computed but is known to be biased (closed form outside
/// its regime, calibration band on the resonance). Raised only under
/// WarningPolicy::raise.
class RegimeWarning : public Error {
 public:
  using Error::Error;
};

class TrackingError : public Error {
 public:
  TrackingError(const std::string& what, std::size_t frame)
      : Error(what + " (frame " + std::to_string(frame) + ")"), frame_(frame) {}
  std::size_t frame() const noexcept { return frame_; }

 private:
  std::size_t frame_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

enum class WarningPolicy { raise, ignore };

}  // namespace fmto
