#pragma once

#include <stdexcept>
#include <string>

namespace squidres {

/// Base class for physical-model validity violations (the lumped SQUID
/// expansion has a limited domain; callers can catch this to flag a point
/// instead of aborting a sweep).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The applied flux is so close to a half-integer number of flux quanta that
/// the first-order inductance expansion diverges.
class FluxTooCloseToHalfQuantum : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Requested SQUID current at or above the effective critical current.
class CurrentExceedsCritical : public ModelError {
 public:
  using ModelError::ModelError;
};

/// SQUID participation ratio reached or exceeded 1; the device description is
/// outside the lumped-element model's domain.
class EpsilonOutOfRange : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Base class for inverse-problem failures.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No usable resonance peak inside the fitted frequency window (missing
/// half-power crossings, too few points, monotone data, ...).
class NoPeakInWindow : public FitError {
 public:
  using FitError::FitError;
};

/// Two comparable peaks (within 6 dB) in the window; refusing to pick one.
class AmbiguousPeak : public NoPeakInWindow {
 public:
  using NoPeakInWindow::NoPeakInWindow;
};

/// Flux-tuning dataset does not constrain the fit (too few points or the
/// flux values cover too little of a flux period).
class InsufficientFluxSpan : public FitError {
 public:
  using FitError::FitError;
};

/// Malformed CSV input; message carries "path:line:".
class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid device configuration document.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace squidres
