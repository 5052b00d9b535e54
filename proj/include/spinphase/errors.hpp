#pragma once

#include <stdexcept>
#include <string>

namespace spinphase {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Matrix handed to vee() is not skew-symmetric within tolerance.
class NotSkewError : public Error {
 public:
  using Error::Error;
};

/// Matrix is singular or orientation-reversing where a proper rotation is
/// required.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Symmetric matrix expected to be positive definite is not.
class NotPositiveDefiniteError : public Error {
 public:
  using Error::Error;
};

/// Particle set lies on a line through the origin; its inertia tensor is
/// singular.
class CollinearError : public Error {
 public:
  using Error::Error;
};

/// Particle positions do not satisfy the center-of-mass constraint.
class NotCenteredError : public Error {
 public:
  using Error::Error;
};

/// Scale factor of a conformally scaled inertia model is not positive.
class NonPositiveScaleError : public Error {
 public:
  using Error::Error;
};

/// A principal moment of a diagonal time-varying model is not positive.
class NonPositiveMomentError : public Error {
 public:
  using Error::Error;
};

/// Tabulated samples are not strictly increasing in time.
class UnsortedSamplesError : public Error {
 public:
  using Error::Error;
};

/// Integration diagnostics exceeded their failure thresholds.
class NumericalFailureError : public Error {
 public:
  using Error::Error;
};

/// Requested time does not coincide with a trajectory node.
class NotANodeError : public Error {
 public:
  using Error::Error;
};

/// Curve segment is not simple (it crosses itself).
class NotSimpleError : public Error {
 public:
  using Error::Error;
};

/// Curve segment endpoints are farther apart than the closure tolerance.
class NotClosedError : public Error {
 public:
  using Error::Error;
};

/// Relative rotation does not fix the spatial momentum axis within tolerance.
class AxisMismatchError : public Error {
 public:
  using Error::Error;
};

/// Model is not diagonal with strictly ordered moments where that is required.
class NotDiagonalOrderedError : public Error {
 public:
  using Error::Error;
};

/// Requested a regime-specific bound outside its regime of validity.
class RegimeNotApplicableError : public Error {
 public:
  using Error::Error;
};

/// Curve is degenerate (e.g. its mean direction vanishes) so no reference
/// disc can be chosen.
class DegenerateCurveError : public Error {
 public:
  using Error::Error;
};

/// Reparameterization rate of an analytic solution vanishes at the initial
/// time.
class DegenerateRateError : public Error {
 public:
  using Error::Error;
};

/// Scenario configuration is malformed or inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read, parsed, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace spinphase
