#pragma once

#include <stdexcept>
#include <string>

namespace pnrqkd {

// Root of every error the library throws.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
  public:
    using Error::Error;
};

// The lowest noise probability N(y=0) is zero, so the triangular system has no inverse.
class SingularDeconvolution : public Error {
  public:
    using Error::Error;
};

// Setup violates eta_det * (1 - eta_bs) = eta_bs beyond the configured tolerance.
class CalibrationError : public Error {
  public:
    using Error::Error;
};

class UnsupportedForCustom : public Error {
  public:
    using Error::Error;
};

class CapacityError : public Error {
  public:
    using Error::Error;
};

// The decoy-state denominator a1U*a2pL - a1pL*a2U is not positive.
class DegenerateBounds : public Error {
  public:
    using Error::Error;
};

// 1 - Delta - eps <= 0: no guaranteed untagged fraction remains.
class NoUntaggedGuarantee : public Error {
  public:
    using Error::Error;
};

class PreconditionError : public Error {
  public:
    using Error::Error;
};

class DegenerateDetector : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

}  // namespace pnrqkd
