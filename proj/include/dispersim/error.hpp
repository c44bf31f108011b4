#pragma once

#include <stdexcept>
#include <string>

namespace dispersim {

/// Bad input: malformed config, invalid material, out-of-range argument.
/// The CLI maps these to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation could not produce a trustworthy result.
/// The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IllConditionedElement : public NumericalError {
 public:
  IllConditionedElement(const std::string& what, double condition)
      : NumericalError(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class IllConditionedFit : public NumericalError {
 public:
  IllConditionedFit(const std::string& what, double f_lo_hz, double f_hi_hz)
      : NumericalError(what), f_lo_hz_(f_lo_hz), f_hi_hz_(f_hi_hz) {}
  double band_lo_hz() const noexcept { return f_lo_hz_; }
  double band_hi_hz() const noexcept { return f_hi_hz_; }

 private:
  double f_lo_hz_;
  double f_hi_hz_;
};

class UnstableModel : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoPropagation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class PaddingError : public NumericalError {
 public:
  PaddingError(const std::string& what, std::size_t suggested_samples)
      : NumericalError(what), suggested_(suggested_samples) {}
  std::size_t suggested_samples() const noexcept { return suggested_; }

 private:
  std::size_t suggested_;
};

class NoArrival : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UnreliablePair : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BranchAmbiguity : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoOverlap : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace dispersim
