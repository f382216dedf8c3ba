#pragma once

#include <stdexcept>
#include <string>

namespace perfeq {

class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define PERFEQ_ERROR(Name)                                          \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(#Name, what) {}  \
  };

PERFEQ_ERROR(ParseError)
PERFEQ_ERROR(InvalidArgument)
PERFEQ_ERROR(InvariantViolation)
PERFEQ_ERROR(ShapeMismatch)
PERFEQ_ERROR(SetTooLarge)
PERFEQ_ERROR(UndeterminedByBase)
PERFEQ_ERROR(InvalidBase)
PERFEQ_ERROR(NegativeMass)
PERFEQ_ERROR(IncompatibleTails)
PERFEQ_ERROR(NonMeasurableMap)
PERFEQ_ERROR(PlayerCountUnsupported)
PERFEQ_ERROR(NoApproximant)
PERFEQ_ERROR(MissingTailBound)
PERFEQ_ERROR(InvalidK)
PERFEQ_ERROR(NotDiffuse)
PERFEQ_ERROR(MassOutOfRange)
PERFEQ_ERROR(ArityMismatch)
PERFEQ_ERROR(UncertifiableInput)
PERFEQ_ERROR(NotApplicable)
PERFEQ_ERROR(UnknownScenario)

#undef PERFEQ_ERROR

/// Raised when best-response iteration fails; carries the smallest residual seen.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, std::string residual)
      : Error("NonConvergence", what), residual_(std::move(residual)) {}
  const std::string& residual() const noexcept { return residual_; }

 private:
  std::string residual_;
};

}  // namespace perfeq
