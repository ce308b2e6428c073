#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace relmode {

enum class ErrorCode {
  // symplectic core
  NotInfinitesimallySymplectic,
  IllConditionedSpectrum,
  KreinViolation,
  FrequencyNotInSpectrum,
  DegenerateForm,
  NotInvariant,
  DegenerateRestriction,
  InvalidSymplecticForm,
  // equivariance
  NotCanonicalAction,
  UnknownSubgroup,
  NonPeriodicGenerator,
  UnsupportedGroup,
  NotSimpleAction,
  // estimates
  NonIntegerBound,
  InvalidEstimateInput,
  // dynamics
  StepLimitExceeded,
  NonFiniteState,
  NotRelativeEquilibrium,
  DegenerateSplit,
  UnsupportedCase,
  // rpo search
  IndefiniteQuadraticForm,
  RadialToMaxOrder,
  EmptyLevelSet,
  RankDeficientConstraints,
  NoConvergence,
  NotMorse,
  BranchFold,
  MultiplierBlowup,
  ConvergedToRelativeEquilibrium,
  // models / cli
  InvalidPerturbation,
  InvalidParameter,
  UnknownModel,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace relmode
