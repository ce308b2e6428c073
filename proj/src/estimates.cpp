#include "relmode/estimates.hpp"

#include "relmode/errors.hpp"

namespace relmode {

std::string to_string(TheoremTag tag) {
  switch (tag) {
    case TheoremTag::Equilibrium: return "Equilibrium";
    case TheoremTag::Spatiotemporal: return "Spatiotemporal";
    case TheoremTag::RelativeEquilibrium: return "RelativeEquilibrium";
  }
  return "Unknown";
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidEstimateInput, what);
}

// numerator must be even; negative halves clamp to 0
int half_bound(int numerator, RpoEstimate& e) {
  if (numerator % 2 != 0) {
    throw Error(ErrorCode::NonIntegerBound, "half-sum " + std::to_string(numerator) + "/2 is not an integer");
  }
  if (numerator < 0) {
    e.warnings.push_back("negative dimensional bound clamped to 0");
    return 0;
  }
  return numerator / 2;
}

void finish(RpoEstimate& e, int reduced) {
  e.reduced_space_dim = reduced < 0 ? 0 : reduced;
  if (reduced == 0) {
    e.euler_bound = e.dimensional_bound;
    e.branch = "dimensional=euler";
  }
}

}  // namespace

RpoEstimate ls_estimate_equilibrium(int dimUK, int dimL, int dimLlambda) {
  require(dimUK >= 0 && dimUK % 2 == 0, "dim U^K must be even and nonnegative");
  require(dimL >= 0 && dimLlambda >= 0 && dimLlambda <= dimL, "need 0 <= dim L_lambda <= dim L");
  RpoEstimate e;
  e.theorem = TheoremTag::Equilibrium;
  e.dimensional_bound = half_bound(dimUK - dimL - dimLlambda, e);
  finish(e, dimUK - dimL - dimLlambda - 2);
  return e;
}

RpoEstimate ls_estimate_spatiotemporal(int dimUH, int dimNGK, int dimNrho_chi, int dimK) {
  require(dimUH >= 0 && dimUH % 2 == 0, "dim U^H must be even and nonnegative");
  require(dimK >= 0 && dimK <= dimNGK && dimNrho_chi >= 0, "need 0 <= dim K <= dim N(K)");
  RpoEstimate e;
  e.theorem = TheoremTag::Spatiotemporal;
  const int num = dimUH - dimNGK - dimNrho_chi + 2 * dimK;
  e.dimensional_bound = half_bound(num, e);
  finish(e, num - 2);
  return e;
}

RpoEstimate ls_estimate_relative_equilibrium(int dimUH, int dimNGmK, int dimK) {
  require(dimUH >= 0 && dimUH % 2 == 0, "dim U^H must be even and nonnegative");
  require(dimK >= 0 && dimK <= dimNGmK, "need 0 <= dim K <= dim N(K)");
  RpoEstimate e;
  e.theorem = TheoremTag::RelativeEquilibrium;
  const int num = dimUH - 2 * dimNGmK + 2 * dimK;
  e.dimensional_bound = half_bound(num, e);
  finish(e, num - 2);
  return e;
}

}  // namespace relmode
