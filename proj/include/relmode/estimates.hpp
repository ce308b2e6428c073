#pragma once

#include <optional>
#include <string>
#include <vector>

namespace relmode {

enum class TheoremTag { Equilibrium, Spatiotemporal, RelativeEquilibrium };

std::string to_string(TheoremTag tag);

struct RpoEstimate {
  TheoremTag theorem = TheoremTag::Equilibrium;
  std::string isotropy;
  std::vector<double> momentum;  // lambda, or (rho_H weight, chi) for spatiotemporal rows
  int dimensional_bound = 0;
  std::optional<int> euler_bound;  // only for 0-dimensional reduced spaces
  int reduced_space_dim = 0;
  std::string branch = "dimensional";  // which branch of the max produced the bound
  std::vector<std::string> warnings;
};

RpoEstimate ls_estimate_equilibrium(int dimUK, int dimL, int dimLlambda);
RpoEstimate ls_estimate_spatiotemporal(int dimUH, int dimNGK, int dimNrho_chi, int dimK);
RpoEstimate ls_estimate_relative_equilibrium(int dimUH, int dimNGmK, int dimK);

}  // namespace relmode
