#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "relmode/linalg.hpp"

namespace relmode {

/// Critical points of f on {Q(u) = q_level, J_i(u) = lambda_i} with quadratic Q and J.
struct ConstrainedProblem {
  int dim = 0;
  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&)> grad_f;
  std::function<Mat(const Vec&)> hess_f;
  Mat q;                 // Q(u) = 1/2 u^T q u
  double q_level = 1.0;
  std::vector<Mat> j;    // J_i(u) = u^T M_i u
  Vec lambda;
  std::vector<Mat> symmetry;  // generators of the group preserving f and the constraints

  int n_constraints() const { return 1 + static_cast<int>(j.size()); }
  double Q(const Vec& u) const { return 0.5 * u.dot(q * u); }
  Vec J(const Vec& u) const;
  Vec constraint_residual(const Vec& u) const;
  /// Rows dQ, dJ_i.
  Mat constraint_jacobian(const Vec& u) const;
};

struct KktOptions {
  int max_iterations = 300;
  double tolerance = 1e-13;
  double constraint_tol = 1e-10;
  double gradient_tol = 1e-8;
};

struct KktPoint {
  Vec u;
  double c = 0.0;
  Vec multipliers;  // Lambda
  double kkt_residual = 0.0;
  double constraint_residual = 0.0;
  double projected_gradient = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Newton-type feasibility projection (minimum-norm steps); nullopt on failure.
std::optional<Vec> project_to_constraints(const ConstrainedProblem& p, const Vec& u0, int max_iterations = 100);

/// Least-squares multipliers for grad f = c dQ + sum Lambda_i dJ_i; returns the residual norm.
double least_squares_multipliers(const ConstrainedProblem& p, const Vec& u, const Vec& grad, double& c,
                                 Vec& multipliers);

/// Levenberg-Marquardt on the KKT system from a feasible (or near-feasible) start.
KktPoint solve_kkt(const ConstrainedProblem& p, const Vec& u0, const KktOptions& opts = {});

/// Directions from a Cranley-Patterson rotated Halton sequence mapped through the normal
/// quantile, deterministic in (dim, count, seed).
std::vector<Vec> halton_starts(int dim, int count, std::uint64_t seed);

/// Per-start projection + KKT solve. Slot i holds the result of start i, or nullopt.
std::vector<std::optional<KktPoint>> multistart_serial(const ConstrainedProblem& p, const std::vector<Vec>& starts,
                                                       const KktOptions& opts = {});
std::vector<std::optional<KktPoint>> multistart_parallel(const ConstrainedProblem& p,
                                                         const std::vector<Vec>& starts,
                                                         const KktOptions& opts = {}, int jobs = 0);

/// min over group parameters of ||g(t) a - b||, g(t) = prod_k exp(t_k X_k), generators of period 2 pi.
double orbit_distance(const std::vector<Mat>& generators, const Vec& a, const Vec& b, Vec* best = nullptr);

struct ReducedHessian {
  Vec eigenvalues;        // Lagrangian Hessian on (constraint tangent) minus (orbit tangent)
  int tangent_dim = 0;
  int orbit_dim = 0;
  double min_abs = 0.0;   // +inf when the reduced space is a point
  double scale = 0.0;
};

ReducedHessian reduced_hessian(const ConstrainedProblem& p, const KktPoint& point);

}  // namespace relmode
