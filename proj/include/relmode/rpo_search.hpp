#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relmode/constrained.hpp"
#include "relmode/dynamics.hpp"
#include "relmode/model.hpp"
#include "relmode/polynomial.hpp"

namespace relmode {

struct RadialityOptions {
  int k_max = 8;
  double tol_rad = 1e-6;
  double ray_radius = 0.1;   // t0: ray coefficients are fitted on t in [-t0, t0]
  int averaging_nodes = 32;  // trapezoid nodes for the S^1 average
  std::uint64_t seed = 7;
};

/// Taylor data of the S^1-averaged Hamiltonian on a fixed-point subspace, in the
/// subspace's orthonormal coordinates and normalized by Q(u) = 1.
struct TaylorAnalysis {
  Subspace subspace;
  Mat q;                       // Hessian of Q in subspace coordinates
  Mat circle_generator;        // full-space A_s / nu0
  std::vector<Mat> averaging;  // exp(theta_l A_s / nu0), full space
  std::vector<double> radial_coefficients;  // mean a_j on the Q-sphere, j = 0..k-1 (or k_max)
  std::vector<double> residuals;            // stdev of a_j on the sphere design, j = 0..k_max
  int k = -1;                  // first non-radial order, -1 when radial through max_order
  int max_order = 0;
  HomogeneousPolynomial hk;    // averaged h_k fitted in subspace coordinates
  std::vector<std::string> warnings;

  bool radial() const { return k < 0; }
  double h_k(const Vec& u) const { return hk(u); }
};

/// Averaged ray coefficients a_0..a_order of t -> avg_theta h(t exp(theta A_s/nu0) B u).
std::vector<double> averaged_ray_coefficients(const EquivariantHamiltonianModel& model, const TaylorAnalysis& a,
                                              const Vec& u, int order, double t0);

/// Non-throwing variant for reporting: k = -1 when radial through k_max.
/// Throws IndefiniteQuadraticForm.
TaylorAnalysis taylor_analysis(const EquivariantHamiltonianModel& model, const Subspace& s,
                               const Mat& circle_generator, const RadialityOptions& opts = {});

/// As taylor_analysis, but throws RadialToMaxOrder when no non-radial order is found.
TaylorAnalysis radiality_analysis(const EquivariantHamiltonianModel& model, const Subspace& s,
                                  const Mat& circle_generator, const RadialityOptions& opts = {});

/// One (isotropy, lambda) cell: subspace, momentum coordinates and the isotropy of lambda.
struct IsotropyCell {
  std::string isotropy = "e";
  std::vector<int> l_coords;   // g-indices of the momentum components constrained
  Vec lambda;                  // values on l_coords (scaled momentum J / Q)
  std::vector<Vec> l_lambda;   // coefficient vectors in g spanning the isotropy algebra of lambda
};

IsotropyCell make_cell(const LinearAction& action, const std::string& isotropy, const std::vector<int>& l_coords,
                       const Vec& lambda);

/// Constraint set Q = 1, J_l = lambda on the analysed subspace with objective h_k.
ConstrainedProblem objective_problem(const EquivariantHamiltonianModel& model, const TaylorAnalysis& a,
                                     const IsotropyCell& cell);

struct CriticalOrbit {
  Vec u;        // subspace coordinates
  Vec point;    // full-space embedding
  std::string isotropy;
  double value = 0.0;
  double c = 0.0;
  Vec multipliers;
  double constraint_residual = 0.0;
  double projected_gradient = 0.0;
  Vec hessian_spectrum;
  double min_abs_eigenvalue = 0.0;
  bool g_morse = false;
  bool degenerate = false;
  int multiplicity = 1;  // number of starts that landed on this orbit
};

struct SearchOptions {
  int n_starts = 0;  // 0: 64 * (reduced dimension + 1)
  std::uint64_t seed = 7;
  int jobs = 1;      // 1: serial reference path
  double dedup_tol = 1e-5;
  KktOptions kkt;
};

struct MorseReport {
  double min_abs = 0.0;
  bool g_morse = false;
  int reduced_dim = 0;
  Vec eigenvalues;
};

MorseReport morse_nondegeneracy_check(const ConstrainedProblem& p, const CriticalOrbit& orbit);

std::vector<CriticalOrbit> constrained_critical_orbits(const EquivariantHamiltonianModel& model,
                                                       const TaylorAnalysis& a, const IsotropyCell& cell,
                                                       const SearchOptions& opts = {});

/// Groups points by orbit under the problem's symmetry; degenerate points with equal values merge.
std::vector<CriticalOrbit> deduplicate_orbits(const ConstrainedProblem& p, std::vector<CriticalOrbit> orbits,
                                              double tol);

struct BranchSample {
  double r = 0.0;
  Vec v;      // full space
  Vec rho;    // subspace coordinates, v = r B rho
  Vec multipliers;  // Lambda(r, lambda)
  double c = 0.0;
  double q_residual = 0.0;  // |Q(v) - r^2|
  double j_residual = 0.0;  // ||J(v) - r^2 lambda||
  double energy = 0.0;      // h(v)
};

struct RpoBranch {
  CriticalOrbit seed;
  Vec lambda;
  std::vector<BranchSample> samples;
  double c_fit = 0.0;       // C in c - 1 = C x + D x^2, x = r^(k-2)
  double c_fit_residual = 0.0;
  double lambda_fit = 0.0;  // C in ||Lambda|| = C x + D x^2
  double lambda_fit_residual = 0.0;
  bool fold = false;
  bool multiplier_blowup = false;
  std::string status = "ok";
};

struct BranchOptions {
  double r_max = 0.2;
  int n_samples = 16;
  KktOptions kkt;
};

/// Averaged full Hamiltonian on the subspace, rescaled by rho = v / r.
struct BranchSurrogate {
  const EquivariantHamiltonianModel& model;
  const TaylorAnalysis& a;
  IsotropyCell cell;

  double hbar(const Vec& x) const;   // full-space average
  Vec grad_hbar(const Vec& x) const;
  ConstrainedProblem problem(double r) const;
  BranchSample sample(double r, const KktPoint& k) const;
};

/// Throws NotMorse unless the seed passes the Morse check.
RpoBranch branch_continuation(const EquivariantHamiltonianModel& model, const TaylorAnalysis& a,
                              const IsotropyCell& cell, const CriticalOrbit& orbit,
                              const BranchOptions& opts = {});

/// Branch point with averaged energy equal to `energy`, corrected from the nearest branch sample.
std::optional<BranchSample> branch_point_at_energy(const EquivariantHamiltonianModel& model,
                                                   const TaylorAnalysis& a, const IsotropyCell& cell,
                                                   const RpoBranch& branch, double energy,
                                                   const KktOptions& kkt = {});

struct ShootOptions {
  std::optional<double> energy;  // default h(m0)
  std::optional<Vec> momentum;   // default J(m0)
  double tol_residual = 1e-8;    // relative to the state scale
  int max_iterations = 40;
  int jobs = 1;
  double witness_tol = 1e-6;
  IntegratorConfig adaptive{Scheme::adaptive_explicit_order5, 1e-2, 1e-12, 1e-16, 5'000'000};
};

struct RpoCertificate {
  Vec m;
  double tau = 0.0;
  Vec xi;                 // drift, generator coefficients in g
  double residual = 0.0;  // ||exp(-tau xi) F_tau(m) - m||, adaptive scheme
  double residual_check = 0.0;  // same with the symplectic scheme
  double scale = 0.0;
  double energy = 0.0;
  Vec momentum;
  double energy_drift = 0.0;
  double witness = 0.0;   // max relative distance of X_h from the orbit tangent
  int iterations = 0;
  std::string isotropy = "e";
  std::string provenance;
};

/// Gauss-Newton shooting; unknowns m, tau and the drift coefficients over `algebra_basis`
/// (columns are coefficient vectors in g).
RpoCertificate shoot_rpo(const EquivariantHamiltonianModel& model, const Vec& m0, double tau0, const Vec& xi0,
                         const Mat& algebra_basis, const ShootOptions& opts = {});

struct DistinctOrbit {
  RpoCertificate representative;
  int multiplicity = 1;
};

std::vector<DistinctOrbit> distinct_orbits(const EquivariantHamiltonianModel& model,
                                           const std::vector<RpoCertificate>& certs, double tol = 1e-4);

/// Aligned trajectory distance between two certificates (infinity when momenta disagree).
double certificate_distance(const EquivariantHamiltonianModel& model, const RpoCertificate& a,
                            const RpoCertificate& b);

}  // namespace relmode
