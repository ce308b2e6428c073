#pragma once

#include <vector>

#include "relmode/linalg.hpp"

namespace relmode {

/// A real symplectic vector space (R^dim, omega) with omega(u, v) = u^T Omega v.
///
/// Hamiltonian vector fields follow i_X omega = dh, which for the canonical form
/// gives X = (dh/dp, -dh/dq).
class SymplecticSpace {
 public:
  static SymplecticSpace canonical(int dim);
  /// Validates antisymmetry (1e-12) and nondegeneracy (sigma_min > 1e-10 sigma_max).
  static SymplecticSpace from_matrix(const Mat& omega);

  int dim() const { return static_cast<int>(omega_.rows()); }
  const Mat& omega() const { return omega_; }

  double pairing(const Vec& u, const Vec& v) const { return u.dot(omega_ * v); }

  /// X = Omega^{-T} grad.
  Vec hamiltonian_vector(const Vec& grad) const { return sharp_ * grad; }
  /// Linear Hamiltonian vector field of v -> 1/2 v^T S v.
  Mat hamiltonian_matrix(const Mat& hessian) const { return sharp_ * hessian; }
  const Mat& sharp() const { return sharp_; }

 private:
  explicit SymplecticSpace(Mat omega);
  Mat omega_;
  Mat sharp_;  // Omega^{-T}
};

struct Subspace {
  Subspace() = default;
  /// Orthonormalizes the given columns.
  explicit Subspace(const Mat& spanning, double rel_tol = 1e-10);
  static Subspace whole(int dim);

  int parent_dim() const { return static_cast<int>(basis.rows()); }
  int dim() const { return static_cast<int>(basis.cols()); }
  Vec embed(const Vec& coords) const { return basis * coords; }
  Vec coordinates(const Vec& v) const { return basis.transpose() * v; }

  Mat basis;
};

enum class Definiteness { positive, negative, indefinite };

/// Q(v) = 1/2 v^T S v with S symmetric.
struct QuadraticForm {
  explicit QuadraticForm(const Mat& hessian);

  double operator()(const Vec& v) const { return 0.5 * v.dot(hessian * v); }
  Vec gradient(const Vec& v) const { return hessian * v; }
  bool definite() const { return definiteness != Definiteness::indefinite; }

  Mat hessian;
  Definiteness definiteness;
};

struct EigenCluster {
  Complex value;     // centroid
  int multiplicity;
  CMat projector;    // spectral projector onto the generalized eigenspace
};

struct LinearHamiltonianMap {
  SymplecticSpace space;
  Mat a;
  Mat semisimple;
  Mat nilpotent;
  std::vector<EigenCluster> clusters;
  double cluster_tolerance = 0.0;  // absolute tolerance actually used
};

struct JordanOptions {
  double cluster_rel_tol = 1e-8;
  /// Escalation ceiling for clusters split by defective (Jordan) structure.
  double max_cluster_rel_tol = 1e-4;
  int contour_points = 128;
};

LinearHamiltonianMap jordan_chevalley(const Mat& a, const SymplecticSpace& space,
                                      const JordanOptions& opts = {});

/// Q_A(v) = 1/2 omega(Av, v).
QuadraticForm quadratic_form_of(const Mat& a, const SymplecticSpace& space);

struct KreinReport {
  bool definite = false;
  bool spectrum_imaginary = false;
  bool semisimple = false;
};

KreinReport krein_check(const QuadraticForm& q, const LinearHamiltonianMap& a);

struct ResonanceSpace {
  double nu0 = 0.0;
  double period = 0.0;
  Subspace subspace;
  Mat restricted_semisimple;
  Mat restricted_a;
  Mat restricted_omega;
  Mat semisimple;  // full-space A_s, kept for the S^1 action
  std::vector<int> harmonics;  // integer k for each included cluster (|k|)
};

struct ResonanceOptions {
  double frequency_rel_tol = 1e-6;
  double integer_tol = 1e-6;
};

ResonanceSpace resonance_space(const LinearHamiltonianMap& a, double nu0,
                               const ResonanceOptions& opts = {});

/// Positive frequencies nu with +-i nu in the spectrum (|Re| small), ascending.
std::vector<double> imaginary_frequencies(const LinearHamiltonianMap& a, double rel_tol = 1e-9);

/// Coordinates of an invariant linear map in the subspace basis.
Mat restrict(const Mat& m, const Subspace& s, double tol = 1e-8);
QuadraticForm restrict(const QuadraticForm& q, const Subspace& s);
/// Restricted symplectic form; throws DegenerateRestriction if degenerate.
SymplecticSpace restrict(const SymplecticSpace& space, const Subspace& s);

/// ||Omega A + A^T Omega||.
double symplecticity_defect(const Mat& a, const Mat& omega);

}  // namespace relmode
