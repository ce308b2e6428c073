#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "relmode/linalg.hpp"
#include "relmode/symplectic.hpp"

namespace relmode {

enum class GroupKind { trivial, circle, torus, so3 };

std::string to_string(GroupKind kind);

/// One conjugacy class of closed subgroups K in the hardcoded table.
struct SubgroupClass {
  std::string name;
  int dim = 0;                  // dim K
  int dim_normalizer = 0;       // dim N(K)
  std::vector<Vec> algebra;     // basis of k, as coefficient vectors in g
  std::vector<int> quotient;    // g-basis indices whose span represents l = n(K)/k
  int dim_quotient() const { return static_cast<int>(quotient.size()); }
};

class GroupDescriptor {
 public:
  static GroupDescriptor trivial();
  static GroupDescriptor circle();
  static GroupDescriptor torus(int k);
  static GroupDescriptor so3();

  GroupKind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool abelian() const { return kind_ != GroupKind::so3; }
  const std::vector<SubgroupClass>& subgroups() const { return subgroups_; }
  const SubgroupClass& subgroup(const std::string& name) const;

  /// dim (N(K)/K)_lambda, the coadjoint isotropy of lambda in l*.
  int coadjoint_isotropy_dim(const SubgroupClass& k, std::span<const double> lambda) const;
  /// Basis of the coadjoint isotropy algebra of mu in g* (coefficient vectors).
  std::vector<Vec> coadjoint_isotropy(std::span<const double> mu) const;

 private:
  GroupKind kind_ = GroupKind::trivial;
  int dim_ = 0;
  std::vector<SubgroupClass> subgroups_;
};

/// Linear canonical G-representation given by its infinitesimal generators.
class LinearAction {
 public:
  LinearAction(GroupDescriptor group, std::vector<Mat> generators);

  const GroupDescriptor& group() const { return group_; }
  const std::vector<Mat>& generators() const { return generators_; }
  int space_dim() const { return space_dim_; }

  /// sum_i coeffs_i xi_i
  Mat algebra_element(std::span<const double> coeffs) const;
  /// exp(sum_i theta_i xi_i)
  Mat element(std::span<const double> theta) const;
  /// Columns xi_i v.
  Mat orbit_tangent(const Vec& v) const;

  /// Max over generators of ||Omega xi + xi^T Omega||.
  double canonical_defect(const Mat& omega) const;
  /// Max deviation from the group's bracket relations.
  double bracket_defect() const;

  /// Restriction of every generator to an invariant subspace.
  std::vector<Mat> restricted_generators(const Subspace& s) const;

 private:
  GroupDescriptor group_;
  std::vector<Mat> generators_;
  int space_dim_ = 0;
};

/// J^{xi_i}(v) = v^T M_i v with M_i = 1/2 sym(xi_i^T Omega), i.e. <J(v), xi> = 1/2 omega(xi v, v).
struct MomentumMapQuadratic {
  std::vector<Mat> coefficients;

  int dim() const { return static_cast<int>(coefficients.size()); }
  Vec operator()(const Vec& v) const;
  double component(int i, const Vec& v) const { return v.dot(coefficients[i] * v); }
  /// Rows are dJ^{xi_i}(v).
  Mat jacobian(const Vec& v) const;
};

MomentumMapQuadratic momentum_map(const LinearAction& action, const SymplecticSpace& space);

Subspace fixed_point_space(const LinearAction& action, const std::string& subgroup);
/// Fixed vectors of K inside a given invariant subspace.
Subspace fixed_point_space(const LinearAction& action, const SubgroupClass& k, const Subspace& inside);

struct IsotropyDatum {
  std::string name;
  Subspace fixed_space;
  int dim_k = 0;
  int dim_normalizer = 0;
  int dim_l = 0;
  std::vector<int> l_coords;  // g-indices representing l*
  bool spatial = true;
  std::function<int(std::span<const double>)> dim_l_lambda;
};

/// S^1 action on U (coordinates of the resonance basis) generated by A_s / nu0.
struct CircleAction {
  Mat generator;          // in U coordinates
  Mat omega;              // restricted form on U
  double nu0 = 0.0;
  MomentumMapQuadratic momentum;
  double commutator_defect = 0.0;  // max ||[gen, xi_i|U]||
};

CircleAction circle_action_from_semisimple(const ResonanceSpace& u, const LinearAction& action);

std::vector<IsotropyDatum> isotropy_table(const LinearAction& action, const ResonanceSpace& u);

struct SimplicityProxy {
  bool passed = false;
  double complex_structure_defect = 0.0;  // ||gen^2 + I||
  int commutant_dim = 0;
};

SimplicityProxy simplicity_proxy(const LinearAction& action, const ResonanceSpace& u, const CircleAction& circle);

struct SpatiotemporalSubgroup {
  std::string spatial_name;
  int weight = 0;
  Vec temporal_velocity;  // rho_H against K's generators
  Subspace fixed_space;   // full-space vectors inside U
  int dim_k = 0;
  int dim_normalizer = 0;
};

struct SpatiotemporalResult {
  std::vector<SpatiotemporalSubgroup> subgroups;
  SimplicityProxy proxy;
};

/// Enumerates twisted fixed spaces for |w| <= weight_window. Throws NotSimpleAction
/// when the simplicity proxy fails unless `force` is set.
SpatiotemporalResult spatiotemporal_subgroups(const LinearAction& action, const ResonanceSpace& u,
                                              const CircleAction& circle, int weight_window = 3,
                                              bool force = false);

/// Structure constants c(i, j) = coefficients of [xi_i, xi_j] in the generator basis.
std::vector<std::vector<Vec>> structure_constants(const LinearAction& action);

/// Poisson bracket {f, g}(v) = omega(X_f, X_g) from the two gradients.
double poisson_bracket(const SymplecticSpace& space, const Vec& grad_f, const Vec& grad_g);

}  // namespace relmode
