#include "relmode/equivariance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "relmode/errors.hpp"

namespace relmode {

std::string to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::trivial: return "trivial";
    case GroupKind::circle: return "circle";
    case GroupKind::torus: return "torus";
    case GroupKind::so3: return "so3";
  }
  return "unknown";
}

namespace {

Vec unit(int dim, int i) {
  Vec e = Vec::Zero(dim);
  e(i) = 1.0;
  return e;
}

std::vector<int> range_except(int n, int skip) {
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    if (i != skip) out.push_back(i);
  }
  return out;
}

}  // namespace

GroupDescriptor GroupDescriptor::trivial() {
  GroupDescriptor g;
  g.kind_ = GroupKind::trivial;
  g.dim_ = 0;
  g.subgroups_.push_back({"e", 0, 0, {}, {}});
  return g;
}

GroupDescriptor GroupDescriptor::circle() {
  GroupDescriptor g;
  g.kind_ = GroupKind::circle;
  g.dim_ = 1;
  g.subgroups_.push_back({"e", 0, 1, {}, {0}});
  g.subgroups_.push_back({"S1", 1, 1, {unit(1, 0)}, {}});
  return g;
}

GroupDescriptor GroupDescriptor::torus(int k) {
  if (k < 1) throw Error(ErrorCode::UnsupportedGroup, "torus rank must be positive");
  GroupDescriptor g;
  g.kind_ = GroupKind::torus;
  g.dim_ = k;
  std::vector<int> all(k);
  for (int i = 0; i < k; ++i) all[i] = i;
  g.subgroups_.push_back({"e", 0, k, {}, all});
  if (k > 1) {
    for (int i = 0; i < k; ++i) {
      g.subgroups_.push_back({"S1_" + std::to_string(i), 1, k, {unit(k, i)}, range_except(k, i)});
    }
  }
  std::vector<Vec> full;
  for (int i = 0; i < k; ++i) full.push_back(unit(k, i));
  g.subgroups_.push_back({"T" + std::to_string(k), k, k, full, {}});
  return g;
}

GroupDescriptor GroupDescriptor::so3() {
  GroupDescriptor g;
  g.kind_ = GroupKind::so3;
  g.dim_ = 3;
  g.subgroups_.push_back({"e", 0, 3, {}, {0, 1, 2}});
  // N(SO(2)) = O(2): the quotient is finite, so l = 0.
  g.subgroups_.push_back({"SO2", 1, 1, {unit(3, 2)}, {}});
  g.subgroups_.push_back({"SO3", 3, 3, {unit(3, 0), unit(3, 1), unit(3, 2)}, {}});
  return g;
}

const SubgroupClass& GroupDescriptor::subgroup(const std::string& name) const {
  for (const auto& s : subgroups_) {
    if (s.name == name) return s;
  }
  throw Error(ErrorCode::UnknownSubgroup, name + " is not in the " + to_string(kind_) + " table");
}

int GroupDescriptor::coadjoint_isotropy_dim(const SubgroupClass& k, std::span<const double> lambda) const {
  const int dl = k.dim_quotient();
  if (kind_ != GroupKind::so3 || dl == 0) return dl;  // Abelian quotients
  double norm2 = 0.0;
  for (double x : lambda) norm2 += x * x;
  return norm2 > 1e-24 ? 1 : 3;
}

std::vector<Vec> GroupDescriptor::coadjoint_isotropy(std::span<const double> mu) const {
  std::vector<Vec> out;
  if (kind_ != GroupKind::so3) {
    for (int i = 0; i < dim_; ++i) out.push_back(unit(dim_, i));
    return out;
  }
  Vec m = Vec::Zero(3);
  for (std::size_t i = 0; i < std::min<std::size_t>(3, mu.size()); ++i) m(static_cast<int>(i)) = mu[i];
  if (m.norm() > 1e-14) {
    out.push_back(m.normalized());
  } else {
    for (int i = 0; i < 3; ++i) out.push_back(unit(3, i));
  }
  return out;
}

LinearAction::LinearAction(GroupDescriptor group, std::vector<Mat> generators)
    : group_(std::move(group)), generators_(std::move(generators)) {
  if (static_cast<int>(generators_.size()) != group_.dim()) {
    throw Error(ErrorCode::UnsupportedGroup, "generator count does not match group dimension");
  }
  space_dim_ = generators_.empty() ? 0 : static_cast<int>(generators_.front().rows());
}

Mat LinearAction::algebra_element(std::span<const double> coeffs) const {
  Mat x = Mat::Zero(space_dim_, space_dim_);
  for (std::size_t i = 0; i < generators_.size() && i < coeffs.size(); ++i) x += coeffs[i] * generators_[i];
  return x;
}

Mat LinearAction::element(std::span<const double> theta) const {
  if (generators_.empty()) return Mat();
  return expm(algebra_element(theta));
}

Mat LinearAction::orbit_tangent(const Vec& v) const {
  Mat t(v.size(), generators_.size());
  for (std::size_t i = 0; i < generators_.size(); ++i) t.col(static_cast<int>(i)) = generators_[i] * v;
  return t;
}

double LinearAction::canonical_defect(const Mat& omega) const {
  double worst = 0.0;
  for (const auto& x : generators_) worst = std::max(worst, symplecticity_defect(x, omega));
  return worst;
}

std::vector<std::vector<Vec>> structure_constants(const LinearAction& action) {
  const auto& gens = action.generators();
  const int d = static_cast<int>(gens.size());
  std::vector<std::vector<Vec>> c(d, std::vector<Vec>(d, Vec::Zero(d)));
  if (d == 0) return c;
  const int n = action.space_dim();
  Mat basis(n * n, d);
  for (int k = 0; k < d; ++k) basis.col(k) = Eigen::Map<const Vec>(gens[k].data(), n * n);
  auto solver = basis.completeOrthogonalDecomposition();
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const Mat br = gens[i] * gens[j] - gens[j] * gens[i];
      c[i][j] = solver.solve(Eigen::Map<const Vec>(br.data(), n * n));
    }
  }
  return c;
}

double LinearAction::bracket_defect() const {
  double worst = 0.0;
  const int d = static_cast<int>(generators_.size());
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      Mat br = generators_[i] * generators_[j] - generators_[j] * generators_[i];
      if (group_.kind() == GroupKind::so3) {
        // [xi_i, xi_j] = eps_ijk xi_k
        for (int k = 0; k < 3; ++k) {
          const int eps = ((i - j) * (j - k) * (k - i)) / 2;
          br -= eps * generators_[k];
        }
      }
      worst = std::max(worst, br.norm());
    }
  }
  return worst;
}

std::vector<Mat> LinearAction::restricted_generators(const Subspace& s) const {
  std::vector<Mat> out;
  for (const auto& x : generators_) out.push_back(restrict(x, s, 1e-8));
  return out;
}

Vec MomentumMapQuadratic::operator()(const Vec& v) const {
  Vec j(coefficients.size());
  for (std::size_t i = 0; i < coefficients.size(); ++i) j(static_cast<int>(i)) = v.dot(coefficients[i] * v);
  return j;
}

Mat MomentumMapQuadratic::jacobian(const Vec& v) const {
  Mat jac(coefficients.size(), v.size());
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    jac.row(static_cast<int>(i)) = (2.0 * coefficients[i] * v).transpose();
  }
  return jac;
}

MomentumMapQuadratic momentum_map(const LinearAction& action, const SymplecticSpace& space) {
  MomentumMapQuadratic j;
  for (const auto& x : action.generators()) {
    if (symplecticity_defect(x, space.omega()) > 1e-10 * std::max(1.0, x.norm())) {
      throw Error(ErrorCode::NotCanonicalAction, "generator is not infinitesimally symplectic");
    }
    j.coefficients.push_back(0.5 * symmetric_part(x.transpose() * space.omega()));
  }
  return j;
}

Subspace fixed_point_space(const LinearAction& action, const SubgroupClass& k, const Subspace& inside) {
  if (k.algebra.empty()) return inside;
  const Mat& b = inside.basis;
  Mat stacked(static_cast<int>(k.algebra.size()) * action.space_dim(), b.cols());
  for (std::size_t i = 0; i < k.algebra.size(); ++i) {
    const Vec& c = k.algebra[i];
    stacked.middleRows(static_cast<int>(i) * action.space_dim(), action.space_dim()) =
        action.algebra_element({c.data(), static_cast<std::size_t>(c.size())}) * b;
  }
  Subspace out;
  out.basis = b * null_space(stacked, 1e-10);
  return out;
}

Subspace fixed_point_space(const LinearAction& action, const std::string& subgroup) {
  return fixed_point_space(action, action.group().subgroup(subgroup), Subspace::whole(action.space_dim()));
}

CircleAction circle_action_from_semisimple(const ResonanceSpace& u, const LinearAction& action) {
  CircleAction c;
  c.nu0 = u.nu0;
  c.generator = u.restricted_semisimple / u.nu0;
  c.omega = u.restricted_omega;
  const int d = static_cast<int>(c.generator.rows());
  const Mat period_map = expm(2.0 * std::numbers::pi * c.generator);
  if ((period_map - Mat::Identity(d, d)).norm() > 1e-8) {
    throw Error(ErrorCode::NonPeriodicGenerator, "exp(2 pi A_s / nu0) != I on U");
  }
  c.momentum.coefficients.push_back(0.5 * symmetric_part(c.generator.transpose() * c.omega));
  for (const auto& x : action.restricted_generators(u.subspace)) {
    c.commutator_defect = std::max(c.commutator_defect, (c.generator * x - x * c.generator).norm());
  }
  return c;
}

std::vector<IsotropyDatum> isotropy_table(const LinearAction& action, const ResonanceSpace& u) {
  const GroupDescriptor& g = action.group();
  std::vector<IsotropyDatum> out;
  for (const auto& k : g.subgroups()) {
    Subspace fixed = fixed_point_space(action, k, u.subspace);
    if (fixed.dim() == 0) continue;
    IsotropyDatum d;
    d.name = k.name;
    d.fixed_space = fixed;
    d.dim_k = k.dim;
    d.dim_normalizer = k.dim_normalizer;
    d.dim_l = k.dim_quotient();
    d.l_coords = k.quotient;
    const GroupDescriptor group = g;
    const SubgroupClass sub = k;
    d.dim_l_lambda = [group, sub](std::span<const double> lambda) {
      return group.coadjoint_isotropy_dim(sub, lambda);
    };
    out.push_back(std::move(d));
  }
  return out;
}

SimplicityProxy simplicity_proxy(const LinearAction& action, const ResonanceSpace& u, const CircleAction& circle) {
  SimplicityProxy p;
  const int d = static_cast<int>(circle.generator.rows());
  p.complex_structure_defect = (circle.generator * circle.generator + Mat::Identity(d, d)).norm();
  // commutant {X : X xi = xi X} via vec(X xi - xi X) = (xi^T (x) I - I (x) xi) vec(X)
  const auto gens = action.restricted_generators(u.subspace);
  Mat sys(static_cast<int>(gens.size()) * d * d, d * d);
  for (std::size_t g = 0; g < gens.size(); ++g) {
    for (int col = 0; col < d * d; ++col) {
      Mat e = Mat::Zero(d, d);
      e(col % d, col / d) = 1.0;
      const Mat r = e * gens[g] - gens[g] * e;
      sys.block(static_cast<int>(g) * d * d, col, d * d, 1) = Eigen::Map<const Vec>(r.data(), d * d);
    }
  }
  p.commutant_dim = gens.empty() ? d * d : static_cast<int>(null_space(sys, 1e-10).cols());
  p.passed = p.complex_structure_defect <= 1e-8 && circle.commutator_defect <= 1e-8;
  return p;
}

SpatiotemporalResult spatiotemporal_subgroups(const LinearAction& action, const ResonanceSpace& u,
                                              const CircleAction& circle, int weight_window, bool force) {
  SpatiotemporalResult out;
  out.proxy = simplicity_proxy(action, u, circle);
  if (!out.proxy.passed && !force) {
    throw Error(ErrorCode::NotSimpleAction, "commutant proxy: A_s/nu0 is not a complex structure on U");
  }
  const Mat& b = u.subspace.basis;
  const int d = static_cast<int>(b.cols());
  for (const auto& k : action.group().subgroups()) {
    if (k.dim == 0) {
      out.subgroups.push_back({k.name, 0, Vec(), u.subspace, 0, k.dim_normalizer});
      continue;
    }
    if (k.dim != 1) continue;  // characters enumerated only for one-dimensional K
    const Vec& c = k.algebra.front();
    const Mat xi = restrict(action.algebra_element({c.data(), static_cast<std::size_t>(c.size())}), u.subspace, 1e-8);
    for (int w = -weight_window; w <= weight_window; ++w) {
      const Mat twisted = xi + static_cast<double>(w) * circle.generator;
      const Mat ker = null_space(twisted, 1e-9);
      if (ker.cols() == 0) continue;
      SpatiotemporalSubgroup s;
      s.spatial_name = k.name;
      s.weight = w;
      s.temporal_velocity = Vec::Constant(1, static_cast<double>(w));
      s.fixed_space.basis = orthonormal_basis(b * ker);
      s.dim_k = 1;
      s.dim_normalizer = k.dim_normalizer;
      (void)d;
      out.subgroups.push_back(std::move(s));
    }
  }
  return out;
}

double poisson_bracket(const SymplecticSpace& space, const Vec& grad_f, const Vec& grad_g) {
  return space.pairing(space.hamiltonian_vector(grad_f), space.hamiltonian_vector(grad_g));
}

}  // namespace relmode
