#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "relmode/equivariance.hpp"
#include "relmode/linalg.hpp"
#include "relmode/symplectic.hpp"

namespace relmode {

struct ModelSpec {
  std::string name;
  std::map<std::string, double> params;
  std::vector<std::string> notes;
};

/// (V, omega, G, J, h) with V linear and G acting linearly. States are measured
/// from the equilibrium, so h(0) = 0 and dh(0) = 0.
class EquivariantHamiltonianModel {
 public:
  using ScalarFn = std::function<double(const Vec&)>;
  using VectorFn = std::function<Vec(const Vec&)>;
  using MatrixFn = std::function<Mat(const Vec&)>;
  using DomainFn = std::function<bool(const Vec&)>;

  EquivariantHamiltonianModel(ModelSpec spec, SymplecticSpace space, LinearAction action, ScalarFn h,
                              VectorFn grad, MatrixFn hess = {}, DomainFn domain = {});

  const ModelSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  const SymplecticSpace& space() const { return space_; }
  const LinearAction& action() const { return action_; }
  const MomentumMapQuadratic& momentum() const { return momentum_; }
  int dim() const { return space_.dim(); }

  double h(const Vec& v) const { return h_(v); }
  Vec grad_h(const Vec& v) const { return grad_(v); }
  /// Analytic when provided, else Richardson-extrapolated central differences of grad_h.
  Mat hess_h(const Vec& v) const;
  Vec vector_field(const Vec& v) const { return space_.hamiltonian_vector(grad_(v)); }
  Vec J(const Vec& v) const { return momentum_(v); }
  bool in_domain(const Vec& v) const { return !domain_ || domain_(v); }

  /// Max |h(g v) - h(v)| over sampled group elements and states of norm <= radius.
  double invariance_defect(int samples, std::uint64_t seed, double radius) const;
  /// Max relative mismatch between grad_h and central differences of h.
  double gradient_defect(int samples, std::uint64_t seed, double radius) const;

  Vec equilibrium;                  // equilibrium in the original coordinates
  std::vector<std::string> labels;  // coordinate names, q block then p block

 private:
  ModelSpec spec_;
  SymplecticSpace space_;
  LinearAction action_;
  MomentumMapQuadratic momentum_;
  ScalarFn h_;
  VectorFn grad_;
  MatrixFn hess_;
  DomainFn domain_;
};

/// Richardson-extrapolated central-difference Jacobian of a vector function.
Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& v, double step);

}  // namespace relmode
