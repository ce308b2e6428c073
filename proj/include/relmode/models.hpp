#pragma once

#include <string>
#include <vector>

#include "relmode/model.hpp"

namespace relmode {

/// coef * prod_i s_i^powers[i] over a model's invariant variables.
struct PolyTerm {
  std::vector<int> powers;
  double coef = 0.0;
};

struct PendulumParams {
  double m = 1.0, l = 1.0, g = 1.0;
  // phi in (x^2+y^2, px^2+py^2, x px + y py); every term of order >= 2
  std::vector<PolyTerm> phi = {{{0, 0, 2}, 0.1}};
};

struct SpringParams {
  double m = 1.0, l = 1.0, g = 1.0, k = 1.0;
  // higher-order part of sigma in (x^2+y^2, px^2+py^2, zeta, pz), zeta = z - z*;
  // every term of degree >= 3 in the state
  std::vector<PolyTerm> sigma = {{{2, 0, 0, 0}, 0.04}, {{1, 0, 2, 0}, 0.02}, {{0, 0, 4, 0}, 0.03},
                                 {{0, 0, 0, 4}, 0.01}, {{0, 2, 0, 0}, 0.015}};
};

struct So3Params {
  double a = 0.5, b = 0.5;
  // f in (|p|^2, |q|^2, q.p); every term of order >= 2
  std::vector<PolyTerm> f = {{{0, 0, 2}, 0.05}};
};

struct HarmonicParams {
  std::vector<double> frequencies = {1.0, 1.0};
  double coupling = 0.0;
  std::string group = "trivial";  // trivial | torus | rotation
};

EquivariantHamiltonianModel spherical_pendulum(const PendulumParams& p = {});
EquivariantHamiltonianModel spring_pendulum_3d(const SpringParams& p = {});
EquivariantHamiltonianModel so3_isotropic(const So3Params& p = {});
EquivariantHamiltonianModel harmonic_fixture(const HarmonicParams& p = {});

struct ModelInfo {
  std::string name;
  std::string description;
  std::string group;
  int dim = 0;
};

std::vector<ModelInfo> list_models();

/// Circular frequency of the spring pendulum linearization: sqrt(k) in every direction.
double spring_frequency(const SpringParams& p);

}  // namespace relmode
