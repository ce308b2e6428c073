#pragma once

#include <array>
#include <vector>

namespace oracle {

using State4 = std::array<double, 4>;  // (x, y, px, py)

/// Quartic Taylor term of the unit spherical pendulum (m = l = g = 1) with phi = c (x px + y py)^2,
/// averaged over the harmonic flow of its quadratic part.
double pendulum_averaged_quartic(const State4& v, double c);

/// Action of (theta, phi) in T^2: harmonic rotation by theta in each (q_j, p_j) plane and
/// spatial rotation by phi of (x, y) and (px, py).
State4 torus_act(const State4& v, double theta, double phi);

/// min over T^2 of |g a - b|, coarse grid then pattern search.
double torus_distance(const State4& a, const State4& b);

struct GridOrbit {
  State4 representative;
  double value = 0.0;
  int count = 0;  // grid points assigned to this orbit
};

struct GridEnumeration {
  int n_points = 0;
  std::vector<GridOrbit> orbits;
};

/// Enumerates {|v|^2 = 2, x py - y px = lambda} on a grid of 2 * n_alpha * n_phase points
/// (z1 = sqrt2 cos(alpha) e^{i phi1}, z2 = sqrt2 sin(alpha) e^{i phi2}, sin(2 alpha) sin(phi2 - phi1) = lambda)
/// and clusters greedily modulo T^2.
GridEnumeration pendulum_grid_orbits(double lambda, double c, int n_alpha = 100, int n_phase = 50);

}  // namespace oracle
