#include "pendulum_grid.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace oracle {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double quartic(const State4& v, double c) {
  const double s1 = v[0] * v[0] + v[1] * v[1];
  const double s3 = v[0] * v[2] + v[1] * v[3];
  // -sqrt(1 - s1) = -1 + s1/2 + s1^2/8 + ...; kinetic correction -(x.p)^2/2
  return s1 * s1 / 8.0 - 0.5 * s3 * s3 + c * s3 * s3;
}

double dist(const State4& a, const State4& b) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

State4 torus_act(const State4& v, double theta, double phi) {
  const double ct = std::cos(theta), st = std::sin(theta);
  // (q_j, p_j) -> (cos q + sin p, -sin q + cos p)
  const State4 h{ct * v[0] + st * v[2], ct * v[1] + st * v[3], -st * v[0] + ct * v[2], -st * v[1] + ct * v[3]};
  const double cp = std::cos(phi), sp = std::sin(phi);
  return {cp * h[0] - sp * h[1], sp * h[0] + cp * h[1], cp * h[2] - sp * h[3], sp * h[2] + cp * h[3]};
}

double pendulum_averaged_quartic(const State4& v, double c) {
  // quartic in theta: 16 equispaced nodes average exactly
  constexpr int nodes = 16;
  double s = 0.0;
  for (int k = 0; k < nodes; ++k) s += quartic(torus_act(v, kTwoPi * k / nodes, 0.0), c);
  return s / nodes;
}

double torus_distance(const State4& a, const State4& b) {
  constexpr int grid = 64;
  double best = std::numeric_limits<double>::infinity(), bt = 0.0, bp = 0.0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double t = kTwoPi * i / grid, p = kTwoPi * j / grid;
      const double d = dist(torus_act(a, t, p), b);
      if (d < best) {
        best = d;
        bt = t;
        bp = p;
      }
    }
  double step = kTwoPi / grid;
  while (step > 1e-12) {
    bool improved = false;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        if (di == 0 && dj == 0) continue;
        const double t = bt + di * step, p = bp + dj * step;
        const double d = dist(torus_act(a, t, p), b);
        if (d < best) {
          best = d;
          bt = t;
          bp = p;
          improved = true;
        }
      }
    if (!improved) step *= 0.5;
  }
  return best;
}

GridEnumeration pendulum_grid_orbits(double lambda, double c, int n_alpha, int n_phase) {
  if (std::abs(lambda) >= 1.0) throw std::domain_error("|lambda| < 1 required for a nonempty level set");
  const double s2 = std::sqrt(2.0);
  // sin(2 alpha) >= |lambda|
  const double a_min = 0.5 * std::asin(std::abs(lambda));
  const double a_max = 0.5 * std::numbers::pi - a_min;
  GridEnumeration out;
  for (int ia = 0; ia < n_alpha; ++ia) {
    const double alpha = a_min + (a_max - a_min) * (ia + 0.5) / n_alpha;
    const double ratio = std::min(1.0, lambda / std::sin(2.0 * alpha));
    const double base = std::asin(ratio);
    for (double dphi : {base, std::numbers::pi - base}) {
      for (int ip = 0; ip < n_phase; ++ip) {
        const double phi1 = kTwoPi * ip / n_phase;
        const double phi2 = phi1 + dphi;
        // z = q + i p
        const State4 v{s2 * std::cos(alpha) * std::cos(phi1), s2 * std::sin(alpha) * std::cos(phi2),
                       s2 * std::cos(alpha) * std::sin(phi1), s2 * std::sin(alpha) * std::sin(phi2)};
        ++out.n_points;
        const double f = pendulum_averaged_quartic(v, c);
        bool assigned = false;
        for (auto& o : out.orbits) {
          if (std::abs(o.value - f) > 1e-9) continue;
          if (torus_distance(v, o.representative) <= 1e-6) {
            ++o.count;
            assigned = true;
            break;
          }
        }
        if (!assigned) out.orbits.push_back({v, f, 1});
      }
    }
  }
  return out;
}

}  // namespace oracle
