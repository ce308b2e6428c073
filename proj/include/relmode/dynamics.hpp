#pragma once

#include <vector>

#include "relmode/integrators.hpp"
#include "relmode/model.hpp"

namespace relmode {

struct FlowResult {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<double> energy;
  std::vector<Vec> momentum;
  IntegrationStats stats;

  const Vec& final_state() const { return states.back(); }
  double energy_drift() const;    // max |h(t) - h(0)|
  double momentum_drift() const;  // max ||J(t) - J(0)||
};

Vec vector_field(const EquivariantHamiltonianModel& model, const Vec& v);

FlowResult flow(const EquivariantHamiltonianModel& model, const Vec& v0, double T, const IntegratorConfig& cfg,
                int intervals = 1);

/// Flow of h - J^xi, i.e. X_h(v) - xi v. Satisfies G_t = exp(-t xi) F_t.
FlowResult augmented_flow(const EquivariantHamiltonianModel& model, const Mat& xi, const Vec& v0, double T,
                          const IntegratorConfig& cfg, int intervals = 1);

struct SymplecticNormalSpaceData {
  Vec m;
  Vec xi;        // velocity, generator coefficients
  Vec mu;        // J(m)
  Mat basis;     // V_m, orthonormal columns
  Mat omega_v;   // omega restricted to V_m
  // g = g_m + m + q as orthonormal coefficient bases, with orthogonal projectors
  Mat g_m, m_alg, q_alg;
  Mat P_gm, P_m, P_q;
  Mat inner_product;  // G_m-averaged inner product
  Mat slice;          // W: columns w_i with dJ(m) w_i = e_i along m
  double sampling_error = 0.0;
};

SymplecticNormalSpaceData symplectic_normal_space(const EquivariantHamiltonianModel& model, const Vec& m,
                                                  const Vec& xi);

struct BundleTrajectory {
  std::vector<double> times;
  std::vector<Vec> theta;     // group coordinates, g = exp(sum theta_i xi_i)
  std::vector<Vec> rho;       // m* component
  std::vector<Vec> v;         // V_m coordinates
  std::vector<Vec> states;    // pi(g, rho, v) in V
  std::vector<Vec> momentum;  // mu + rho + J_{V_m}(v), Abelian case
  double momentum_drift = 0.0;
};

/// Reconstruction equations in the linear slice chart pi(g, rho, v) = g (m + W rho + B v).
/// Throws UnsupportedCase unless G is Abelian or g_m = g_mu.
BundleTrajectory bundle_flow_abelian(const EquivariantHamiltonianModel& model,
                                     const SymplecticNormalSpaceData& data, const Vec& theta0, const Vec& rho0,
                                     const Vec& v0, double T, const IntegratorConfig& cfg, int intervals = 1);

}  // namespace relmode
